"""Sweep engines: frequency-angular grids, gain/agreement curves, and
1D detection spectra.

Every sweep is a pure map over grid pixels followed by deterministic
reductions, so results are bitwise independent of the worker count.
Pixels that cannot be evaluated (material range, grazing idler,
resonance poles, non-finite intermediates) are collected in an error
mask instead of aborting; masked pixels are excluded from
normalization and R-squared.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import GeometryError, ResonancePoleError, ZeroVarianceError
from .layerstack import (
    InterfaceCoeffs,
    coefficient_arrays,
    enhancement_arrays,
    round_trip_denominator,
)
from .materials import Mode, index_with_mask, refractive_index
from .rigorous import (
    InteractionParams,
    boundary_matrices,
    gain_term,
    interaction_matrix,
    pair_probabilities,
    scattering_matrix,
)
from .simplified import sinc

__all__ = [
    "SpectrumGrid",
    "EnvelopeModel",
    "GainCurvePoint",
    "solve_idler",
    "frequency_angular_spectrum",
    "r_squared",
    "compare_grids",
    "gain_and_agreement_curve",
    "detection_spectrum",
    "transmission_curve",
]

_KPAR_FLOOR = 1e-12
_POLE_FLOOR = 1e-9


@dataclass
class SpectrumGrid:
    """Per-scheme 2D intensities over (signal wavelength x internal angle).

    `mask` flags pixels that could not be evaluated; intensities there
    are zero and excluded from normalization.
    """

    signal_wavelengths_nm: np.ndarray
    internal_angles_rad: np.ndarray
    intensity: dict
    mask: np.ndarray
    normalization: str = "raw"

    def normalized(self):
        """Unit-max copy: the global maximum over all schemes is 1."""
        peak = 0.0
        for arr in self.intensity.values():
            valid = arr[~self.mask]
            if valid.size:
                peak = max(peak, float(np.max(valid)))
        if peak <= 0:
            raise ZeroVarianceError("cannot normalize an all-zero or all-masked grid")
        scaled = {k: v / peak for k, v in self.intensity.items()}
        return SpectrumGrid(
            signal_wavelengths_nm=self.signal_wavelengths_nm,
            internal_angles_rad=self.internal_angles_rad,
            intensity=scaled,
            mask=self.mask,
            normalization="unit-max",
        )


@dataclass(frozen=True)
class EnvelopeModel:
    """Gaussian detection envelope in wavelength."""

    center_nm: float
    fwhm_nm: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.fwhm_nm <= 0 or self.amplitude <= 0:
            raise ValueError("envelope fwhm and amplitude must be positive")

    def __call__(self, wavelength_nm):
        arg = (np.asarray(wavelength_nm, dtype=float) - self.center_nm) / self.fwhm_nm
        return self.amplitude * np.exp(-4.0 * np.log(2.0) * arg ** 2)


@dataclass(frozen=True)
class GainCurvePoint:
    """One row of the gain/agreement sweep."""

    beta_scale: float
    beta_plus_abs: float
    beta_over_half_delta: float
    re_gamma_plus: float
    r_squared: float


def solve_idler(pump, signal, stack):
    """Idler mode from energy conservation and transverse matching.

    The idler frequency satisfies 1/lam_i = 1/lam_p - 1/lam_s and its
    internal angle zeroes the transverse wavevector mismatch whenever
    a real angle allows it (clamped to grazing otherwise).
    """
    if signal.vacuum_wavelength_nm <= pump.vacuum_wavelength_nm:
        raise GeometryError(
            "energy conservation requires the signal wavelength to exceed the "
            "pump wavelength"
        )
    # Rational form of 1/lam_i = 1/lam_p - 1/lam_s; exact for the
    # degenerate case in floating point.
    lam_p = pump.vacuum_wavelength_nm
    lam_s = signal.vacuum_wavelength_nm
    lam_i = lam_p * lam_s / (lam_s - lam_p)
    n_s = refractive_index(stack.film, signal.vacuum_wavelength_nm)
    n_i = refractive_index(stack.film, lam_i)
    k_s = 2.0 * np.pi * n_s / signal.vacuum_wavelength_nm
    k_i = 2.0 * np.pi * n_i / lam_i
    ratio = np.clip(-k_s * np.sin(signal.internal_angle_rad) / k_i, -1.0, 1.0)
    theta_i = float(np.arcsin(ratio))
    # Mode forbids |theta| = pi/2 exactly; keep the clamp inside the open
    # interval, the grazing pixel is masked downstream anyway.
    limit = np.pi / 2 - 1e-12
    theta_i = float(np.clip(theta_i, -limit, limit))
    return Mode(
        vacuum_wavelength_nm=float(lam_i),
        internal_angle_rad=theta_i,
        polarization=signal.polarization,
        role="idler",
    )


# ---------------------------------------------------------------------------
# vectorized kinematics shared by all sweep engines
# ---------------------------------------------------------------------------


@dataclass
class _PixelBatch:
    """Flat per-pixel arrays for one chunk of a sweep."""

    lam_s: np.ndarray
    theta_s: np.ndarray
    lam_i: np.ndarray
    theta_i: np.ndarray
    delta: np.ndarray
    dk_par: np.ndarray
    dk_perp: np.ndarray
    phi_s: np.ndarray
    phi_i: np.ndarray
    coeffs_s: tuple
    coeffs_i: tuple
    beta_p: np.ndarray
    beta_m: np.ndarray
    gauss: np.ndarray
    mask: np.ndarray


def _pump_state(config, stack):
    """Pump-side constants: enhancement amplitudes and phase."""
    pol = config.polarization
    lam_p = config.pump_wavelength_nm
    t1, r1, t2, r2 = coefficient_arrays(stack, lam_p, 0.0, pol)
    n_p = refractive_index(stack.film, lam_p)
    phi_p = stack.thickness_nm * 2.0 * np.pi * n_p / lam_p
    den = round_trip_denominator(r1, r2, phi_p)
    if abs(den) < _POLE_FLOOR:
        raise ResonancePoleError("pump etalon sits exactly on a lossless resonance pole")
    e_fwd = t1 / den
    e_bwd = r2 * np.exp(1j * phi_p) * e_fwd
    kp_par = 2.0 * np.pi * n_p / lam_p
    return e_fwd, e_bwd, kp_par


def _beta_arrays(config, stack, lam_s, lam_i, ks_par, ki_par, e_fwd, e_bwd):
    """Forward/backward interaction strengths per pixel.

    With a direct beta scale the strengths are constant across the
    grid (scale times the pump enhancement).  With the chi2/field
    route the full kinematic prefactor applies per pixel.
    """
    if config.beta_plus is not None:
        scale = complex(config.beta_plus)
        shape = np.shape(lam_s)
        return (
            np.full(shape, scale * e_fwd, dtype=complex),
            np.full(shape, scale * e_bwd, dtype=complex),
        )
    c = 2.99792458e8
    omega_s = 2.0 * np.pi * c / (lam_s * 1e-9)
    omega_i = 2.0 * np.pi * c / (lam_i * 1e-9)
    chi2 = (stack.chi2_pm_per_v or 0.0) * 1e-12
    length_m = stack.thickness_nm * 1e-9
    k_prod = np.sqrt(np.maximum(ks_par, _KPAR_FLOOR) * np.maximum(ki_par, _KPAR_FLOOR)) * 1e9
    pref = 2.0 * np.pi * omega_s * omega_i * chi2 * length_m / (c ** 2 * k_prod)
    field = config.pump_field_v_per_m
    return pref * field * e_fwd, pref * field * e_bwd


def _masked_indices(stack, lam):
    """(n1, n2, n3) evaluated range-safely plus the validity mask."""
    n1, ok1 = index_with_mask(stack.superstrate, lam)
    n2, ok2 = index_with_mask(stack.film, lam)
    n3, ok3 = index_with_mask(stack.substrate, lam)
    return (n1, n2, n3), ok1 & ok2 & ok3


def _build_batch(config, stack, lam_s, theta_s, pump_state):
    """Kinematics, interface coefficients, and error mask for a chunk."""
    e_fwd, e_bwd, kp_par = pump_state
    pol = config.polarization
    lam_p = config.pump_wavelength_nm
    lam_s = np.asarray(lam_s, dtype=float)
    theta_s = np.asarray(theta_s, dtype=float)
    mask = ~np.isfinite(lam_s) | (lam_s <= lam_p)

    lam_s_pos = np.where(mask, 2.0 * lam_p, lam_s)
    lam_i = np.where(mask, 2.0 * lam_p, lam_p * lam_s_pos / (lam_s_pos - lam_p))

    idx_s, ok_s = _masked_indices(stack, lam_s)
    idx_i, ok_i = _masked_indices(stack, lam_i)
    mask |= ~ok_s | ~ok_i

    n_s = idx_s[1]
    n_i = idx_i[1]
    k_s = 2.0 * np.pi * n_s / np.where(lam_s > 0, lam_s, 1.0)
    k_i = 2.0 * np.pi * n_i / lam_i
    ratio = np.clip(-k_s * np.sin(theta_s) / k_i, -1.0, 1.0)
    theta_i = np.arcsin(ratio)

    ks_par = k_s * np.cos(theta_s)
    ki_par = k_i * np.cos(theta_i)
    mask |= (ks_par <= _KPAR_FLOOR) | (ki_par <= _KPAR_FLOOR)

    # Beyond the critical angle of either photon at either outer
    # interface there is no propagating external channel; the boundary
    # formalism (flux-normalized coefficients, Stokes bookkeeping) does
    # not apply and the pixel is reported as unevaluated.
    sin_s = np.abs(n_s * np.sin(theta_s))
    sin_i = np.abs(n_i * np.sin(theta_i))
    for outer_idx in (0, 2):
        mask |= sin_s >= np.abs(idx_s[outer_idx])
        mask |= sin_i >= np.abs(idx_i[outer_idx])

    dk_par = kp_par - ks_par - ki_par
    dk_perp = -k_s * np.sin(theta_s) - k_i * np.sin(theta_i)
    delta = stack.thickness_nm * dk_par
    phi_s = stack.thickness_nm * ks_par
    phi_i = stack.thickness_nm * ki_par

    coeffs_s = coefficient_arrays(stack, lam_s, theta_s, pol, indices=idx_s)
    coeffs_i = coefficient_arrays(stack, lam_i, theta_i, pol, indices=idx_i)
    for den in (
        round_trip_denominator(coeffs_s[1], coeffs_s[3], phi_s),
        round_trip_denominator(coeffs_i[1], coeffs_i[3], phi_i),
    ):
        mask |= np.abs(den) < _POLE_FLOOR

    beta_p, beta_m = _beta_arrays(
        config, stack, lam_s, lam_i, ks_par, ki_par, e_fwd, e_bwd
    )

    waist_nm = config.pump_waist_um * 1e3
    gauss = np.exp(-((dk_perp * waist_nm) ** 2) / 2.0)

    return _PixelBatch(
        lam_s=lam_s,
        theta_s=theta_s,
        lam_i=lam_i,
        theta_i=theta_i,
        delta=delta,
        dk_par=dk_par,
        dk_perp=dk_perp,
        phi_s=phi_s,
        phi_i=phi_i,
        coeffs_s=coeffs_s,
        coeffs_i=coeffs_i,
        beta_p=beta_p,
        beta_m=beta_m,
        gauss=gauss,
        mask=mask,
    )


def _eval_simplified(batch, schemes):
    t1s, r1s, t2s, r2s = batch.coeffs_s
    t1i, r1i, t2i, r2i = batch.coeffs_i
    a1p, a1m, a3p, a3m = enhancement_arrays(t1s, r1s, t2s, r2s, batch.phi_s)
    a2p, a2m, a4p, a4m = enhancement_arrays(t1i, r1i, t2i, r2i, batch.phi_i)
    cb_p = np.conj(batch.beta_p)
    cb_m = np.conj(batch.beta_m)
    p = sinc(batch.delta / 2.0) ** 2 * batch.gauss
    pairs = {
        "ff": (a1p * a2p, a1m * a2m),
        "bb": (a3p * a4p, a3m * a4m),
        "fb": (a1p * a4p, a1m * a4m),
        "bf": (a3p * a2p, a3m * a2m),
    }
    out = {}
    for scheme in schemes:
        plus, minus = pairs[scheme]
        out[scheme] = p * np.abs(cb_p * plus + cb_m * minus) ** 2
    return out


def _eval_rigorous(batch, schemes):
    t1s, r1s, t2s, r2s = batch.coeffs_s
    t1i, r1i, t2i, r2i = batch.coeffs_i
    params = InteractionParams(
        beta_plus=batch.beta_p,
        beta_minus=batch.beta_m,
        gamma_plus=gain_term(batch.beta_p, batch.delta),
        gamma_minus=gain_term(batch.beta_m, batch.delta),
        delta=batch.delta,
        delta_k_par=batch.dk_par,
        delta_k_perp=batch.dk_perp,
    )
    w = interaction_matrix(params)
    tau1, tau2, rho = boundary_matrices(
        InterfaceCoeffs(t1=t1s, r1=r1s, t2=t2s, r2=r2s),
        InterfaceCoeffs(t1=t1i, r1=r1i, t2=t2i, r2=r2i),
        batch.phi_s,
        batch.phi_i,
    )
    u = scattering_matrix(w, tau1, tau2, rho, check_condition=False)
    probs = pair_probabilities(u)
    return {scheme: getattr(probs, scheme) * batch.gauss for scheme in schemes}


def _eval_nonresonant(batch, schemes):
    p = sinc(batch.delta / 2.0) ** 2 * batch.gauss
    zero = np.zeros_like(p)
    return {scheme: (p if scheme == "ff" else zero) for scheme in schemes}


_EVALUATORS = {
    "simplified": _eval_simplified,
    "rigorous": _eval_rigorous,
    "nonresonant": _eval_nonresonant,
}


def _evaluate_pixels(config, stack, lam_flat, theta_flat, model, schemes, threads=1):
    """Map the model over flat pixel arrays; deterministic in `threads`."""
    pump_state = _pump_state(config, stack)
    evaluator = _EVALUATORS[model]

    def eval_range(lo, hi):
        with np.errstate(all="ignore"):
            batch = _build_batch(
                config, stack, lam_flat[lo:hi], theta_flat[lo:hi], pump_state
            )
            values = evaluator(batch, schemes)
        mask = batch.mask.copy()
        for scheme in schemes:
            arr = np.asarray(values[scheme], dtype=float)
            mask |= ~np.isfinite(arr)
        for scheme in schemes:
            values[scheme] = np.where(mask, 0.0, np.asarray(values[scheme], dtype=float))
        return values, mask

    n = lam_flat.size
    if threads <= 1 or n < 2048:
        return eval_range(0, n)

    bounds = np.linspace(0, n, threads + 1).astype(int)
    jobs = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    out = {scheme: np.zeros(n) for scheme in schemes}
    mask = np.zeros(n, dtype=bool)
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        results = list(pool.map(lambda job: eval_range(*job), jobs))
    for (lo, hi), (values, chunk_mask) in zip(jobs, results):
        mask[lo:hi] = chunk_mask
        for scheme in schemes:
            out[scheme][lo:hi] = values[scheme]
    return out, mask


def frequency_angular_spectrum(config, model=None, threads=1):
    """Per-scheme intensity grid over the configured wavelength/angle axes.

    For each pixel the idler is solved from energy conservation and
    transverse matching, the selected model is evaluated, and failures
    are recorded in the grid's error mask.  The result is raw
    (unnormalized); call `.normalized()` for the unit-max version.
    """
    model = model or config.model
    if model not in _EVALUATORS:
        raise ValueError(f"model must be one of {sorted(_EVALUATORS)}")
    stack = config.build_stack()
    lams = config.signal_wavelengths()
    thetas = config.internal_angles()
    lam_grid, theta_grid = np.meshgrid(lams, thetas, indexing="ij")
    shape = lam_grid.shape
    values, mask = _evaluate_pixels(
        config,
        stack,
        lam_grid.ravel(),
        theta_grid.ravel(),
        model,
        tuple(config.schemes),
        threads=threads,
    )
    intensity = {s: values[s].reshape(shape) for s in config.schemes}
    return SpectrumGrid(
        signal_wavelengths_nm=lams,
        internal_angles_rad=thetas,
        intensity=intensity,
        mask=mask.reshape(shape),
    )


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------


def r_squared(candidate, reference, mask=None):
    """Coefficient of determination on unit-max-normalized data.

    `reference` is the trusted side.  Masked entries are excluded; a
    constant reference raises ZeroVarianceError.
    """
    a = np.asarray(candidate, dtype=float)
    b = np.asarray(reference, dtype=float)
    if a.shape != b.shape:
        raise ValueError("arrays must have the same shape")
    keep = np.isfinite(a) & np.isfinite(b)
    if mask is not None:
        keep &= ~np.asarray(mask, dtype=bool)
    a = a[keep]
    b = b[keep]
    if a.size == 0:
        raise ZeroVarianceError("no unmasked data to compare")
    a_peak = np.max(np.abs(a))
    b_peak = np.max(np.abs(b))
    if a_peak > 0:
        a = a / a_peak
    if b_peak > 0:
        b = b / b_peak
    var = np.sum((b - np.mean(b)) ** 2)
    if var == 0:
        raise ZeroVarianceError("reference array has zero variance")
    return float(1.0 - np.sum((a - b) ** 2) / var)


def compare_grids(grid_a, grid_b, scheme="ff"):
    """R-squared between two grids for one scheme, merging their masks."""
    mask = grid_a.mask | grid_b.mask
    return r_squared(grid_a.intensity[scheme], grid_b.intensity[scheme], mask=mask)


def gain_and_agreement_curve(config, beta_values=None, threads=1):
    """Gain and model-agreement sweep at the degenerate collinear point.

    For each interaction scale the rigorous and simplified 1D spectra
    (signal wavelength at normal emission) are compared by R-squared;
    the gain term is reported as Re sqrt(|beta+|^2 - (delta/2)^2) at
    the degenerate collinear operating point, so the threshold sits
    exactly at |beta+| = |delta/2|.
    """
    if beta_values is None:
        beta_values = np.geomspace(
            config.gain_beta_min, config.gain_beta_max, config.gain_beta_count
        )
    beta_values = np.asarray(beta_values, dtype=float)
    if np.any(beta_values <= 0):
        raise ValueError("beta values must be positive")

    stack = config.build_stack()
    e_fwd, e_bwd, kp_par = _pump_state(config, stack)
    lam_deg = 2.0 * config.pump_wavelength_nm
    n_deg = refractive_index(stack.film, lam_deg)
    ks_deg = 2.0 * np.pi * n_deg / lam_deg
    delta_deg = stack.thickness_nm * (kp_par - 2.0 * ks_deg)
    half_delta = abs(delta_deg) / 2.0

    lams = config.signal_wavelengths()
    thetas = np.zeros_like(lams)
    points = []
    for scale in beta_values:
        cfg = _with_beta(config, scale)
        rig, mask_r = _evaluate_pixels(cfg, stack, lams, thetas, "rigorous", ("ff",), threads)
        smp, mask_s = _evaluate_pixels(cfg, stack, lams, thetas, "simplified", ("ff",), threads)
        rr = r_squared(smp["ff"], rig["ff"], mask=mask_r | mask_s)
        beta_abs = abs(scale * e_fwd)
        gamma = gain_term(beta_abs, delta_deg)
        points.append(
            GainCurvePoint(
                beta_scale=float(scale),
                beta_plus_abs=float(beta_abs),
                beta_over_half_delta=float(beta_abs / half_delta),
                re_gamma_plus=float(np.real(gamma)),
                r_squared=rr,
            )
        )
    return points


def _with_beta(config, scale):
    return replace(
        config, beta_plus=complex(scale), chi2_pm_per_v=None, pump_field_v_per_m=None
    )


def detection_spectrum(config, scheme=None, envelope=None, efficiency_ratio=None, threads=1):
    """1D detected-rate spectrum at normal emission with envelope weighting.

    The simplified model is evaluated at theta = 0; each pixel is
    weighted by the envelope at the signal wavelength and at the
    energy-conserving idler wavelength.  The forward scheme fixes the
    normalization maximum; the backward scheme is multiplied by the
    scheme efficiency ratio and the split scheme by its square root.
    Returns (wavelengths_nm, rates, mask).
    """
    scheme = scheme or config.detection_scheme
    if efficiency_ratio is None:
        efficiency_ratio = config.efficiency_ratio
    needed = {"forward": ("ff",), "backward": ("bb",), "forward_backward": ("fb", "bf")}
    if scheme not in needed:
        raise ValueError(f"scheme must be one of {sorted(needed)}")

    stack = config.build_stack()
    lams = config.signal_wavelengths()
    thetas = np.zeros_like(lams)
    schemes = tuple(sorted(set(needed[scheme] + ("ff",))))
    values, mask = _evaluate_pixels(config, stack, lams, thetas, "simplified", schemes, threads)

    lam_p = config.pump_wavelength_nm
    with np.errstate(all="ignore"):
        lam_i = np.where(lams > lam_p, lam_p * lams / (lams - lam_p), np.nan)
    if envelope is None:
        weight = np.ones_like(lams)
    else:
        weight = envelope(lams) * envelope(lam_i)
    weight = np.where(np.isfinite(weight), weight, 0.0)

    forward = values["ff"] * weight
    peak = np.max(forward[~mask]) if np.any(~mask) else 0.0
    if peak <= 0:
        raise ZeroVarianceError("forward spectrum is empty; cannot normalize")

    base = np.zeros_like(forward)
    for s in needed[scheme]:
        base = base + values[s] * weight
    rate = base / peak
    if scheme == "backward":
        rate = rate * efficiency_ratio
    elif scheme == "forward_backward":
        rate = rate * float(np.sqrt(efficiency_ratio))
    rate = np.where(mask, 0.0, rate)
    return lams, rate, mask


def transmission_curve(config, theta_rad=0.0):
    """Linear Airy transmission over the configured wavelength axis."""
    stack = config.build_stack()
    lams = config.signal_wavelengths()
    t1, r1, t2, r2 = coefficient_arrays(stack, lams, theta_rad, config.polarization)
    n_f = refractive_index(stack.film, lams)
    phi = stack.thickness_nm * 2.0 * np.pi * n_f / lams * np.cos(theta_rad)
    den = round_trip_denominator(r1, r2, phi)
    mask = np.abs(den) < _POLE_FLOOR
    with np.errstate(all="ignore"):
        amp = t1 * t2 * np.exp(1j * phi) / den
        trans = np.abs(amp) ** 2
    trans = np.where(mask | ~np.isfinite(trans), 0.0, trans)
    return lams, trans, mask
