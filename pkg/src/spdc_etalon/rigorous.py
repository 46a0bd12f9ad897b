"""Quantum scattering-matrix model of pair generation in the slab.

The four coupled operators (forward signal, forward idler-dagger,
backward signal, backward idler-dagger) are propagated through the
film by a block-diagonal interaction matrix and stitched to the
outside world by boundary transmission/reflection matrices.  Emission
probabilities come directly from the scattering-matrix entries; no
operator algebra is materialized.

All matrix routines accept leading batch dimensions: a FourMatrix is
any complex ndarray of shape (..., 4, 4), so a full spectral grid can
be evaluated in one vectorized call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NearSingularError
from .materials import refractive_index, wavevector_components

__all__ = [
    "InteractionParams",
    "PairProbabilities",
    "gain_term",
    "interaction_params",
    "interaction_matrix",
    "boundary_matrices",
    "scattering_matrix",
    "pair_probabilities",
]

SPEED_OF_LIGHT_M_S = 2.99792458e8
SINHC_SERIES_CUTOFF = 1e-4
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class InteractionParams:
    """Dimensionless interaction strengths and phase mismatch.

    `delta` is the film thickness times the longitudinal wavevector
    mismatch; the gain terms satisfy gamma^2 = beta^2 - delta^2/4 on
    each pump branch.
    """

    beta_plus: complex
    beta_minus: complex
    gamma_plus: complex
    gamma_minus: complex
    delta: float
    delta_k_par: float
    delta_k_perp: float


@dataclass(frozen=True)
class PairProbabilities:
    """Relative emission probabilities per collection scheme."""

    ff: float
    bb: float
    fb: float
    bf: float


def gain_term(beta, delta):
    """gamma = sqrt(beta^2 - delta^2/4), principal branch.

    The interaction matrix is even in gamma, so the branch choice is
    immaterial downstream.
    """
    beta = np.asarray(beta, dtype=complex)
    return np.sqrt(beta ** 2 - np.asarray(delta, dtype=float) ** 2 / 4.0)


def interaction_params(stack, pump_mode, signal_mode, idler_mode, pump_field_amplitudes):
    """Interaction strengths for one (pump, signal, idler) triple.

    `pump_field_amplitudes` is the (forward, backward) pump field
    inside the film in V/m; the caller has already enforced energy
    conservation between the three wavelengths.  The film index is
    used for all three waves.

    Raises GeometryError when the signal or idler parallel wavevector
    is not positive (mode at or past grazing).
    """
    n_p = refractive_index(stack.film, pump_mode.vacuum_wavelength_nm)
    n_s = refractive_index(stack.film, signal_mode.vacuum_wavelength_nm)
    n_i = refractive_index(stack.film, idler_mode.vacuum_wavelength_nm)
    kp_par, kp_perp = wavevector_components(pump_mode, n_p)
    ks_par, ks_perp = wavevector_components(signal_mode, n_s)
    ki_par, ki_perp = wavevector_components(idler_mode, n_i)
    if ks_par <= 0 or ki_par <= 0:
        raise GeometryError("signal/idler parallel wavevector must be positive")

    dk_par = kp_par - ks_par - ki_par
    dk_perp = kp_perp - ks_perp - ki_perp
    delta = stack.thickness_nm * dk_par

    # Interaction strength in SI: 2 pi w_s w_i chi2 L E0 / (c^2 sqrt(ks ki)).
    omega_s = 2.0 * np.pi * SPEED_OF_LIGHT_M_S / (signal_mode.vacuum_wavelength_nm * 1e-9)
    omega_i = 2.0 * np.pi * SPEED_OF_LIGHT_M_S / (idler_mode.vacuum_wavelength_nm * 1e-9)
    chi2_m_per_v = stack.chi2_pm_per_v * 1e-12
    length_m = stack.thickness_nm * 1e-9
    k_product = np.sqrt((ks_par * 1e9) * (ki_par * 1e9))
    prefactor = (
        2.0 * np.pi * omega_s * omega_i * chi2_m_per_v * length_m
        / (SPEED_OF_LIGHT_M_S ** 2 * k_product)
    )
    e_fwd, e_bwd = pump_field_amplitudes
    beta_plus = prefactor * e_fwd
    beta_minus = prefactor * e_bwd
    return InteractionParams(
        beta_plus=complex(beta_plus),
        beta_minus=complex(beta_minus),
        gamma_plus=complex(gain_term(beta_plus, delta)),
        gamma_minus=complex(gain_term(beta_minus, delta)),
        delta=float(delta),
        delta_k_par=float(dk_par),
        delta_k_perp=float(dk_perp),
    )


def _sinhc(gamma):
    """sinh(gamma)/gamma, by series below the cutoff to avoid 0/0."""
    gamma = np.asarray(gamma, dtype=complex)
    small = np.abs(gamma) < SINHC_SERIES_CUTOFF
    g_safe = np.where(small, 1.0, gamma)
    direct = np.sinh(g_safe) / g_safe
    g2 = gamma ** 2
    series = 1.0 + g2 / 6.0 * (1.0 + g2 / 20.0)
    return np.where(small, series, direct)


def _interaction_block(beta, delta):
    """One 2x2 block of the interaction matrix; exact identity at beta = 0."""
    beta = np.asarray(beta, dtype=complex)
    delta = np.asarray(delta, dtype=float)
    beta_b, delta_b = np.broadcast_arrays(beta, delta)
    gamma = gain_term(beta_b, delta_b)
    shc = _sinhc(gamma)
    ch = np.cosh(gamma)
    half = delta_b / 2.0
    w11 = np.exp(-1j * half) * (ch + 1j * half * shc)
    w22 = np.exp(1j * half) * (ch - 1j * half * shc)
    w12 = -1j * beta_b * shc
    w21 = 1j * beta_b * shc
    block = np.empty(beta_b.shape + (2, 2), dtype=complex)
    block[..., 0, 0] = w11
    block[..., 0, 1] = w12
    block[..., 1, 0] = w21
    block[..., 1, 1] = w22
    zero = beta_b == 0
    if block.ndim == 2:
        if zero:
            block = np.eye(2, dtype=complex)
    elif np.any(zero):
        block[zero] = np.eye(2, dtype=complex)
    return block


def interaction_matrix(params):
    """Block-diagonal 4x4 interaction matrix of the film.

    The upper block couples the forward signal/idler pair through the
    forward pump branch, the lower block the backward pair through the
    backward branch.  Each block has unit determinant, is even in the
    gain term, and collapses to the exact identity at zero gain.
    """
    upper = _interaction_block(params.beta_plus, params.delta)
    lower = _interaction_block(params.beta_minus, params.delta)
    shape = np.broadcast_shapes(upper.shape[:-2], lower.shape[:-2])
    w = np.zeros(shape + (4, 4), dtype=complex)
    w[..., 0:2, 0:2] = upper
    w[..., 2:4, 2:4] = lower
    return w


def boundary_matrices(signal_coeffs, idler_coeffs, phase_s, phase_i):
    """Transmission matrices (tau1, tau2) and reflection matrix rho.

    Idler entries are conjugated because the idler operators enter the
    mode array Hermitian-conjugated; the reflection matrix carries the
    single-pass propagation phases.
    """
    t1s, t2s = signal_coeffs.t1, signal_coeffs.t2
    t1i, t2i = np.conj(idler_coeffs.t1), np.conj(idler_coeffs.t2)
    r1s, r2s = signal_coeffs.r1, signal_coeffs.r2
    r1i, r2i = np.conj(idler_coeffs.r1), np.conj(idler_coeffs.r2)
    ph_s = np.exp(1j * np.asarray(phase_s, dtype=float))
    ph_i = np.exp(-1j * np.asarray(phase_i, dtype=float))

    shape = np.broadcast_shapes(
        *(np.shape(x) for x in (t1s, t1i, r1s, r1i, ph_s, ph_i))
    )
    tau1 = np.zeros(shape + (4, 4), dtype=complex)
    tau2 = np.zeros(shape + (4, 4), dtype=complex)
    rho = np.zeros(shape + (4, 4), dtype=complex)

    tau1[..., 0, 0] = t1s
    tau1[..., 1, 1] = t1i
    tau1[..., 2, 2] = t2s
    tau1[..., 3, 3] = t2i

    tau2[..., 0, 0] = t2s
    tau2[..., 1, 1] = t2i
    tau2[..., 2, 2] = t1s
    tau2[..., 3, 3] = t1i

    rho[..., 0, 2] = r1s * ph_s
    rho[..., 1, 3] = r1i * ph_i
    rho[..., 2, 0] = r2s * ph_s
    rho[..., 3, 1] = r2i * ph_i
    return tau1, tau2, rho


def _swap_conj_transpose(m):
    return np.conj(np.swapaxes(m, -1, -2))


def scattering_matrix(w, tau1, tau2, rho, check_condition=True):
    """Scattering matrix U = tau2 w (I - rho w)^-1 tau1 - rho^dagger.

    Uses a direct linear solve rather than an explicit inverse.  With
    `check_condition` a condition number above 1e12 in (I - rho w)
    raises NearSingularError (parametric-oscillation threshold);
    sweeps disable the check and mask bad pixels instead.
    """
    w = np.asarray(w, dtype=complex)
    system = np.eye(4, dtype=complex) - np.asarray(rho, dtype=complex) @ w
    if check_condition:
        cond = np.linalg.cond(system)
        if np.any(~np.isfinite(cond)) or np.any(cond > CONDITION_LIMIT):
            raise NearSingularError(
                "(I - rho w) is near-singular (condition number "
                f"> {CONDITION_LIMIT:g}); at or past the oscillation threshold"
            )
    solved = np.linalg.solve(system, np.asarray(tau1, dtype=complex))
    return np.asarray(tau2, dtype=complex) @ w @ solved - _swap_conj_transpose(rho)


def pair_probabilities(u):
    """Relative pair-emission probabilities for the four schemes.

    Vacuum moments of the output operators reduce to closed forms in
    the scattering-matrix entries; these are implemented verbatim.
    """
    u = np.asarray(u, dtype=complex)
    a = np.abs(u)

    def row(i):
        return a[..., i, 0], a[..., i, 1], a[..., i, 2], a[..., i, 3]

    a10, a11, a12, a13 = row(0)
    a30, a31, a32, a33 = row(2)

    ff = (
        a[..., 1, 0] ** 2 * (a10 ** 2 + a11 ** 2 + a13 ** 2)
        + a[..., 1, 2] ** 2 * (a12 ** 2 + a11 ** 2 + a13 ** 2)
        + 2.0 * np.real(u[..., 0, 0] * u[..., 1, 2] * np.conj(u[..., 1, 0]) * np.conj(u[..., 0, 2]))
    )
    bb = (
        a[..., 3, 0] ** 2 * (a30 ** 2 + a31 ** 2 + a33 ** 2)
        + a[..., 3, 2] ** 2 * (a32 ** 2 + a31 ** 2 + a33 ** 2)
        + 2.0 * np.real(u[..., 2, 0] * u[..., 3, 2] * np.conj(u[..., 3, 0]) * np.conj(u[..., 2, 2]))
    )
    fb = (
        a[..., 3, 0] ** 2 * (a10 ** 2 + a11 ** 2 + a13 ** 2)
        + a[..., 3, 2] ** 2 * (a11 ** 2 + a12 ** 2 + a13 ** 2)
        + 2.0 * np.real(u[..., 3, 0] * u[..., 0, 2] * np.conj(u[..., 0, 0]) * np.conj(u[..., 3, 2]))
    )
    bf = (
        a[..., 1, 0] ** 2 * (a30 ** 2 + a31 ** 2 + a33 ** 2)
        + a[..., 1, 2] ** 2 * (a32 ** 2 + a31 ** 2 + a33 ** 2)
        + 2.0 * np.real(u[..., 2, 0] * u[..., 1, 2] * np.conj(u[..., 1, 0]) * np.conj(u[..., 2, 2]))
    )
    if ff.ndim == 0:
        return PairProbabilities(ff=float(ff), bb=float(bb), fb=float(fb), bf=float(bf))
    return PairProbabilities(ff=ff, bb=bb, fb=fb, bf=bf)
