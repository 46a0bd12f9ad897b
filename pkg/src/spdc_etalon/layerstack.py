"""Fresnel optics of a three-region stack: superstrate / film / substrate.

Sign and normalization conventions (pinned so that a lossless
symmetric slab reaches unit Airy transmission exactly on its
half-wave resonances, and so that the zero-gain scattering matrix of
a lossless stack is unitary):

* `fresnel` returns the textbook single-interface amplitude
  coefficients for a wave incident from `n_in`.
* `interface_coeffs` returns the coefficients the etalon formulas
  consume: r1, r2 are the reflections of the *internal* film wave at
  interface 1 (film -> superstrate) and interface 2 (film ->
  substrate), so a symmetric stack has r1 = r2.  t1, t2 are
  flux-normalized, 2 sqrt(n_a c_a n_b c_b) / (n_a c_a + n_b c_b) for
  s polarization, which makes them direction-independent and gives
  each lossless interface a unitary 2x2 scattering block.
* Total internal reflection is handled by analytic continuation: the
  transmitted-angle cosine becomes +i |cos|, so |r| = 1 beyond the
  critical angle and fields decay outward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResonancePoleError
from .materials import refractive_index

__all__ = [
    "LayerStack",
    "InterfaceCoeffs",
    "FieldEnhancements",
    "fresnel",
    "interface_coeffs",
    "propagation_phase",
    "pump_enhancement",
    "field_enhancements",
    "linear_transmission",
]

POLE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LayerStack:
    """Three-region geometry with a nonlinear film of thickness L.

    `chi2_pm_per_v` is only used when the parametric interaction is
    computed from an absolute pump field instead of a direct
    dimensionless scale.
    """

    superstrate: object
    film: object
    substrate: object
    thickness_nm: float
    chi2_pm_per_v: float = 0.0

    def __post_init__(self):
        if self.thickness_nm <= 0:
            raise ValueError("film thickness must be positive")


@dataclass(frozen=True)
class InterfaceCoeffs:
    """Interface amplitudes for one mode: t1, r1 (interface 1), t2, r2."""

    t1: complex
    r1: complex
    t2: complex
    r2: complex


@dataclass(frozen=True)
class FieldEnhancements:
    """Etalon enhancement factors of one down-converted mode.

    a1 (forward emission) and a3 (backward emission) carry the
    direct / once-reflected routing for the forward- and
    backward-driven generation channels.  When the factors are
    evaluated for an idler mode, read them through the a2/a4 aliases.
    """

    a1p: complex
    a1m: complex
    a3p: complex
    a3m: complex

    @property
    def a2p(self):
        return self.a1p

    @property
    def a2m(self):
        return self.a1m

    @property
    def a4p(self):
        return self.a3p

    @property
    def a4m(self):
        return self.a3m


def _complex_cos(sin_sq):
    """cos(theta) from sin^2(theta), continued to +i decay above TIR."""
    return np.sqrt((1.0 + 0j) - sin_sq)


def fresnel(n_in, n_out, incidence_angle, polarization="s"):
    """Single-interface amplitude coefficients (r, t) from the n_in side.

    Beyond the critical angle r is complex with |r| = 1; no error is
    raised.
    """
    if np.any(np.asarray(n_in) <= 0) or np.any(np.asarray(n_out) <= 0):
        raise ValueError("refractive indices must be positive")
    ci = np.cos(incidence_angle)
    si = np.sin(incidence_angle)
    st = n_in * si / n_out
    ct = _complex_cos(st ** 2)
    if polarization == "s":
        den = n_in * ci + n_out * ct
        r = (n_in * ci - n_out * ct) / den
        t = 2.0 * n_in * ci / den
    elif polarization == "p":
        den = n_out * ci + n_in * ct
        r = (n_out * ci - n_in * ct) / den
        t = 2.0 * n_in * ci / den
    else:
        raise ValueError("polarization must be 's' or 'p'")
    return r, t


def coefficient_arrays(stack, wavelength_nm, internal_angle_rad, polarization="s", indices=None):
    """Vector-friendly core of `interface_coeffs`.

    Accepts scalar or array wavelength/angle and returns
    flux-normalized (t1, r1, t2, r2) for the film mode.  `indices`
    may carry precomputed (n1, n2, n3) to skip the range-checked
    material lookups (sweep engines mask invalid pixels instead).
    """
    if indices is not None:
        n1, n2, n3 = indices
    else:
        n1 = refractive_index(stack.superstrate, wavelength_nm)
        n2 = refractive_index(stack.film, wavelength_nm)
        n3 = refractive_index(stack.substrate, wavelength_nm)
    c2 = np.cos(internal_angle_rad)
    s2 = np.sin(internal_angle_rad)
    c1 = _complex_cos((n2 * s2 / n1) ** 2)
    c3 = _complex_cos((n2 * s2 / n3) ** 2)
    if polarization == "s":
        den1 = n2 * c2 + n1 * c1
        den2 = n2 * c2 + n3 * c3
        r1 = (n2 * c2 - n1 * c1) / den1
        r2 = (n2 * c2 - n3 * c3) / den2
    elif polarization == "p":
        den1 = n1 * c2 + n2 * c1
        den2 = n3 * c2 + n2 * c3
        r1 = (n1 * c2 - n2 * c1) / den1
        r2 = (n3 * c2 - n2 * c3) / den2
    else:
        raise ValueError("polarization must be 's' or 'p'")
    t1 = 2.0 * np.sqrt((n1 * c1 + 0j) * (n2 * c2)) / den1
    t2 = 2.0 * np.sqrt((n3 * c3 + 0j) * (n2 * c2)) / den2
    return t1, r1, t2, r2


def interface_coeffs(stack, mode):
    """Flux-normalized interface coefficients for one film mode."""
    t1, r1, t2, r2 = coefficient_arrays(
        stack, mode.vacuum_wavelength_nm, mode.internal_angle_rad, mode.polarization
    )
    return InterfaceCoeffs(t1=complex(t1), r1=complex(r1), t2=complex(t2), r2=complex(r2))


def propagation_phase(stack, mode):
    """Single-pass propagation phase L * k_parallel of a film mode."""
    n = refractive_index(stack.film, mode.vacuum_wavelength_nm)
    k_par = 2.0 * np.pi * n / mode.vacuum_wavelength_nm * np.cos(mode.internal_angle_rad)
    return stack.thickness_nm * k_par


def round_trip_denominator(r1, r2, phase):
    """1 - r1 r2 e^{2 i phi}, without pole checking (sweeps mask instead)."""
    return 1.0 - r1 * r2 * np.exp(2j * np.asarray(phase, dtype=float))


def _checked_denominator(r1, r2, phase):
    den = round_trip_denominator(r1, r2, phase)
    if np.any(np.abs(den) < POLE_TOLERANCE):
        raise ResonancePoleError(
            "etalon round-trip denominator vanished (|1 - r1 r2 e^{2 i phi}| < "
            f"{POLE_TOLERANCE:g}); the linear cavity model diverges here"
        )
    return den


def pump_enhancement(coeffs, phase_p):
    """Forward and backward pump amplitudes inside the film, per unit E0.

    The backward amplitude is exactly the forward one after one
    reflection at interface 2 plus a single-pass phase.
    """
    den = _checked_denominator(coeffs.r1, coeffs.r2, phase_p)
    forward = coeffs.t1 / den
    backward = coeffs.r2 * np.exp(1j * phase_p) * forward
    return forward, backward


def enhancement_arrays(t1, r1, t2, r2, phase):
    """(a1+, a1-, a3+, a3-) without pole checking, for sweep engines."""
    den = round_trip_denominator(r1, r2, phase)
    ph = np.exp(1j * np.asarray(phase, dtype=float))
    return t2 / den, r1 * t2 * ph / den, r2 * t1 * ph / den, t1 / den


def field_enhancements(coeffs, phase_mode):
    """Etalon enhancement factors of one down-converted film mode."""
    _checked_denominator(coeffs.r1, coeffs.r2, phase_mode)
    a1p, a1m, a3p, a3m = enhancement_arrays(
        coeffs.t1, coeffs.r1, coeffs.t2, coeffs.r2, phase_mode
    )
    return FieldEnhancements(a1p=a1p, a1m=a1m, a3p=a3p, a3m=a3m)


def linear_transmission(stack, mode):
    """Airy power transmittance of the slab for one mode.

    Computed from the flux-normalized interface coefficients, which is
    identical to the raw-amplitude formula times the external flux
    ratio (n_out cos / n_in cos).  Serves as a linear-optics check of
    the Fresnel and phase machinery.
    """
    coeffs = interface_coeffs(stack, mode)
    phi = propagation_phase(stack, mode)
    den = _checked_denominator(coeffs.r1, coeffs.r2, phi)
    amp = coeffs.t1 * coeffs.t2 * np.exp(1j * phi) / den
    return float(np.abs(amp) ** 2)
