"""Low-gain multiplicative model: bare-film pair spectrum times an
etalon filter function.

In the low-gain regime the emission probability factorizes into the
non-resonant phase-matching/pump-profile probability P and a filter
function S that depends only on the interface coefficients and the
collection scheme.  S interferes the forward- and backward-pump
generation channels; the pump-branch amplitudes enter conjugated,
which is required for S to reproduce the low-gain limit of the
scattering-matrix model when the pump enhancement is complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PumpProfile",
    "SCHEMES",
    "sinc",
    "nonresonant_probability",
    "low_gain_interaction_matrix",
    "filter_function",
    "simplified_probability",
]

SCHEMES = ("ff", "bb", "fb", "bf")


@dataclass(frozen=True)
class PumpProfile:
    """Pump beam description for the multiplicative model.

    `beta_scale` is the bare dimensionless interaction strength of the
    forward channel before etalon enhancement of the pump; the waist
    is the 1/e^2 intensity diameter.
    """

    wavelength_nm: float
    waist_diameter_um: float
    beta_scale: complex = 0.0

    def __post_init__(self):
        if self.wavelength_nm <= 0:
            raise ValueError("pump wavelength must be positive")
        if self.waist_diameter_um <= 0:
            raise ValueError("pump waist diameter must be positive")


def sinc(x):
    """sin(x)/x with sinc(0) = 1 (unnormalized convention)."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def nonresonant_probability(delta_k_par, delta_k_perp, thickness_nm, waist_um):
    """Pair probability of the bare film, |F_pm * F_p|^2.

    F_pm = sinc(dk_par L / 2) e^{i dk_par L / 2} and
    F_p = exp(-(dk_perp w / 2)^2) with w the 1/e^2 pump waist diameter,
    so the probability is sinc^2(dk_par L / 2) exp(-(dk_perp w)^2 / 2).
    Wavevectors in rad/nm, thickness in nm, waist in um.
    """
    if thickness_nm <= 0 or waist_um <= 0:
        raise ValueError("thickness and waist must be positive")
    half = np.asarray(delta_k_par, dtype=float) * thickness_nm / 2.0
    waist_nm = waist_um * 1e3
    gauss = np.exp(-(np.asarray(delta_k_perp, dtype=float) * waist_nm) ** 2 / 2.0)
    return sinc(half) ** 2 * gauss


def low_gain_interaction_matrix(params):
    """First-order interaction matrix: identity plus sinc-weighted coupling.

    Valid diagnostic for |beta|^2 << 1; off-diagonals are -/+ beta
    sinc(delta/2) on each pump branch.
    """
    s = sinc(np.asarray(params.delta, dtype=float) / 2.0)
    bp = np.asarray(params.beta_plus, dtype=complex)
    bm = np.asarray(params.beta_minus, dtype=complex)
    shape = np.broadcast_shapes(np.shape(s), np.shape(bp), np.shape(bm))
    w = np.zeros(shape + (4, 4), dtype=complex)
    for i in range(4):
        w[..., i, i] = 1.0
    w[..., 0, 1] = -bp * s
    w[..., 1, 0] = bp * s
    w[..., 2, 3] = -bm * s
    w[..., 3, 2] = bm * s
    return w


def filter_function(scheme, beta_plus, beta_minus, signal_enh, idler_enh):
    """Etalon filter S for one collection scheme.

    `signal_enh` and `idler_enh` are FieldEnhancements evaluated on the
    signal and idler mode respectively.  The forward/backward pump
    amplitudes enter conjugated so that S matches the low-gain limit
    of the rigorous model (for real pump enhancement the conjugation
    is a no-op).
    """
    if scheme == "ff":
        plus = signal_enh.a1p * idler_enh.a2p
        minus = signal_enh.a1m * idler_enh.a2m
    elif scheme == "bb":
        plus = signal_enh.a3p * idler_enh.a4p
        minus = signal_enh.a3m * idler_enh.a4m
    elif scheme == "fb":
        plus = signal_enh.a1p * idler_enh.a4p
        minus = signal_enh.a1m * idler_enh.a4m
    elif scheme == "bf":
        plus = signal_enh.a3p * idler_enh.a2p
        minus = signal_enh.a3m * idler_enh.a2m
    else:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    amp = np.conj(beta_plus) * plus + np.conj(beta_minus) * minus
    return np.abs(amp) ** 2


def simplified_probability(p, s):
    """Resonant emission probability as the product P x S."""
    return p * s
