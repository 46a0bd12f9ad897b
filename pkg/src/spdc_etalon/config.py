"""Run configuration: INI-style parsing, validation, serialization.

The config format is key-value pairs in named sections.  Unknown
sections or keys are hard errors; every diagnostic carries the
offending key path.  Parsing is seed-free and fully deterministic,
and `parse_config(serialize_config(cfg))` round-trips exactly.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .materials import MaterialModel, get_material, material_names
from .layerstack import LayerStack
from .simplified import SCHEMES, PumpProfile

__all__ = ["RunConfig", "parse_config", "serialize_config", "material_from_spec"]

MODELS = ("rigorous", "simplified", "nonresonant")
DETECTION_SCHEMES = ("forward", "backward", "forward_backward")

_SCHEMA = {
    "stack": {"superstrate", "film", "substrate", "thickness_um", "chi2_pm_per_v"},
    "pump": {"wavelength_nm", "waist_um", "beta_plus", "field_v_per_m"},
    "grid": {
        "lambda_min_nm",
        "lambda_max_nm",
        "lambda_count",
        "theta_min_rad",
        "theta_max_rad",
        "theta_count",
    },
    "model": {"kind", "schemes", "polarization"},
    "detection": {
        "envelope_center_nm",
        "envelope_fwhm_nm",
        "envelope_amplitude",
        "efficiency_ratio",
        "scheme",
    },
    "gain_curve": {"beta_min", "beta_max", "count"},
    "output": {"path"},
}
_REQUIRED = {
    "stack": {"superstrate", "film", "substrate", "thickness_um"},
    "pump": {"wavelength_nm", "waist_um"},
    "grid": _SCHEMA["grid"],
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved, validated run parameters (all deterministic)."""

    superstrate: str
    film: str
    substrate: str
    thickness_um: float
    pump_wavelength_nm: float
    pump_waist_um: float
    lambda_min_nm: float
    lambda_max_nm: float
    lambda_count: int
    theta_min_rad: float
    theta_max_rad: float
    theta_count: int
    chi2_pm_per_v: float | None = None
    beta_plus: complex | None = None
    pump_field_v_per_m: float | None = None
    model: str = "simplified"
    schemes: tuple = SCHEMES
    polarization: str = "s"
    envelope_center_nm: float | None = None
    envelope_fwhm_nm: float | None = None
    envelope_amplitude: float = 1.0
    efficiency_ratio: float = 1.0
    detection_scheme: str = "forward"
    gain_beta_min: float = 1e-2
    gain_beta_max: float = 4.0
    gain_beta_count: int = 21
    output_path: str | None = None

    def validate(self):
        if self.thickness_um <= 0:
            raise ConfigError("stack.thickness_um: must be positive")
        if self.pump_wavelength_nm <= 0:
            raise ConfigError("pump.wavelength_nm: must be positive")
        if self.pump_waist_um <= 0:
            raise ConfigError("pump.waist_um: must be positive")
        if self.lambda_count < 2 or self.theta_count < 2:
            raise ConfigError("grid: lambda_count and theta_count must be >= 2")
        if not self.lambda_min_nm < self.lambda_max_nm:
            raise ConfigError("grid: lambda_min_nm must be < lambda_max_nm")
        if not self.theta_min_rad < self.theta_max_rad:
            raise ConfigError("grid: theta_min_rad must be < theta_max_rad")
        if self.model not in MODELS:
            raise ConfigError(f"model.kind: must be one of {MODELS}")
        if self.polarization not in ("s", "p"):
            raise ConfigError("model.polarization: must be 's' or 'p'")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"model.schemes: entries must be among {SCHEMES}")
        if self.detection_scheme not in DETECTION_SCHEMES:
            raise ConfigError(f"detection.scheme: must be one of {DETECTION_SCHEMES}")
        has_beta = self.beta_plus is not None
        has_field = self.pump_field_v_per_m is not None and self.chi2_pm_per_v is not None
        if self.pump_field_v_per_m is not None and self.chi2_pm_per_v is None:
            raise ConfigError(
                "pump.field_v_per_m requires stack.chi2_pm_per_v to be set"
            )
        if has_beta == has_field:
            raise ConfigError(
                "pump: exactly one of beta_plus or (chi2_pm_per_v, field_v_per_m) "
                "must be provided"
            )
        if self.efficiency_ratio <= 0:
            raise ConfigError("detection.efficiency_ratio: must be positive")
        if self.envelope_fwhm_nm is not None and self.envelope_fwhm_nm <= 0:
            raise ConfigError("detection.envelope_fwhm_nm: must be positive")
        if self.envelope_amplitude <= 0:
            raise ConfigError("detection.envelope_amplitude: must be positive")
        if self.gain_beta_min <= 0 or self.gain_beta_max <= self.gain_beta_min:
            raise ConfigError("gain_curve: need 0 < beta_min < beta_max")
        if self.gain_beta_count < 2:
            raise ConfigError("gain_curve.count: must be >= 2")
        # Materials must resolve.
        for key, spec in (
            ("stack.superstrate", self.superstrate),
            ("stack.film", self.film),
            ("stack.substrate", self.substrate),
        ):
            try:
                material_from_spec(spec)
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        return self

    # -- derived objects -------------------------------------------------
    def build_stack(self):
        return LayerStack(
            superstrate=material_from_spec(self.superstrate),
            film=material_from_spec(self.film),
            substrate=material_from_spec(self.substrate),
            thickness_nm=self.thickness_um * 1e3,
            chi2_pm_per_v=self.chi2_pm_per_v or 0.0,
        )

    def pump_profile(self):
        return PumpProfile(
            wavelength_nm=self.pump_wavelength_nm,
            waist_diameter_um=self.pump_waist_um,
            beta_scale=self.beta_plus if self.beta_plus is not None else 0.0,
        )

    def signal_wavelengths(self):
        return np.linspace(self.lambda_min_nm, self.lambda_max_nm, self.lambda_count)

    def internal_angles(self):
        return np.linspace(self.theta_min_rad, self.theta_max_rad, self.theta_count)


def material_from_spec(spec):
    """Resolve a material spec string to a MaterialModel.

    Accepts a preset name, ``constant:<n>``,
    ``sellmeier:<offset>:<b1,...>:<c1,...>[:<min_nm>,<max_nm>]``, or
    ``tabulated:<csv path>`` (two comma-separated columns:
    wavelength_nm, index; '#' comments allowed).
    """
    spec = spec.strip()
    if ":" not in spec:
        if spec in material_names():
            return get_material(spec)
        raise ConfigError(
            f"unknown material {spec!r}; presets: {material_names()}, or use "
            "constant:/sellmeier:/tabulated: forms"
        )
    kind, _, rest = spec.partition(":")
    if kind == "constant":
        try:
            return MaterialModel.constant(float(rest), name=spec)
        except ValueError as exc:
            raise ConfigError(f"bad constant material {spec!r}: {exc}") from None
    if kind == "sellmeier":
        parts = rest.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(
                f"bad sellmeier material {spec!r}: expected "
                "offset:b1,..:c1,..[:min_nm,max_nm]"
            )
        try:
            offset = float(parts[0])
            b = tuple(float(x) for x in parts[1].split(",") if x)
            c = tuple(float(x) for x in parts[2].split(",") if x)
            rng = None
            if len(parts) == 4:
                lo, hi = (float(x) for x in parts[3].split(","))
                rng = (lo, hi)
            return MaterialModel.sellmeier(b, c, offset=offset, valid_range_nm=rng, name=spec)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"bad sellmeier material {spec!r}: {exc}") from None
    if kind == "tabulated":
        try:
            rows = np.loadtxt(rest, delimiter=",", comments="#", ndmin=2)
            return MaterialModel.tabulated(rows[:, 0], rows[:, 1], name=spec)
        except OSError as exc:
            raise ConfigError(f"cannot read material table {rest!r}: {exc}") from None
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad material table {rest!r}: {exc}") from None
    raise ConfigError(f"unknown material form {kind!r} in {spec!r}")


def _parse_number(section, key, raw, conv, what):
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected {what}, got {raw!r}") from None


def parse_config(text):
    """Parse and validate an INI-style config into a RunConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    for section, keys in _REQUIRED.items():
        if section not in parser:
            raise ConfigError(f"missing required section [{section}]")
        for key in keys:
            if key not in parser[section]:
                raise ConfigError(f"missing required key {section}.{key}")

    def get(section, key, default=None):
        if section in parser and key in parser[section]:
            return parser[section][key].strip()
        return default

    def fnum(section, key, default=None):
        raw = get(section, key)
        if raw is None:
            return default
        return _parse_number(section, key, raw, float, "a number")

    def inum(section, key, default=None):
        raw = get(section, key)
        if raw is None:
            return default
        return _parse_number(section, key, raw, int, "an integer")

    beta_raw = get("pump", "beta_plus")
    beta_plus = None
    if beta_raw is not None:
        beta_plus = _parse_number("pump", "beta_plus", beta_raw, complex, "a number")

    schemes_raw = get("model", "schemes")
    schemes = SCHEMES
    if schemes_raw is not None:
        schemes = tuple(s.strip() for s in schemes_raw.split(",") if s.strip())

    cfg = RunConfig(
        superstrate=get("stack", "superstrate"),
        film=get("stack", "film"),
        substrate=get("stack", "substrate"),
        thickness_um=fnum("stack", "thickness_um"),
        chi2_pm_per_v=fnum("stack", "chi2_pm_per_v"),
        pump_wavelength_nm=fnum("pump", "wavelength_nm"),
        pump_waist_um=fnum("pump", "waist_um"),
        beta_plus=beta_plus,
        pump_field_v_per_m=fnum("pump", "field_v_per_m"),
        lambda_min_nm=fnum("grid", "lambda_min_nm"),
        lambda_max_nm=fnum("grid", "lambda_max_nm"),
        lambda_count=inum("grid", "lambda_count"),
        theta_min_rad=fnum("grid", "theta_min_rad"),
        theta_max_rad=fnum("grid", "theta_max_rad"),
        theta_count=inum("grid", "theta_count"),
        model=get("model", "kind", "simplified"),
        schemes=schemes,
        polarization=get("model", "polarization", "s"),
        envelope_center_nm=fnum("detection", "envelope_center_nm"),
        envelope_fwhm_nm=fnum("detection", "envelope_fwhm_nm"),
        envelope_amplitude=fnum("detection", "envelope_amplitude", 1.0),
        efficiency_ratio=fnum("detection", "efficiency_ratio", 1.0),
        detection_scheme=get("detection", "scheme", "forward"),
        gain_beta_min=fnum("gain_curve", "beta_min", 1e-2),
        gain_beta_max=fnum("gain_curve", "beta_max", 4.0),
        gain_beta_count=inum("gain_curve", "count", 21),
        output_path=get("output", "path"),
    )
    return cfg.validate()


def _fmt(value):
    if isinstance(value, complex):
        if value.imag == 0:
            return repr(value.real)
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config):
    """Canonical INI text for a RunConfig; parse_config round-trips it."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["stack"] = {
        "superstrate": config.superstrate,
        "film": config.film,
        "substrate": config.substrate,
        "thickness_um": _fmt(config.thickness_um),
    }
    if config.chi2_pm_per_v is not None:
        parser["stack"]["chi2_pm_per_v"] = _fmt(config.chi2_pm_per_v)
    parser["pump"] = {
        "wavelength_nm": _fmt(config.pump_wavelength_nm),
        "waist_um": _fmt(config.pump_waist_um),
    }
    if config.beta_plus is not None:
        parser["pump"]["beta_plus"] = _fmt(config.beta_plus)
    if config.pump_field_v_per_m is not None:
        parser["pump"]["field_v_per_m"] = _fmt(config.pump_field_v_per_m)
    parser["grid"] = {
        "lambda_min_nm": _fmt(config.lambda_min_nm),
        "lambda_max_nm": _fmt(config.lambda_max_nm),
        "lambda_count": str(config.lambda_count),
        "theta_min_rad": _fmt(config.theta_min_rad),
        "theta_max_rad": _fmt(config.theta_max_rad),
        "theta_count": str(config.theta_count),
    }
    parser["model"] = {
        "kind": config.model,
        "schemes": ",".join(config.schemes),
        "polarization": config.polarization,
    }
    detection = {}
    if config.envelope_center_nm is not None:
        detection["envelope_center_nm"] = _fmt(config.envelope_center_nm)
    if config.envelope_fwhm_nm is not None:
        detection["envelope_fwhm_nm"] = _fmt(config.envelope_fwhm_nm)
    detection["envelope_amplitude"] = _fmt(config.envelope_amplitude)
    detection["efficiency_ratio"] = _fmt(config.efficiency_ratio)
    detection["scheme"] = config.detection_scheme
    parser["detection"] = detection
    parser["gain_curve"] = {
        "beta_min": _fmt(config.gain_beta_min),
        "beta_max": _fmt(config.gain_beta_max),
        "count": str(config.gain_beta_count),
    }
    if config.output_path is not None:
        parser["output"] = {"path": config.output_path}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
