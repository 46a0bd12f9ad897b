"""Command-line interface: config-driven runs with CSV output.

Commands: spectrum, compare, gain-curve, transmission, detection.
Every output file starts with '#'-prefixed header lines carrying the
artifact version and the full resolved configuration, and contains no
timestamps, so identical configs produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import DETECTION_SCHEMES, MODELS, parse_config, serialize_config
from .errors import ConfigError, SpdcEtalonError
from .simplified import SCHEMES
from .spectra import (
    EnvelopeModel,
    compare_grids,
    detection_spectrum,
    frequency_angular_spectrum,
    gain_and_agreement_curve,
    transmission_curve,
)

__all__ = ["run", "main"]

COMMANDS = ("spectrum", "compare", "gain-curve", "transmission", "detection")
_FMT = "{:.9g}"


def _header_lines(config, command):
    lines = [f"# spdc-etalon {__version__}", f"# command: {command}"]
    for raw in serialize_config(config).strip().splitlines():
        lines.append(f"# {raw}" if raw else "#")
    return lines


def _write_csv(path, config, command, columns, rows):
    """Write one CSV atomically; remove partial output on failure."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".part")
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            for line in _header_lines(config, command):
                fh.write(line + "\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_format_cell(v) for v in row) + "\n")
        tmp.replace(path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _format_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FMT.format(float(value))


def _grid_rows(grid):
    degrees = np.degrees(grid.internal_angles_rad)
    schemes = list(grid.intensity)
    for i, lam in enumerate(grid.signal_wavelengths_nm):
        for j, theta in enumerate(degrees):
            row = [lam, theta]
            row.extend(grid.intensity[s][i, j] for s in schemes)
            row.append(int(grid.mask[i, j]))
            yield row


def _grid_columns(grid):
    return ["lambda_nm", "theta_deg", *grid.intensity.keys(), "masked"]


def _out_path(config, args, default_name):
    if args.out:
        return Path(args.out)
    if config.output_path:
        return Path(config.output_path)
    return Path(default_name)


def _envelope_from(config):
    if config.envelope_center_nm is None or config.envelope_fwhm_nm is None:
        return None
    return EnvelopeModel(
        center_nm=config.envelope_center_nm,
        fwhm_nm=config.envelope_fwhm_nm,
        amplitude=config.envelope_amplitude,
    )


def run(command, config, out_path, threads=1, model=None, scheme=None):
    """Execute one CLI command against a validated RunConfig."""
    if command == "spectrum":
        grid = frequency_angular_spectrum(config, model=model, threads=threads).normalized()
        _write_csv(out_path, config, command, _grid_columns(grid), _grid_rows(grid))
        return [out_path]

    if command == "compare":
        simplified = frequency_angular_spectrum(config, "simplified", threads=threads)
        rigorous = frequency_angular_spectrum(config, "rigorous", threads=threads)
        stem = Path(out_path)
        paths = {
            "simplified": stem.with_name(stem.stem + "_simplified.csv"),
            "rigorous": stem.with_name(stem.stem + "_rigorous.csv"),
            "summary": stem.with_name(stem.stem + "_summary.csv"),
        }
        for name, grid in (("simplified", simplified), ("rigorous", rigorous)):
            shown = grid.normalized()
            _write_csv(paths[name], config, command, _grid_columns(shown), _grid_rows(shown))
        summary_rows = []
        for s in config.schemes:
            rr = compare_grids(simplified, rigorous, scheme=s)
            summary_rows.append([s, rr])
            print(f"r_squared[{s}] = {rr:.12g}")
        _write_csv(
            paths["summary"],
            config,
            command,
            ["scheme", "r_squared"],
            [[s, _FMT.format(v)] for s, v in summary_rows],
        )
        return list(paths.values())

    if command == "gain-curve":
        points = gain_and_agreement_curve(config, threads=threads)
        rows = [
            [p.beta_scale, p.beta_plus_abs, p.beta_over_half_delta, p.re_gamma_plus, p.r_squared]
            for p in points
        ]
        _write_csv(
            out_path,
            config,
            command,
            ["beta_scale", "beta_plus_abs", "beta_over_half_delta", "re_gamma_plus", "r_squared"],
            rows,
        )
        return [out_path]

    if command == "transmission":
        lams, trans, mask = transmission_curve(config)
        rows = [[lam, t, int(m)] for lam, t, m in zip(lams, trans, mask)]
        _write_csv(out_path, config, command, ["lambda_nm", "transmission", "masked"], rows)
        return [out_path]

    if command == "detection":
        lams, rate, mask = detection_spectrum(
            config,
            scheme=scheme,
            envelope=_envelope_from(config),
            threads=threads,
        )
        rows = [[lam, r, int(m)] for lam, r, m in zip(lams, rate, mask)]
        _write_csv(out_path, config, command, ["lambda_nm", "relative_rate", "masked"], rows)
        return [out_path]

    raise ConfigError(f"unknown command {command!r}; choose from {COMMANDS}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spdc-etalon",
        description=(
            "Photon-pair emission spectra of a nonlinear slab between "
            "reflective interfaces: rigorous scattering-matrix model, "
            "low-gain multiplicative model, and their comparison."
        ),
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the INI config file")
    parser.add_argument("--model", choices=MODELS, help="override model.kind")
    parser.add_argument(
        "--scheme",
        help="emission scheme override (spectrum/compare: ff,bb,fb,bf; "
        "detection: forward/backward/forward_backward)",
    )
    parser.add_argument("--out", help="output path (or prefix for compare)")
    parser.add_argument(
        "--threads", type=int, default=1, help="worker count; results are identical for any value"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        config = parse_config(text)
        detection_scheme = None
        if args.scheme:
            if args.command == "detection":
                if args.scheme not in DETECTION_SCHEMES:
                    raise ConfigError(
                        f"--scheme: must be one of {DETECTION_SCHEMES} for detection"
                    )
                detection_scheme = args.scheme
            else:
                schemes = tuple(s.strip() for s in args.scheme.split(",") if s.strip())
                if any(s not in SCHEMES for s in schemes):
                    raise ConfigError(f"--scheme: entries must be among {SCHEMES}")
                config = replace(config, schemes=schemes)
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_path = _out_path(config, args, f"{args.command.replace('-', '_')}.csv")
    try:
        written = run(
            args.command,
            config,
            out_path,
            threads=args.threads,
            model=args.model,
            scheme=detection_scheme,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SpdcEtalonError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
