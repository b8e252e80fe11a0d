"""Command-line interface emitting every sweep dataset as CSV or JSON.

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures, each with a one-line diagnostic on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, NumericalError
from .states import DensityMatrix, load_density_matrix
from .sweeps import SWEEP_RUNNERS, SweepConfig, load_resource
from .teleport import AXIAL_KETS, teleport

_SUBCOMMAND_KINDS = {
    "fef-contour": "fef_contour",
    "sensitivity": "sensitivity",
    "fidelity-adc": "fidelity_adc",
    "fidelity-pdc": "fidelity_pdc",
    "enhance": "enhancement_search",
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="master seed for counts mode")
    parser.add_argument("--format", choices=["csv", "json"], dest="fmt",
                        help="output format (default csv)")
    parser.add_argument("--resource",
                        help="ideal | werner:<v> | file:<path> (default ideal)")
    parser.add_argument("--stats", help="exact | counts:<n>:<resamples>")
    parser.add_argument("--workers", type=int, help="worker processes (default 1)")
    parser.add_argument("--alice-mode", choices=["direct", "mixture", "both"],
                        dest="alice_mode",
                        help="sender-side damping realization (default direct)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleportsim",
        description="Noisy-teleportation datasets: damping sweeps, calibration "
                    "round trips, enhancement search, single teleport runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fef-contour", "sensitivity", "fidelity-adc", "fidelity-pdc",
                 "enhance"):
        p = sub.add_parser(name)
        _add_common_flags(p)
    calib = sub.add_parser("calib")
    _add_common_flags(calib)
    calib.add_argument("--side", choices=["alice", "bob"], default="bob")
    calib.add_argument("--family", choices=["adc", "pdc"],
                       help="receiver-side channel family (default adc)")
    tele = sub.add_parser("teleport")
    _add_common_flags(tele)
    tele.add_argument(
        "--input", default="plus",
        help="zero|one|plus|minus|plus_i|minus_i or file:<path> (default plus)",
    )
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return payload


def _build_sweep_config(args: argparse.Namespace, kind: str) -> SweepConfig:
    settings = _load_config_file(args.config)
    known = {"resource", "grid", "stats", "seed", "fmt", "out", "workers",
             "alice_mode", "family", "series"}
    unknown = set(settings) - known - {"kind"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for flag in ("resource", "stats", "seed", "fmt", "out", "workers",
                 "alice_mode"):
        value = getattr(args, flag, None)
        if value is not None:
            settings[flag] = value
    if getattr(args, "family", None) is not None:
        settings["family"] = args.family
    settings["kind"] = kind
    try:
        cfg = SweepConfig(**settings)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _input_state(spec: str) -> DensityMatrix:
    if spec.startswith("file:"):
        state = load_density_matrix(spec.split(":", 1)[1])
        if state.num_qubits != 1:
            raise ConfigError("teleport input file must hold a single-qubit state")
        return state
    if spec not in AXIAL_KETS:
        raise ConfigError(
            f"unknown input {spec!r}; expected one of {sorted(AXIAL_KETS)} "
            "or file:<path>"
        )
    ket = AXIAL_KETS[spec]
    return DensityMatrix(np.outer(ket, ket.conj()))


def _run_teleport(args: argparse.Namespace) -> None:
    resource_spec = args.resource if args.resource is not None else "ideal"
    resource = load_resource(resource_spec)
    input_state = _input_state(args.input)
    outcomes = teleport(input_state, resource)
    payload = {
        "input": args.input,
        "resource": resource_spec,
        "outcomes": [
            {
                "label": o.label,
                "probability": o.probability,
                "bob_corrected": {
                    "num_qubits": 1,
                    "re": o.bob_corrected.matrix.real.tolist(),
                    "im": o.bob_corrected.matrix.imag.tolist(),
                },
            }
            for o in outcomes
        ],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "teleport":
        _run_teleport(args)
        return
    if args.command == "calib":
        kind = "calib_bob" if args.side == "bob" else "calib_alice"
    else:
        kind = _SUBCOMMAND_KINDS[args.command]
    cfg = _build_sweep_config(args, kind)
    result = SWEEP_RUNNERS[kind](cfg)
    if kind == "enhancement_search":
        text = json.dumps(result, sort_keys=True) + "\n"
        if cfg.out is None or cfg.out == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
    else:
        result.write(cfg.out, cfg.fmt)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
