"""Command line entry point.

Subcommands map one-to-one onto the experiments; each writes CSV or JSON to
--out or prints it to stdout. Hard failures exit nonzero with a one-line
error JSON on stderr so scripted callers never have to parse prose.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .harness import (
    SWEEP_EXPERIMENTS,
    ExperimentConfig,
    config_from_file,
    config_from_json,
    emit,
    expressivity_records,
    landscape_grids,
    payload_text,
    run_experiment,
    verify_bounds_report,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D102 - argparse hook
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _parse_radii(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"radii must look like start:stop:count, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ValueError(f"radii must look like start:stop:count, got {text!r}") from exc
    if count < 1:
        raise ValueError("radii count must be >= 1")
    return [float(r) for r in np.linspace(start, stop, count)]


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValueError(f"{flag} must be a comma-separated integer list") from exc


def _add_sweep_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; excludes inline flags")
    sub.add_argument("--ansatz", help="comma-separated circuit family names")
    sub.add_argument("--layers", help="comma-separated layer counts")
    sub.add_argument("--qubits", type=int)
    sub.add_argument("--reps", type=int, help="repetitions per configuration")
    sub.add_argument("--radii", help="sweep radii as start:stop:count")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--paper-scale", action="store_true",
                     help="default to 5 qubits and layer counts 1,4,8,12,16")
    sub.add_argument("--out", help="output file; stdout when omitted")
    sub.add_argument("--format", choices=("csv", "json"))


def _sweep_config(args: argparse.Namespace, experiment: str) -> ExperimentConfig:
    inline: dict = {}
    if args.ansatz is not None:
        layers = _parse_int_list(args.layers, "--layers") if args.layers else [1, 4, 8]
        inline["ansatz"] = [
            {"family": f.strip(), "layers": layers}
            for f in args.ansatz.split(",")
            if f.strip()
        ]
    elif args.layers is not None:
        raise ValueError("--layers needs --ansatz to apply to")
    if args.qubits is not None:
        inline["qubits"] = args.qubits
    if args.reps is not None:
        inline["repetitions"] = args.reps
    if args.radii is not None:
        inline["radii"] = _parse_radii(args.radii)
    if args.seed is not None:
        inline["master_seed"] = args.seed
    if args.paper_scale:
        inline["paper_scale"] = True

    if args.config is not None:
        if inline:
            raise ValueError("--config excludes inline experiment flags")
        config = config_from_file(args.config)
        if config.experiment != experiment:
            raise ValueError(
                f"config describes experiment {config.experiment!r}, "
                f"but the subcommand expects {experiment!r}"
            )
    else:
        config = config_from_json({"experiment": experiment, **inline})

    if args.out is not None:
        config = dataclasses.replace(config, output=args.out)
    if args.format is not None:
        config = dataclasses.replace(config, format=args.format)
    return config


def _deliver(payload, config_format: str, out: str | None) -> None:
    if out is not None:
        path = emit(payload, config_format, out)
        print(f"wrote {path}")
    else:
        sys.stdout.write(payload_text(payload, config_format))


def _handle_sweep(args: argparse.Namespace, experiment: str) -> int:
    config = _sweep_config(args, experiment)
    if experiment == "expressivity":
        payload = expressivity_records(config)
    else:
        payload = run_experiment(config)
        failed = [r for r in payload if r.error is not None]
        if failed:
            print(
                json.dumps(
                    {
                        "error": "partial_failure",
                        "message": f"{len(failed)} of {len(payload)} runs failed; "
                        "see the JSON output for details",
                    }
                ),
                file=sys.stderr,
            )
    _deliver(payload, config.format, config.output)
    return 0


def _handle_verify(args: argparse.Namespace) -> int:
    dims = _parse_int_list(args.dims, "--dims")
    report = verify_bounds_report(dims=dims, trials=args.trials, master_seed=args.seed)
    _deliver(report, args.format or "csv", args.out)
    failed = [c.name for c in report if not c.passed]
    if failed:
        print(
            json.dumps(
                {
                    "error": "verification_failed",
                    "message": f"checks failed: {', '.join(sorted(set(failed)))}",
                }
            ),
            file=sys.stderr,
        )
        return 1
    return 0


def _handle_landscape(args: argparse.Namespace) -> int:
    grids = landscape_grids(args.resolution)
    _deliver(grids, args.format or "csv", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entloss", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    verify = subs.add_parser("verify-bounds", help="check the distance bounds numerically")
    verify.add_argument("--dims", default="2,4,8", help="comma-separated dimensions")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out")
    verify.add_argument("--format", choices=("csv", "json"))
    verify.set_defaults(handler=_handle_verify)

    landscape = subs.add_parser("landscape", help="two-parameter loss landscape grids")
    landscape.add_argument("--resolution", type=int, default=101)
    landscape.add_argument("--out")
    landscape.add_argument("--format", choices=("csv", "json"))
    landscape.set_defaults(handler=_handle_landscape)

    for command, experiment in (
        ("distance", "distance"),
        ("improvement", "improvement"),
        ("nme-sweep", "nme_sweep"),
        ("expressivity", "expressivity"),
    ):
        sub = subs.add_parser(command, help=f"run the {experiment} experiment")
        _add_sweep_flags(sub)
        sub.set_defaults(handler=_handle_sweep, experiment=experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.handler is _handle_sweep:
            return _handle_sweep(args, args.experiment)
        return args.handler(args)
    except Exception as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
