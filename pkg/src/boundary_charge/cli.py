"""Command-line front end.

Subcommands: ``scan``, ``quench``, ``floquet``, ``transport``,
``phase-diagram``, ``criterion``, ``selftest``.  Coupling flags accept a
single number, a comma list, or an inclusive ``start:stop:step`` range;
the flag carrying more than one value is the swept parameter (two for
phase diagrams).  A JSON config file can predefine any flag; explicitly
given flags win.

Exit codes: 0 success, 1 selftest failure or unexpected error, 2 usage
error, 3 invalid configuration, 4 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .experiments import (
    Protocol,
    run_criterion_scan,
    run_floquet_scan,
    run_phase_diagram,
    run_quench_energy,
    run_steady_scan,
    run_transport_scan,
)
from .fock import CapExceededError
from .models import ModelSpec
from .selftest import run_selftest

_COUPLINGS = ("t0", "mu0", "Delta", "U", "Jperp", "Jz", "h", "tl", "tr", "mul", "mur")

_MODEL_CHOICES = {
    "scan": ("free", "interacting", "xxz", "spinful"),
    "quench": ("free", "spinful", "transport"),
    "floquet": ("free", "spinful"),
    "phase-diagram": ("interacting", "xxz", "free"),
    "criterion": ("interacting", "xxz", "free"),
}

_DEFAULT_SWEEP = {"xxz": "h", "transport": "mur"}


def parse_values(text: str) -> list[float]:
    """One float, a comma list, or an inclusive start:stop:step range."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step == 0 or (stop - start) * step < 0:
            raise ValueError(f"empty range {text!r}")
        count = int(np.floor((stop - start) / step + 0.5)) + 1
        return [start + k * step for k in range(count)]
    if "," in text:
        return [float(p) for p in text.split(",") if p.strip()]
    return [float(text)]


def _add_common(sub, with_model=None, default_model=None):
    if with_model:
        sub.add_argument(
            "--model", choices=with_model, default=None, help="chain family"
        )
    sub.add_argument("--L", default=None, help="chain length, or comma list of lengths")
    sub.add_argument("--nu", type=float, default=None, help="initial filling factor")
    for name in _COUPLINGS:
        sub.add_argument(f"--{name}", default=None, help=f"coupling {name}")
    sub.add_argument("--sweep", default=None, help="name of the swept coupling")
    sub.add_argument("--samples", type=int, default=None, help="samples per grid point")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--engine", choices=("auto", "gaussian", "ed"), default=None)
    sub.add_argument("--threads", type=int, default=None, help="worker threads")
    sub.add_argument("--out", default=None, help="CSV output path ('-' = stdout)")
    sub.add_argument("--config", default=None, help="JSON config file (flags win)")
    sub.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundary-charge",
        description="Charge statistics of 1D chains with a symmetry-breaking boundary term",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    scan = subs.add_parser("scan", help="steady-state variance scan at t = 2L")
    _add_common(scan, _MODEL_CHOICES["scan"])

    quench = subs.add_parser("quench", help="delayed boundary switch-on with energy tracking")
    _add_common(quench, _MODEL_CHOICES["quench"])
    quench.add_argument("--times", type=int, default=None, help="time points per segment")
    quench.add_argument("--nur", type=float, default=None, help="right-half filling")

    floquet = subs.add_parser("floquet", help="stroboscopic driving scan")
    _add_common(floquet, _MODEL_CHOICES["floquet"])
    floquet.add_argument("--periods", type=int, default=None, help="driving periods (default L)")

    transport = subs.add_parser("transport", help="half-chain transport scan")
    _add_common(transport)
    transport.add_argument("--nur", type=float, default=None, help="right-half filling")

    phase = subs.add_parser("phase-diagram", help="two-coupling frozen/fluctuating grid")
    _add_common(phase, _MODEL_CHOICES["phase-diagram"])
    phase.add_argument("--threshold", type=float, default=None, help="frozen density cutoff")
    phase.add_argument("--growth-cutoff", type=float, default=None, dest="growth_cutoff")
    phase.add_argument("--json", default=None, dest="json_out", help="JSON grid output path")

    criterion = subs.add_parser("criterion", help="boundary matrix-element criterion scan")
    _add_common(criterion, _MODEL_CHOICES["criterion"])
    criterion.add_argument("--energy-tol", type=float, default=None, dest="energy_tol")
    criterion.add_argument("--pairs", type=int, default=None, help="pairs to average over")

    subs.add_parser("selftest", help="run the cross-engine consistency checks")
    return parser


def _merge_config(args: argparse.Namespace):
    if getattr(args, "config", None) is None:
        return
    with open(args.config) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in config.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, dest) is None:
            setattr(args, dest, value)


def _collect_couplings(args):
    scalars: dict[str, float] = {}
    sweeps: dict[str, list[float]] = {}
    for name in _COUPLINGS:
        raw = getattr(args, name, None)
        if raw is None:
            continue
        values = parse_values(raw)
        if len(values) > 1:
            sweeps[name] = values
        else:
            scalars[name] = values[0]
    return scalars, sweeps


def _pick_sweep(args, scalars, sweeps, how_many, default=None):
    if len(sweeps) > how_many:
        raise ValueError(f"at most {how_many} coupling(s) may carry a value grid")
    names = list(sweeps)
    if args.sweep is not None:
        wanted = args.sweep
        if wanted not in _COUPLINGS:
            raise ValueError(f"unknown swept coupling {wanted!r}")
        if wanted in scalars:
            sweeps = {wanted: [scalars.pop(wanted)], **sweeps}
        elif wanted not in sweeps:
            raise ValueError(f"--sweep names {wanted!r} but no value was given")
        names = [wanted] + [n for n in sweeps if n != wanted]
    elif len(names) < how_many and default is not None and default not in names:
        if default in scalars:
            sweeps[default] = [scalars.pop(default)]
            names.append(default)
    if len(names) < how_many:
        raise ValueError(
            "give a start:stop:step range (or --sweep) for the swept coupling(s)"
        )
    return names, sweeps, scalars


def _model_and_lists(args, command):
    model_name = getattr(args, "model", None)
    if command == "transport":
        model_name = "transport"
    if model_name is None:
        model_name = "free"
    L_values = [int(v) for v in parse_values(args.L)] if args.L is not None else [100]
    scalars, sweeps = _collect_couplings(args)
    need = 2 if command == "phase-diagram" else 1
    names, sweeps, scalars = _pick_sweep(
        args, scalars, sweeps, need, default=_DEFAULT_SWEEP.get(model_name, "mu0")
    )
    base = ModelSpec(
        variant=model_name,
        L=L_values[0],
        **scalars,
        **{name: sweeps[name][0] for name in names},
    )
    return base, L_values, names, sweeps


def _protocol_kwargs(args):
    out = {}
    if args.samples is not None:
        out["n_samples"] = args.samples
    if args.seed is not None:
        out["seed"] = args.seed
    if getattr(args, "engine", None) is not None:
        out["engine"] = args.engine
    if args.nu is not None:
        out["nu"] = args.nu
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("BOUNDARY_CHARGE_THREADS", "1"))
    out["threads"] = threads
    return out


def _dispatch(args) -> int:
    command = args.command
    if command == "selftest":
        return 0 if run_selftest() else 1
    _merge_config(args)

    if command == "quench":
        base, L_values, _, _ = _model_and_lists(args, command)
        kwargs = _protocol_kwargs(args)
        kwargs.setdefault("n_samples", 1)
        if args.times is not None:
            kwargs["n_times"] = args.times
        if getattr(args, "nur", None) is not None:
            kwargs["nu_r"] = args.nur
        protocol = Protocol(kind="quench_energy", model=base.with_params(L=L_values[0]), **kwargs)
        result = run_quench_energy(protocol)
        result.to_csv(args.out or "-")
        return 0

    base, L_values, sweep_names, sweeps = _model_and_lists(args, command)
    kwargs = _protocol_kwargs(args)
    if args.samples is None and command in ("scan", "phase-diagram"):
        engine = kwargs.get("engine", "auto")
        if engine == "ed" or (engine == "auto" and not base.is_quadratic):
            kwargs["n_samples"] = 50  # dense diagonalization dominates the budget

    if command == "scan":
        protocol = Protocol(
            kind="steady_scan",
            model=base,
            param=sweep_names[0],
            grid=sweeps[sweep_names[0]],
            L_list=tuple(L_values),
            **kwargs,
        )
        result = run_steady_scan(protocol)
    elif command == "floquet":
        if args.periods is not None:
            kwargs["n_periods"] = args.periods
        protocol = Protocol(
            kind="floquet_scan",
            model=base,
            param=sweep_names[0],
            grid=sweeps[sweep_names[0]],
            L_list=tuple(L_values),
            **kwargs,
        )
        result = run_floquet_scan(protocol)
    elif command == "transport":
        if getattr(args, "nur", None) is not None:
            kwargs["nu_r"] = args.nur
        protocol = Protocol(
            kind="transport_scan",
            model=base,
            param=sweep_names[0],
            grid=sweeps[sweep_names[0]],
            L_list=tuple(L_values),
            **kwargs,
        )
        result = run_transport_scan(protocol)
    elif command == "criterion":
        kwargs.pop("nu", None)
        kwargs.pop("engine", None)
        if args.energy_tol is not None:
            kwargs["energy_tol"] = args.energy_tol
        if args.pairs is not None:
            kwargs["max_pairs"] = args.pairs
        protocol = Protocol(
            kind="criterion_scan",
            model=base.with_params(L=L_values[0]),
            param=sweep_names[0],
            grid=sweeps[sweep_names[0]],
            **kwargs,
        )
        result = run_criterion_scan(protocol)
    elif command == "phase-diagram":
        if args.threshold is not None:
            kwargs["threshold"] = args.threshold
        if args.growth_cutoff is not None:
            kwargs["growth_cutoff"] = args.growth_cutoff
        protocol = Protocol(
            kind="phase_diagram_2d",
            model=base,
            param=sweep_names[0],
            grid=sweeps[sweep_names[0]],
            param2=sweep_names[1],
            grid2=sweeps[sweep_names[1]],
            L_list=tuple(L_values),
            **kwargs,
        )
        diagram = run_phase_diagram(protocol)
        diagram.scan.to_csv(args.out or "-")
        if args.json_out is not None:
            diagram.to_json(args.json_out)
        if args.verbose:
            print(f"# labels: {diagram.labels}", file=sys.stderr)
        return 0
    else:  # pragma: no cover
        raise ValueError(f"unknown command {command!r}")

    result.to_csv(args.out or "-")
    if args.verbose and args.out not in (None, "-"):
        print(f"# wrote {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
