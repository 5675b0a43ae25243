"""Command-line front door: batch runs, demos, equilibrium queries, serving.

Exit codes: 0 ok, 1 parse error, 2 validation error, 3 runtime
(overflow/underflow) error, 4 port in use.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .engine import (
    BUILTIN_NAMES,
    Simulation,
    builtin_scenario_text,
    event_markers_json,
    export_csv,
    run,
)
from .equilibrium import ComponentEquilibrium
from .errors import (
    DroopVesselError,
    LevelRangeError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .hydraulics import SimulationState
from .model import Scenario
from .scenario_io import scenario_from_dict

EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_PORT = 4


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ScenarioParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except LevelRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except DroopVesselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="droopvessel",
        description="Simulate communicating vessels and their droop-controlled electrical twin.",
    )
    sub = parser.add_subparsers(required=True)

    p_run = sub.add_parser("run", help="run a scenario file and export CSV")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    _add_run_options(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_demo = sub.add_parser("demo", help="run a built-in demonstration")
    p_demo.add_argument("name", choices=BUILTIN_NAMES)
    _add_run_options(p_demo)
    p_demo.set_defaults(func=_cmd_demo)

    p_eq = sub.add_parser("equilibrium", help="predict per-component settling levels")
    p_eq.add_argument("scenario", help="scenario file path or built-in name")
    p_eq.add_argument("--at", type=float, default=None, metavar="T",
                      help="time whose topology/elevations to use (default: end of scenario)")
    p_eq.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                      help="override a scenario value by dotted path")
    p_eq.set_defaults(func=_cmd_equilibrium)

    p_serve = sub.add_parser("serve", help="start the live session server")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=None,
                         help="default: $DROOPVESSEL_PORT or 8000")
    p_serve.add_argument("--ui", nargs="?", const="frontend", default=None, metavar="DIR",
                         help="also serve the browser UI from DIR (default: ./frontend)")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, metavar="FILE.csv",
                   help="write CSV here (default: stdout); event markers go to FILE.events.json")
    p.add_argument("--domain", choices=("hydraulic", "electrical"), default="hydraulic")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scenario value by dotted path, e.g. events.0.value_cm=8")


# ---------------------------------------------------------------------------
# Scenario loading with overrides
# ---------------------------------------------------------------------------

def _load_with_overrides(text: str, overrides: list[str], name: str) -> Scenario:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario is not valid JSON: {exc}") from exc
    for spec in overrides:
        if "=" not in spec:
            raise ScenarioParseError(f"override '{spec}' must look like key=value")
        path, _, raw = spec.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_path(obj, path.split("."), value, spec)
    return scenario_from_dict(obj, name=name)


def _set_path(obj, keys: list[str], value, spec: str) -> None:
    node = obj
    for key in keys[:-1]:
        node = _descend(node, key, spec)
    last = keys[-1]
    if isinstance(node, list):
        node[_index(last, node, spec)] = value
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ScenarioParseError(f"override '{spec}': cannot set key on a scalar")


def _descend(node, key: str, spec: str):
    if isinstance(node, list):
        return node[_index(key, node, spec)]
    if isinstance(node, dict):
        if key not in node:
            raise ScenarioParseError(f"override '{spec}': no key '{key}'")
        return node[key]
    raise ScenarioParseError(f"override '{spec}': cannot descend into a scalar")


def _index(key: str, node: list, spec: str) -> int:
    try:
        i = int(key)
    except ValueError:
        raise ScenarioParseError(f"override '{spec}': list index '{key}' is not a number") from None
    if not 0 <= i < len(node):
        raise ScenarioParseError(f"override '{spec}': index {i} out of range")
    return i


def _load_cli_scenario(args) -> Scenario:
    path = Path(args.scenario)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    return _load_with_overrides(text, args.override, name=path.stem)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    return _run_and_report(_load_cli_scenario(args), args)


def _cmd_demo(args) -> int:
    scenario = _load_with_overrides(builtin_scenario_text(args.name), args.override, name=args.name)
    return _run_and_report(scenario, args)


def _run_and_report(scenario: Scenario, args) -> int:
    series = run(scenario)
    csv_text = export_csv(series, domain=args.domain)
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        out.with_suffix(out.suffix + ".events.json").write_text(event_markers_json(series))
        summary_stream = sys.stdout
        print(f"wrote {out} ({series.sample_count} samples)", file=summary_stream)
    else:
        sys.stdout.write(csv_text)
        summary_stream = sys.stderr

    sim = Simulation(scenario)
    sim.advance_steps(sim.total_steps)  # final topology for the summary
    state = sim.state()
    print(f"final equilibria of '{scenario.name or 'scenario'}':", file=summary_stream)
    for eq in sim.equilibria():
        _print_component(eq, state, summary_stream)
    return 0


def _cmd_equilibrium(args) -> int:
    if Path(args.scenario).exists():
        scenario = _load_cli_scenario(args)
    elif args.scenario in BUILTIN_NAMES:
        scenario = _load_with_overrides(
            builtin_scenario_text(args.scenario), args.override, args.scenario
        )
    else:
        raise ScenarioParseError(f"'{args.scenario}' is neither a file nor a built-in name")

    t = scenario.duration_s if args.at is None else args.at
    if t < 0:
        raise ScenarioParseError(f"--at must be >= 0, got {t:g}")
    sim = Simulation(scenario)
    target = min(sim.total_steps, math.floor(t / sim.dt + 1e-9))
    sim.advance_steps(target)
    state = sim.state()
    print(f"equilibria as of t = {sim.time_s:g} s ({len(sim.equilibria())} component(s)):")
    for eq in sim.equilibria():
        _print_component(eq, state, sys.stdout)
    return 0


def _print_component(eq: ComponentEquilibrium, state: SimulationState, stream) -> None:
    kind = "pinned by tank" if eq.has_tank else "tankless"
    print(f"  component [{' '.join(eq.node_ids)}] ({kind}): L* = {eq.level_cm:.9f} cm", file=stream)
    for vid in eq.node_ids:
        if vid not in eq.final_volumes_cm3:
            continue
        idx = state.vessel_ids.index(vid)
        dv_run = float(state.injected_cm3[idx]) - eq.exited_cm3[vid]
        print(
            f"    {vid}: dV = {dv_run:+.9f} cm3, exited = {eq.exited_cm3[vid]:+.9f} cm3, "
            f"tracking error = {eq.tracking_errors_cm3[vid]:+.9f} cm3",
            file=stream,
        )


def _cmd_serve(args) -> int:
    from .server import serve

    port = args.port
    if port is None:
        port = int(os.environ.get("DROOPVESSEL_PORT", "8000"))
    ui_dir = None
    if args.ui is not None:
        ui_dir = Path(args.ui)
        if not (ui_dir / "index.html").exists():
            raise ScenarioParseError(f"--ui: no index.html under {ui_dir}")
    try:
        serve(args.host, port, ui_dir)
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{port}: {exc}", file=sys.stderr)
        return EXIT_PORT
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
