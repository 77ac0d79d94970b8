"""Command-line front end: parse configs, run scenarios/sweeps, emit files.

Config files are YAML with a single top-level ``scenario:`` or ``sweep:``
table.  The effective configuration (all defaults resolved) is echoed next
to the outputs for reproducibility and re-parses to an equal scenario.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import reporting
from .core import SystemParams
from .errors import ConfigError
from .field import DEFAULT_ANCHOR, DEFAULT_FLOOR, ENVELOPE_FAMILIES, PHASE_FAMILIES, PulseSpec
from .scenarios import (
    METRICS,
    Scenario,
    SweepSpec,
    VALID_OUTPUTS,
    builtin,
    builtin_names,
    run_scenario,
    run_sweep,
    with_override,
)

_PULSE_KEYS = {
    "envelope", "omega_peak", "center", "width", "phase", "chirp_rate",
    "phase_coeffs", "detuning", "floor", "anchor", "samples",
}
_SYSTEM_KEYS = {"omega1", "omega2", "carrier", "gamma_real", "gamma_imag"}
_SCENARIO_KEYS = {
    "name", "description", "builtin", "pulse", "system", "grid", "initial",
    "outputs", "rel_tol", "abs_tol", "refine", "adiabaticity_window",
}
_SWEEP_KEYS = {"scenario", "parameter", "values", "metrics", "workers"}
_INITIAL_NAMES = {"ground": (1.0 + 0.0j, 0.0j), "excited": (0.0j, 1.0 + 0.0j)}


def _reject_unknown(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}", where)


def _parse_pulse(tab: dict) -> PulseSpec:
    if not isinstance(tab, dict):
        raise ConfigError("must be a table", "pulse")
    _reject_unknown(tab, _PULSE_KEYS, "pulse")
    if "envelope" not in tab:
        raise ConfigError("missing required field", "pulse.envelope")
    if tab["envelope"] not in ENVELOPE_FAMILIES:
        raise ConfigError(f"must be one of {ENVELOPE_FAMILIES}", "pulse.envelope")
    if "omega_peak" not in tab:
        raise ConfigError("missing required field", "pulse.omega_peak")
    if tab.get("phase", "none") not in PHASE_FAMILIES:
        raise ConfigError(f"must be one of {PHASE_FAMILIES}", "pulse.phase")
    samples = tab.get("samples")
    if samples is not None:
        try:
            samples = (tuple(map(float, samples["times"])),
                       tuple(map(float, samples["values"])))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"needs times/values lists ({exc})", "pulse.samples")
    try:
        return PulseSpec(
            envelope=tab["envelope"],
            omega_peak=float(tab["omega_peak"]),
            center=float(tab.get("center", 0.0)),
            width=None if tab.get("width") is None else float(tab["width"]),
            phase=tab.get("phase", "none"),
            chirp_rate=float(tab.get("chirp_rate", 0.0)),
            phase_coeffs=tuple(float(c) for c in tab.get("phase_coeffs", ())),
            detuning=float(tab.get("detuning", 0.0)),
            floor=float(tab.get("floor", DEFAULT_FLOOR)),
            anchor=float(tab.get("anchor", DEFAULT_ANCHOR)),
            samples=samples,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "pulse") from exc


def _parse_system(tab: dict, detuning: float) -> SystemParams:
    if not isinstance(tab, dict):
        raise ConfigError("must be a table", "system")
    _reject_unknown(tab, _SYSTEM_KEYS, "system")
    omega1 = float(tab.get("omega1", 0.0))
    if ("omega2" in tab) == ("carrier" in tab):
        raise ConfigError("provide exactly one of omega2 or carrier", "system")
    if "omega2" in tab:
        omega2 = float(tab["omega2"])
    else:
        omega2 = omega1 + detuning + float(tab["carrier"])
    try:
        return SystemParams(
            omega1=omega1,
            omega2=omega2,
            gamma_real=float(tab.get("gamma_real", 0.0)),
            gamma_imag=float(tab.get("gamma_imag", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "system") from exc


def _parse_initial(value) -> tuple[complex, complex]:
    if isinstance(value, str):
        try:
            return _INITIAL_NAMES[value]
        except KeyError:
            raise ConfigError(f"must be {sorted(_INITIAL_NAMES)} or a table", "initial")
    if isinstance(value, dict):
        _reject_unknown(value, {"a1", "a2"}, "initial")
        try:
            a1 = value.get("a1", [0.0, 0.0])
            a2 = value.get("a2", [0.0, 0.0])
            return complex(float(a1[0]), float(a1[1])), complex(float(a2[0]), float(a2[1]))
        except (TypeError, IndexError) as exc:
            raise ConfigError(f"amplitudes are [re, im] pairs ({exc})", "initial")
    raise ConfigError("must be a name or a table of [re, im] pairs", "initial")


def _parse_scenario(tab: dict) -> Scenario:
    if not isinstance(tab, dict):
        raise ConfigError("must be a table", "scenario")
    _reject_unknown(tab, _SCENARIO_KEYS, "scenario")
    if "builtin" in tab:
        extra = set(tab) - {"builtin", "name"}
        if extra:
            raise ConfigError(
                f"builtin scenarios take no inline overrides (got {sorted(extra)}); "
                "use --set", "scenario.builtin",
            )
        try:
            return builtin(tab["builtin"])
        except KeyError as exc:
            raise ConfigError(str(exc), "scenario.builtin") from exc
    for req in ("pulse", "system", "grid"):
        if req not in tab:
            raise ConfigError("missing required table", f"scenario.{req}")
    pulse = _parse_pulse(tab["pulse"])
    system = _parse_system(tab["system"], pulse.detuning)
    grid = tab["grid"]
    _reject_unknown(grid, {"start", "stop", "points"}, "grid")
    for req in ("start", "stop", "points"):
        if req not in grid:
            raise ConfigError("missing required field", f"grid.{req}")
    window = tab.get("adiabaticity_window")
    if window is not None:
        window = (float(window[0]), float(window[1]))
    outputs = tuple(tab.get("outputs", VALID_OUTPUTS))
    try:
        return Scenario(
            name=str(tab.get("name", "run")),
            pulse=pulse,
            system=system,
            grid_start=float(grid["start"]),
            grid_stop=float(grid["stop"]),
            grid_points=int(grid["points"]),
            initial=_parse_initial(tab.get("initial", "ground")),
            outputs=outputs,
            rel_tol=float(tab.get("rel_tol", 1e-10)),
            abs_tol=float(tab.get("abs_tol", 1e-12)),
            refine=int(tab.get("refine", 1)),
            adiabaticity_window=window,
            description=str(tab.get("description", "")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario") from exc


def parse_config(text: str) -> Scenario | SweepSpec:
    """Parse a YAML config into a validated Scenario or SweepSpec."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ConfigError("config must have exactly one top-level table: scenario or sweep")
    kind, tab = next(iter(doc.items()))
    if kind == "scenario":
        return _parse_scenario(tab)
    if kind == "sweep":
        _reject_unknown(tab, _SWEEP_KEYS, "sweep")
        for req in ("scenario", "parameter", "values"):
            if req not in tab:
                raise ConfigError("missing required field", f"sweep.{req}")
        base = _parse_scenario(tab["scenario"])
        try:
            return SweepSpec(
                base=base,
                parameter=str(tab["parameter"]),
                values=tuple(float(v) for v in tab["values"]),
                metrics=tuple(tab.get("metrics", ("margin", "max_pop_error"))),
                workers=int(tab.get("workers", 1)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), "sweep") from exc
    raise ConfigError(f"unknown top-level table {kind!r}; expected scenario or sweep")


def scenario_to_dict(s: Scenario) -> dict:
    """Fully-resolved scenario table; parses back to an equal scenario."""
    pulse: dict = {
        "envelope": s.pulse.envelope,
        "omega_peak": s.pulse.omega_peak,
        "center": s.pulse.center,
        "width": s.pulse.width,
        "phase": s.pulse.phase,
        "chirp_rate": s.pulse.chirp_rate,
        "phase_coeffs": list(s.pulse.phase_coeffs),
        "detuning": s.pulse.detuning,
        "floor": s.pulse.floor,
        "anchor": s.pulse.anchor,
    }
    if s.pulse.samples is not None:
        pulse["samples"] = {
            "times": list(s.pulse.samples[0]),
            "values": list(s.pulse.samples[1]),
        }
    out = {
        "name": s.name,
        "description": s.description,
        "pulse": pulse,
        "system": {
            "omega1": s.system.omega1,
            "omega2": s.system.omega2,
            "gamma_real": s.system.gamma_real,
            "gamma_imag": s.system.gamma_imag,
        },
        "grid": {"start": s.grid_start, "stop": s.grid_stop, "points": s.grid_points},
        "initial": {
            "a1": [s.initial[0].real, s.initial[0].imag],
            "a2": [s.initial[1].real, s.initial[1].imag],
        },
        "outputs": list(s.outputs),
        "rel_tol": s.rel_tol,
        "abs_tol": s.abs_tol,
        "refine": s.refine,
    }
    if s.adiabaticity_window is not None:
        out["adiabaticity_window"] = list(s.adiabaticity_window)
    return out


def _apply_sets(obj, sets: list[str]):
    for item in sets:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError("override must look like key=value", key)
        value = yaml.safe_load(raw)
        if isinstance(obj, SweepSpec):
            import dataclasses

            if key in ("parameter", "workers"):
                obj = dataclasses.replace(obj, **{key: value})
            elif key == "values":
                obj = dataclasses.replace(obj, values=tuple(float(v) for v in value))
            elif key == "metrics":
                obj = dataclasses.replace(obj, metrics=tuple(value))
            else:
                obj = dataclasses.replace(obj, base=with_override(obj.base, key, value))
        else:
            try:
                obj = with_override(obj, key, value)
            except KeyError as exc:
                raise ConfigError(str(exc), key) from exc
    return obj


def emit_outputs(bundle, outdir: Path, plots: list[str] | None = None) -> list[Path]:
    """Write the CSV tables, summary, effective config, and optional plots."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    name = bundle.scenario.name
    written = []

    header, rows = reporting.trajectory_table(bundle)
    traj = outdir / f"{name}_trajectory.csv"
    reporting.write_csv(traj, header, rows)
    written.append(traj)

    if bundle.adiabaticity is not None:
        ahead, arows = reporting.adiabaticity_table(bundle.adiabaticity)
        apath = outdir / f"{name}_adiabaticity.csv"
        reporting.write_csv(apath, ahead, arows)
        written.append(apath)

    spath = outdir / f"{name}_summary.txt"
    with open(spath, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reporting.summary_text(bundle))
    written.append(spath)

    cpath = outdir / f"{name}_config.yaml"
    with open(cpath, "w", encoding="utf-8", newline="\n") as fh:
        yaml.safe_dump({"scenario": scenario_to_dict(bundle.scenario)}, fh,
                       sort_keys=True, default_flow_style=False)
    written.append(cpath)

    if plots:
        cols = dict(zip(header, np.asarray(rows, dtype=object).T))
        for col in plots:
            if col not in header or col == "t":
                raise ConfigError(f"unknown plot column; choose from {header[1:]}", col)
            ppath = outdir / f"{name}_{col}.svg"
            reporting.write_svg_plot(
                ppath, bundle.grid,
                {col: np.array([float(v) for v in cols[col]])},
                title=f"{name}: {col}",
            )
            written.append(ppath)
    return written


def _load(path_or_builtin: str) -> Scenario | SweepSpec:
    p = Path(path_or_builtin)
    if p.exists():
        return parse_config(p.read_text(encoding="utf-8"))
    if path_or_builtin in builtin_names():
        return builtin(path_or_builtin)
    raise ConfigError(f"no such config file or builtin scenario: {path_or_builtin}")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dressed-tls",
        description="Closed-form dressed-state dynamics of a driven two-level system",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="config file path or builtin scenario name")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (repeatable)")
        p.add_argument("--rel-tol", type=float, default=None)
        p.add_argument("--abs-tol", type=float, default=None)

    prun = sub.add_parser("run", help="run one scenario")
    common(prun)
    prun.add_argument("--plot", default="", metavar="COL,...",
                      help="write SVG line plots of these trajectory columns")

    psweep = sub.add_parser("sweep", help="run a parameter sweep")
    common(psweep)

    pcheck = sub.add_parser("check", help="adiabaticity report only")
    common(pcheck)

    sub.add_parser("list-scenarios", help="list builtin scenarios")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in builtin_names():
            print(f"{name}: {builtin(name).description}")
        return 0
    try:
        obj = _load(args.config)
        obj = _apply_sets(obj, args.set)
        tol_sets = []
        if args.rel_tol is not None:
            tol_sets.append(f"rel_tol={args.rel_tol!r}")
        if args.abs_tol is not None:
            tol_sets.append(f"abs_tol={args.abs_tol!r}")
        obj = _apply_sets(obj, tol_sets)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(args.out)
    try:
        if args.command == "run":
            if isinstance(obj, SweepSpec):
                print("config error: run expects a scenario config", file=sys.stderr)
                return 2
            bundle = run_scenario(obj)
            plots = [c for c in args.plot.split(",") if c]
            for path in emit_outputs(bundle, outdir, plots):
                print(path)
            return 0
        if args.command == "check":
            if isinstance(obj, SweepSpec):
                print("config error: check expects a scenario config", file=sys.stderr)
                return 2
            import dataclasses

            bundle = run_scenario(dataclasses.replace(obj, outputs=("adiabaticity",)))
            outdir.mkdir(parents=True, exist_ok=True)
            ahead, arows = reporting.adiabaticity_table(bundle.adiabaticity)
            apath = outdir / f"{obj.name}_adiabaticity.csv"
            reporting.write_csv(apath, ahead, arows)
            print(apath)
            print(f"margin: {bundle.adiabaticity.margin!r}")
            return 0
        # sweep
        if isinstance(obj, Scenario):
            print("config error: sweep expects a sweep config", file=sys.stderr)
            return 2
        rows = run_sweep(obj)
        outdir.mkdir(parents=True, exist_ok=True)
        header = [obj.parameter] + list(obj.metrics) + ["error"]
        table = [[r.value] + [r.metrics.get(m, math.nan) for m in obj.metrics]
                 + [r.error or ""] for r in rows]
        spath = outdir / "sweep.csv"
        reporting.write_csv(spath, header, table)
        print(spath)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
