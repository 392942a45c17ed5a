"""Command-line surface: scenario runs, lemma sweeps, record analysis.

Subcommands:

  run           integrate a configured scenario, writing a CSV of
                per-record diagnostics plus a JSON manifest
  check-lemmas  sweep the inequality harness over the seeded corpus
  analyze       post-process a records CSV: decay integral, dyadic
                minima, growth exponent, conservation drift
  soliton-test  report traveling-wave residuals for both parameter
                conventions

Config files are flat `key = value` text with dotted keys and '#'
comments. Records are CSV with a fixed column order and floats written in
shortest round-trip form, so identical configs produce byte-identical
files. Exit codes: 0 success, 2 configuration error, 3 numerical abort.
The BOVIRIAL_OUT environment variable supplies the default output
directory when --out is omitted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bo_solver import (
    BlowupError,
    SolverConfig,
    check_stability,
    l1_growth_fit,
    profile_residual,
    run_trajectory,
    soliton,
    soliton_profile,
    SolitonParams,
)
from .inequality_harness import (
    DEFAULT_LAMBDAS,
    DEFAULT_SEED,
    TAGS,
    build_corpus,
    calibrate,
    run_check,
)
from .spectral_core import Field, Grid, make_grid
from .virial_diagnostics import (
    DiagRecord,
    WeightSchedule,
    diag_record,
    energy_budget,
    integrated_decay,
    lambda_at,
    mass_budget,
)

__all__ = ["ConfigError", "ScenarioConfig", "parse_config_text", "build_config", "main"]

CSV_COLUMNS = (
    "t", "I1", "I2", "E", "L1", "lambda", "F",
    "a1", "a2", "a3", "a4", "mass_residual",
    "b1", "b2", "b3", "d31", "d32", "d321", "d322", "b4", "energy_residual",
)

SCENARIOS = ("soliton", "gaussian", "random", "custom")

# every key the parser accepts; value = (type tag, scenario restriction)
_KEYS = {
    "scenario": ("str", None),
    "grid.n": ("int", None),
    "grid.length": ("float", None),
    "solver.dt": ("float", None),
    "solver.t0": ("float", None),
    "solver.t_end": ("float", None),
    "solver.dealias": ("bool", None),
    "solver.record_every": ("int", None),
    "weight.a": ("float", None),
    "weight.c_scale": ("float", None),
    "output.prefix": ("str", None),
    "output.format": ("str", None),
    "soliton.c": ("float", "soliton"),
    "soliton.x0": ("float", "soliton"),
    "gaussian.amplitude": ("float", "gaussian"),
    "gaussian.width": ("float", "gaussian"),
    "gaussian.center": ("float", "gaussian"),
    "random.seed": ("int", "random"),
    "random.bandwidth": ("int", "random"),
    "random.amplitude": ("float", "random"),
    "custom.samples_file": ("str", "custom"),
}

_REQUIRED = ("scenario", "grid.n", "grid.length", "solver.dt", "solver.t0", "solver.t_end")


class ConfigError(ValueError):
    """Configuration problem; maps to exit code 2."""


def parse_config_text(text: str) -> dict[str, str]:
    """Flat key = value lines; '#' starts a comment; later duplicate keys
    are errors, not overrides."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, value: str):
    kind = _KEYS[key][0]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if value.lower() in ("true", "yes", "1"):
                return True
            if value.lower() in ("false", "no", "0"):
                return False
            raise ValueError(value)
        return value
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {value!r} as {kind}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    grid: Grid
    solver: SolverConfig
    weight: WeightSchedule
    params: dict
    out_prefix: str
    out_format: str
    raw: dict  # the parsed key=value pairs, echoed into the manifest


def build_config(raw: dict[str, str]) -> ScenarioConfig:
    for key in raw:
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    for key in raw:
        owner = _KEYS[key][1]
        if owner is not None and owner != scenario:
            raise ConfigError(f"key {key!r} does not apply to scenario {scenario!r}")

    vals = {k: _convert(k, v) for k, v in raw.items()}
    try:
        grid = make_grid(vals["grid.n"], vals["grid.length"])
        solver = SolverConfig(
            dt=vals["solver.dt"],
            t0=vals["solver.t0"],
            t_end=vals["solver.t_end"],
            dealias=vals.get("solver.dealias", True),
            record_every=vals.get("solver.record_every", 1),
        )
        weight = WeightSchedule(a=vals.get("weight.a", 0.0),
                                c_scale=vals.get("weight.c_scale", 1.0))
        check_stability(solver, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if solver.t0 <= 1.0:
        raise ConfigError("solver.t0 must exceed 1 (window weights are undefined below)")
    span = solver.t_end - solver.t0
    n_steps = round(span / solver.dt)
    if n_steps < 1 or abs(n_steps * solver.dt - span) > 1e-9 * max(1.0, span):
        raise ConfigError("solver.dt must tile [t0, t_end] in an integer number of steps")

    params: dict = {}
    if scenario == "soliton":
        if "soliton.c" not in vals:
            raise ConfigError("soliton scenario requires soliton.c")
        params["c"] = vals["soliton.c"]
        params["x0"] = vals.get("soliton.x0", 0.0)
        if params["c"] <= 0:
            raise ConfigError("soliton.c must be positive")
    elif scenario == "gaussian":
        for key in ("gaussian.amplitude", "gaussian.width"):
            if key not in vals:
                raise ConfigError(f"gaussian scenario requires {key}")
        if vals["gaussian.width"] <= 0:
            raise ConfigError("gaussian.width must be positive")
        params["amplitude"] = vals["gaussian.amplitude"]
        params["width"] = vals["gaussian.width"]
        params["center"] = vals.get("gaussian.center", 0.0)
    elif scenario == "random":
        params["seed"] = vals.get("random.seed", 0)
        params["bandwidth"] = vals.get("random.bandwidth", grid.n // 8)
        params["amplitude"] = vals.get("random.amplitude", 1.0)
        if not (1 <= params["bandwidth"] <= grid.n // 3):
            raise ConfigError("random.bandwidth must lie in [1, n/3]")
    else:  # custom
        if "custom.samples_file" not in vals:
            raise ConfigError("custom scenario requires custom.samples_file")
        path = vals["custom.samples_file"]
        if not os.path.isfile(path):
            raise ConfigError(f"samples file not found: {path}")
        params["samples_file"] = path

    out_format = vals.get("output.format", "csv")
    if out_format != "csv":
        raise ConfigError(f"unsupported output.format {out_format!r} (only 'csv')")
    return ScenarioConfig(
        scenario=scenario,
        grid=grid,
        solver=solver,
        weight=weight,
        params=params,
        out_prefix=vals.get("output.prefix", scenario),
        out_format=out_format,
        raw=dict(raw),
    )


def load_config(path: str) -> ScenarioConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return build_config(parse_config_text(fh.read()))


def initial_condition(cfg: ScenarioConfig) -> Field:
    grid = cfg.grid
    p = cfg.params
    if cfg.scenario == "soliton":
        try:
            _, certified = soliton(p["c"], p["x0"], grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return soliton_profile(certified, grid)
    if cfg.scenario == "gaussian":
        x = grid.coords
        return Field(grid, p["amplitude"] * np.exp(-(((x - p["center"]) / p["width"]) ** 2)))
    if cfg.scenario == "random":
        rng = np.random.default_rng(p["seed"])
        co = np.zeros(grid.n // 2 + 1, dtype=complex)
        kmax = p["bandwidth"]
        co[1 : kmax + 1] = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
        f = np.fft.irfft(co, grid.n)
        nrm = math.sqrt(grid.spacing * float(np.sum(f * f)))
        if nrm > 0 and p["amplitude"] != 0:
            f = f * (p["amplitude"] / nrm)
        else:
            f = np.zeros(grid.n)
        return Field(grid, f)
    # custom
    try:
        samples = np.loadtxt(p["samples_file"])
    except Exception as exc:
        raise ConfigError(f"cannot read samples file: {exc}") from None
    samples = np.atleast_1d(np.asarray(samples, dtype=float))
    if samples.shape != (grid.n,):
        raise ConfigError(
            f"samples file has shape {samples.shape}, expected ({grid.n},)"
        )
    try:
        return Field(grid, samples)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(x) -> str:
    return repr(float(x))


def _csv_rows(states, sched: WeightSchedule, use_dealias: bool) -> list[str]:
    """One CSV line per recorded state; budget cells are filled for states
    with two equally spaced neighbors and left empty otherwise.

    States near a blowup can overflow the cubic functionals even though
    their samples are finite; rows are flushed up to the first such state."""
    diags = []
    with np.errstate(over="ignore", invalid="ignore"):
        for st in states:
            try:
                diags.append(diag_record(st.u, st.t, sched))
            except ValueError:
                break
    states = states[: len(diags)]
    lines = []
    for i, (st, d) in enumerate(zip(states, diags)):
        cells = [_fmt(d.t), _fmt(d.I1), _fmt(d.I2), _fmt(d.E), _fmt(d.L1),
                 _fmt(d.lam), _fmt(d.F)]
        budget_cells = [""] * (len(CSV_COLUMNS) - 7)
        if 0 < i < len(states) - 1:
            h_prev = states[i].t - states[i - 1].t
            h_next = states[i + 1].t - states[i].t
            if abs(h_next - h_prev) <= 1e-9 * max(h_prev, h_next):
                with np.errstate(over="ignore", invalid="ignore"):
                    mb = mass_budget(states[i - 1].u, st.u, states[i + 1].u, st.t,
                                     h_prev, sched, dealias=use_dealias)
                    eb = energy_budget(states[i - 1].u, st.u, states[i + 1].u, st.t,
                                       h_prev, sched, dealias=use_dealias)
                budget_cells = [
                    _fmt(mb.a1), _fmt(mb.a2), _fmt(mb.a3), _fmt(mb.a4),
                    _fmt(mb.residual),
                    _fmt(eb.b1), _fmt(eb.b2), _fmt(eb.b3),
                    _fmt(eb.d31), _fmt(eb.d32), _fmt(eb.d321), _fmt(eb.d322),
                    _fmt(eb.b4), _fmt(eb.residual),
                ]
        lines.append(",".join(cells + budget_cells))
    return lines


def _write_records(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for line in lines:
            fh.write(line + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_scenario(cfg: ScenarioConfig, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    records_path = os.path.join(out_dir, cfg.out_prefix + ".csv")
    manifest_path = os.path.join(out_dir, cfg.out_prefix + ".manifest.json")
    started = _now()
    u0 = initial_condition(cfg)
    status = "completed"
    try:
        states = run_trajectory(u0, cfg.solver)
    except BlowupError as exc:
        states = exc.partial if getattr(exc, "partial", None) else []
        status = "aborted"
        print(f"error: {exc}", file=sys.stderr)
    lines = _csv_rows(states, cfg.weight, cfg.solver.dealias)
    _write_records(records_path, lines)
    manifest = {
        "config": cfg.raw,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "records": len(lines),
        "status": status,
    }
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if status == "completed" else 3


def _run_one(args: tuple[str, str]) -> int:
    path, out_dir = args
    try:
        return run_scenario(load_config(path), out_dir)
    except ConfigError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return 2


def parse_records(path: str):
    """Read a records CSV back into (DiagRecord list, row dicts).

    Raises ConfigError on malformed files: wrong header, bad floats,
    non-increasing times."""
    if not os.path.isfile(path):
        raise ConfigError(f"records file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ConfigError("records file has a wrong or missing header")
    diags: list[DiagRecord] = []
    rows: list[dict] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ConfigError(f"line {lineno}: expected {len(CSV_COLUMNS)} cells")
        row = {}
        for name, cell in zip(CSV_COLUMNS, cells):
            if cell == "":
                row[name] = None
                continue
            try:
                row[name] = float(cell)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad float {cell!r}") from None
        try:
            diags.append(DiagRecord(t=row["t"], I1=row["I1"], I2=row["I2"],
                                    E=row["E"], L1=row["L1"], F=row["F"],
                                    lam=row["lambda"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        rows.append(row)
    if not diags:
        raise ConfigError("records file contains no data rows")
    ts = [d.t for d in diags]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigError("record times are not strictly increasing")
    return diags, rows


def _write_dat(path: str, pairs) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y in pairs:
            fh.write(f"{_fmt(x)} {_fmt(y)}\n")


def analyze_records(records_path: str, a: float, c_scale: float, out_dir: str) -> int:
    diags, rows = parse_records(records_path)
    try:
        sched = WeightSchedule(a=a, c_scale=c_scale)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    decay_part = [d for d in diags if d.t >= 10.0]
    if not decay_part or decay_part[-1].t < 16.0:
        raise ConfigError(
            "records must span at least one dyadic block past t = 10 "
            f"(last t = {diags[-1].t:g})"
        )
    integral, minima = integrated_decay(decay_part)
    minima_f = [f for _, f in minima]
    monotone = all(b < a_ for a_, b in zip(minima_f, minima_f[1:]))

    flags: list[str] = []
    try:
        exponent = l1_growth_fit(diags)
    except ValueError as exc:
        exponent = None
        flags.append(f"l1 fit unavailable: {exc}")

    lam_mismatch = max(
        abs(d.lam - lambda_at(sched, d.t)) / d.lam for d in diags if d.t > 1.0
    )
    if lam_mismatch > 1e-9:
        flags.append(
            f"lambda column disagrees with schedule a={a:g}, c={c_scale:g} "
            f"(max rel {lam_mismatch:.3e})"
        )

    i1_0, i2_0, e_0 = diags[0].I1, diags[0].I2, diags[0].E
    i1_drift = max(abs(d.I1 - i1_0) for d in diags)
    i2_drift = max(abs(d.I2 - i2_0) for d in diags) / max(abs(i2_0), 1e-300)
    e_drift = max(abs(d.E - e_0) for d in diags) / max(abs(e_0), 1e-300)
    if i1_drift > 1e-10:
        flags.append(f"I1 drift {i1_drift:.3e} above 1e-10")
    if i2_drift > 1e-8:
        flags.append(f"I2 drift {i2_drift:.3e} above 1e-8")
    if e_drift > 1e-6:
        flags.append(f"E drift {e_drift:.3e} above 1e-6")

    os.makedirs(out_dir, exist_ok=True)
    summary = {
        "records": len(diags),
        "t_range": [diags[0].t, diags[-1].t],
        "integrated_decay": integral,
        "dyadic_minima": [[t, f] for t, f in minima],
        "minima_monotone": monotone,
        "l1_exponent": exponent,
        "drift": {"I1_abs": i1_drift, "I2_rel": i2_drift, "E_rel": e_drift},
        "flags": flags,
        "schedule": {"a": a, "c_scale": c_scale},
    }
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_dat(os.path.join(out_dir, "F_vs_t.dat"), [(d.t, d.F) for d in diags])
    _write_dat(os.path.join(out_dir, "mass_residual_vs_t.dat"),
               [(r["t"], r["mass_residual"]) for r in rows if r["mass_residual"] is not None])
    _write_dat(os.path.join(out_dir, "energy_residual_vs_t.dat"),
               [(r["t"], r["energy_residual"]) for r in rows if r["energy_residual"] is not None])
    _write_dat(os.path.join(out_dir, "l1_loglog.dat"),
               [(math.log(math.sqrt(1.0 + d.t * d.t)), math.log(d.L1))
                for d in diags if d.L1 > 0])
    return 0


def check_lemmas_cmd(seed: int, grid_n: int, grid_length: float, lams, out_dir: str) -> int:
    if not lams:
        raise ConfigError("need at least one lambda value")
    if any((not np.isfinite(l)) or l <= 0 for l in lams):
        raise ConfigError("lambda values must be positive and finite")
    try:
        grid = make_grid(grid_n, grid_length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    corpus = build_corpus(grid, seed=seed)

    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "lemma_report.csv")
    sups: dict[str, float] = {}
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("input_id,tag,lambda,lhs,rhs_unit,ratio\n")
        for tag in TAGS:
            for label, f in zip(corpus.labels, corpus.entries):
                for lam in lams:
                    rep = run_check(tag, f, lam, input_id=label)
                    fh.write(f"{label},{tag},{_fmt(lam)},{_fmt(rep.lhs)},"
                             f"{_fmt(rep.rhs_unit)},{_fmt(rep.ratio)}\n")
                    if tag not in sups or rep.ratio > sups[tag]:
                        sups[tag] = rep.ratio
    summary = {
        "seed": seed,
        "grid": {"n": grid_n, "length": grid_length},
        "lambdas": list(lams),
        "sup_ratio": sups,
        "calibrate": {tag: calibrate(corpus, tag, lams) for tag in TAGS},
    }
    with open(os.path.join(out_dir, "lemma_summary.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def soliton_test_cmd(c: float, validate_family: bool) -> int:
    grid = make_grid(4096, 400.0)
    try:
        _, certified = soliton(c, 0.0, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    classical = SolitonParams(amplitude=4.0 * c, scale=c, center=0.0, speed=c)
    r_cert = profile_residual(certified, grid)
    r_class = profile_residual(classical, grid)
    print(f"certified  amplitude={-2.0 * c:g} speed={-c:g} residual={r_cert:.6e}")
    print(f"classical  amplitude={4.0 * c:g} speed={c:g} residual={r_class:.6e} (reported only)")
    ok = r_cert <= 1e-6
    if validate_family:
        for b in (0.5, 1.0, 2.0, 4.0):
            p = SolitonParams(amplitude=-2.0 * b, scale=b, center=0.0, speed=-b)
            r = profile_residual(p, grid)
            good = r <= 1e-6
            ok = ok and good
            print(f"family B={b:g} residual={r:.6e} {'ok' if good else 'FAIL'}")
    if not ok:
        print("error: certified family residual above 1e-6", file=sys.stderr)
        return 3
    return 0


def _default_out(value) -> str:
    if value:
        return value
    return os.environ.get("BOVIRIAL_OUT", ".")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bovirial",
        description="Benjamin-Ono pseudo-spectral runs and virial/decay diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured scenario")
    p_run.add_argument("--config", action="append", required=True,
                       help="config file (repeat to fan out several runs)")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for multiple configs")

    p_chk = sub.add_parser("check-lemmas", help="sweep the inequality harness")
    p_chk.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_chk.add_argument("--grid-n", type=int, default=1024)
    p_chk.add_argument("--grid-length", type=float, default=400.0)
    p_chk.add_argument("--lambdas", default=",".join(str(l) for l in DEFAULT_LAMBDAS),
                       help="comma-separated window scales")
    p_chk.add_argument("--out", default=None)

    p_ana = sub.add_parser("analyze", help="post-process a records CSV")
    p_ana.add_argument("--records", required=True)
    p_ana.add_argument("--a", type=float, default=0.0, help="weight exponent a")
    p_ana.add_argument("--c", type=float, default=1.0, help="window scale factor c")
    p_ana.add_argument("--out", default=None)

    p_sol = sub.add_parser("soliton-test", help="traveling-wave residual report")
    p_sol.add_argument("--c", type=float, required=True)
    p_sol.add_argument("--validate-family", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            out_dir = _default_out(args.out)
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            tasks = [(path, out_dir) for path in args.config]
            if args.jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    codes = list(pool.map(_run_one, tasks))
            else:
                codes = [_run_one(task) for task in tasks]
            return max(codes)
        if args.command == "check-lemmas":
            try:
                lams = [float(tok) for tok in args.lambdas.split(",") if tok.strip()]
            except ValueError:
                raise ConfigError(f"cannot parse --lambdas {args.lambdas!r}") from None
            return check_lemmas_cmd(args.seed, args.grid_n, args.grid_length,
                                    lams, _default_out(args.out))
        if args.command == "analyze":
            return analyze_records(args.records, args.a, args.c, _default_out(args.out))
        return soliton_test_cmd(args.c, args.validate_family)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
