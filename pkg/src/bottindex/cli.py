"""Command-line front end.

Subcommands: ``compute``, ``sweep``, ``verify`` and ``bott`` (index of two
matrices stored in the container format). Every library error maps to its own
exit code (see :data:`bottindex.errors.EXIT_CODES`); log verbosity comes from
the ``BOTTINDEX_LOG`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import harness as hs
from . import indices as ix
from . import matcore as mc
from . import models as md
from .errors import BottError, ConfigError

log = logging.getLogger("bottindex")

FORMAT_VERSION = 1
COMPUTE_COLUMNS = (
    "Lx", "Ly", "boundary", "flux_p", "flux_q", "disorder_W", "seed", "mu",
    "filled", "gap", "bott", "raw_trace_imag", "residual", "comm_norm", "comm_trace_norm",
    "min_branch_distance", "chern_trace", "chern_trace_imag", "windowed_chern", "fhs",
    "agrees", "comm_Lx_H", "comm_Ly_H", "comm_Lx_P", "comm_Ly_P", "holmgren_Lx_H",
    "holmgren_Ly_H", "holmgren_Lx_P", "holmgren_Ly_P", "chain_bound", "actual_comm_norm",
    "heuristic", "chain_holds",
)
SWEEP_COLUMNS = (
    "point", "param", "value", "realization", "seed", "status", "bott", "residual",
    "gap", "filled", "comm_norm", "chern_trace", "windowed_chern", "fhs",
    "comm_Lx_P", "comm_Ly_P",
)
SWEEP_PARAMS = ("mu", "disorder_W", "flux", "ramp_width")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    branch_tol: float = mc.DEFAULT_BRANCH_TOL
    min_gap: float = 1e-3
    rounding_guard: float = 0.5

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"tolerances.{k} must be positive, got {v!r}")


@dataclass(frozen=True)
class OutputSpec:
    format: str = "json"
    path: str | None = None
    emit_svg: bool = False

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {self.format!r}")


@dataclass(frozen=True)
class RunConfig:
    lattice: md.LatticeSpec
    params: md.ModelParams
    mu: float | str
    switch_x: md.SwitchProfile
    switch_y: md.SwitchProfile
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSpec = field(default_factory=OutputSpec)

    def resolved_mu(self) -> float:
        """``mu``, with ``"auto"`` meaning the midpoint of the lowest clean band gap."""
        if self.mu != "auto":
            return float(self.mu)
        clean = replace(self.params, disorder_W=0.0)
        H = md.build_hofstadter(self.lattice, clean)
        gaps = md.band_gap_centers(H, self.params.flux_q, self.tolerances.min_gap)
        if not gaps:
            raise ConfigError("mu: auto needs a resolvable band gap in the clean model")
        return gaps[0][1]


_SECTIONS = {"model", "mu", "switch_x", "switch_y", "switch", "tolerances", "output"}
_MODEL_KEYS = {"Lx", "Ly", "boundary", "orbitals_per_site", "flux_p", "flux_q",
               "disorder_W", "hopping", "seed", "range_R"}


def _switch(d) -> md.SwitchProfile:
    if not isinstance(d, dict):
        raise ConfigError(f"switch must be a mapping, got {d!r}")
    unknown = set(d) - {"kind", "L_l", "L_r", "width"}
    if unknown:
        raise ConfigError(f"unknown switch keys: {sorted(unknown)}")
    try:
        if "width" in d:
            if "L_l" in d or "L_r" in d:
                raise ConfigError("give either width or L_l/L_r for a switch")
            w = float(d["width"])
            return md.SwitchProfile(d.get("kind", "linear"), -w / 2, w / 2)
        return md.SwitchProfile(d.get("kind", "linear"), float(d["L_l"]), float(d["L_r"]))
    except KeyError as exc:
        raise ConfigError(f"switch is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad switch: {exc}") from exc


def parse_config(data: dict) -> RunConfig:
    """Validate a config tree (as loaded from YAML) into a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    model = data.get("model") or {}
    bad = set(model) - _MODEL_KEYS
    if bad:
        raise ConfigError(f"unknown model keys: {sorted(bad)}")
    try:
        lattice = md.LatticeSpec(int(model.get("Lx", 16)), int(model.get("Ly", model.get("Lx", 16))),
                                 model.get("boundary", "torus"), int(model.get("orbitals_per_site", 1)))
        params = md.ModelParams(int(model.get("flux_p", 1)), int(model.get("flux_q", 4)),
                                float(model.get("disorder_W", 0.0)), float(model.get("hopping", 1.0)),
                                int(model.get("seed", 0)), int(model.get("range_R", 1)))
    except BottError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc
    mu = data.get("mu", "auto")
    if mu != "auto":
        try:
            mu = float(mu)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"mu must be a number or 'auto', got {mu!r}") from exc
    default_switch = data.get("switch", {"kind": "linear", "width": lattice.Lx / 2})
    sx = _switch(data.get("switch_x", default_switch))
    sy = _switch(data.get("switch_y", default_switch))
    try:
        tol = Tolerances(**(data.get("tolerances") or {}))
        out = OutputSpec(**(data.get("output") or {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(lattice, params, mu, sx, sy, tol, out)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(data or {})


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def to_csv(columns, rows, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(text: str) -> list[dict]:
    """Inverse of :func:`to_csv`; comment lines are skipped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(lines)]


def to_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def compute_record(cfg: RunConfig, H: np.ndarray | None = None) -> dict:
    """Evaluate one model instance; the returned dict follows ``COMPUTE_COLUMNS``."""
    if H is None:
        H = md.build_hofstadter(cfg.lattice, cfg.params)
    mu = cfg.resolved_mu()
    t = cfg.tolerances
    ev = hs.evaluate_plp(cfg.lattice, cfg.params, mu, cfg.switch_x, cfg.switch_y,
                         t.min_gap, t.branch_tol, t.rounding_guard, H=H)
    if ev.bott is None:
        raise ev.bott_error
    b, bd = ev.bott, ev.bounds
    ct = ev.chern_trace
    rec = {
        "Lx": cfg.lattice.Lx, "Ly": cfg.lattice.Ly, "boundary": cfg.lattice.boundary,
        "flux_p": cfg.params.flux_p, "flux_q": cfg.params.flux_q,
        "disorder_W": cfg.params.disorder_W, "seed": cfg.params.seed, "mu": mu,
        "filled": ev.filled, "gap": ev.gap, "bott": b.value,
        "raw_trace_imag": b.raw_trace.imag, "residual": b.residual,
        "comm_norm": b.comm_norm, "comm_trace_norm": b.comm_trace_norm,
        "min_branch_distance": b.min_branch_distance,
        "chern_trace": ct.real, "chern_trace_imag": ct.imag,
        "windowed_chern": ev.windowed_chern.real, "fhs": ev.fhs,
        "agrees": bool(abs(b.value - ct.real) < 1e-6 and (ev.fhs is None or ev.fhs == b.value)),
    }
    for k in ("comm_Lx_H", "comm_Ly_H", "comm_Lx_P", "comm_Ly_P", "holmgren_Lx_H",
              "holmgren_Ly_H", "holmgren_Lx_P", "holmgren_Ly_P", "chain_bound"):
        rec[k] = getattr(bd, k)
    rec["actual_comm_norm"] = bd.actual
    rec["heuristic"] = bd.heuristic
    rec["chain_holds"] = bd.chain_holds
    return {k: (float(v) if isinstance(v, np.floating) else v) for k, v in rec.items()}


def cmd_compute(args) -> int:
    cfg = load_config(args.config)
    t0 = time.perf_counter()
    H = md.build_hofstadter(cfg.lattice, cfg.params)
    if args.export_hamiltonian:
        mc.save_matrix(args.export_hamiltonian, H, "hermitian")
    rec = compute_record(cfg, H)
    wall = time.perf_counter() - t0
    fmt = args.format or cfg.output.format
    out = args.out or cfg.output.path
    if fmt == "csv":
        text = to_csv(COMPUTE_COLUMNS, [rec],
                      f"bottindex compute v{FORMAT_VERSION} wall_time={wall:.3f}s")
    else:
        text = to_json({"format_version": FORMAT_VERSION, **rec})
        log.info("wall time %.3f s", wall)
    _emit(text, out)
    if not rec["agrees"]:
        log.warning("bott=%d disagrees with chern_trace=%.3g / fhs=%s",
                    rec["bott"], rec["chern_trace"], rec["fhs"])
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int
    realizations: int = 1

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMS:
            raise ConfigError(f"--param must be one of {', '.join(SWEEP_PARAMS)}")
        if self.start > self.stop:
            raise ConfigError("--from must not exceed --to")
        if self.steps < 2:
            raise ConfigError("--steps must be at least 2")
        if self.realizations < 1:
            raise ConfigError("--realizations must be at least 1")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


def _point_config(cfg: RunConfig, sweep: SweepSpec, value: float, seed: int) -> RunConfig:
    params = replace(cfg.params, seed=seed)
    if sweep.parameter == "mu":
        return replace(cfg, params=params, mu=float(value))
    if sweep.parameter == "disorder_W":
        return replace(cfg, params=replace(params, disorder_W=float(value)))
    if sweep.parameter == "flux":
        f = Fraction(float(value)).limit_denominator(max(cfg.lattice.Lx, cfg.lattice.Ly))
        return replace(cfg, params=replace(params, flux_p=f.numerator, flux_q=f.denominator))
    w = float(value)
    return replace(cfg, params=params,
                   switch_x=replace(cfg.switch_x, L_l=-w / 2, L_r=w / 2),
                   switch_y=replace(cfg.switch_y, L_l=-w / 2, L_r=w / 2))


def sweep_row(cfg: RunConfig, sweep: SweepSpec, point: int, value: float, realization: int) -> dict:
    seed = cfg.params.seed ^ realization
    row = {"point": point, "param": sweep.parameter, "value": float(value),
           "realization": realization, "seed": seed}
    try:
        pc = _point_config(cfg, sweep, value, seed)
        if sweep.parameter == "flux":
            row["value"] = pc.params.flux
        rec = compute_record(pc)
    except BottError as exc:
        row["status"] = type(exc).__name__
        return row
    row["status"] = "ok"
    for k in ("bott", "residual", "gap", "filled", "comm_norm", "chern_trace",
              "windowed_chern", "fhs", "comm_Lx_P", "comm_Ly_P"):
        row[k] = rec[k]
    return row


def run_sweep(cfg: RunConfig, sweep: SweepSpec, jobs: int = 1) -> list[dict]:
    tasks = [(i, v, r) for i, v in enumerate(sweep.grid()) for r in range(sweep.realizations)]

    def one(task):
        return sweep_row(cfg, sweep, *task)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]
    return sorted(rows, key=lambda r: (r["point"], r["realization"]))


def svg_heatmap(rows: list[dict], title: str = "") -> str:
    """Static heatmap of the Bott index: parameter points by realization."""
    n_pts = max(r["point"] for r in rows) + 1
    n_real = max(r["realization"] for r in rows) + 1
    cw, ch, pad = 24, 18, 40
    w, h = pad + n_pts * cw + 10, pad + n_real * ch + 30
    vals = [r.get("bott") for r in rows if r.get("bott") is not None]
    vmax = max([1] + [abs(v) for v in vals])

    def color(v):
        if v is None:
            return "#999999"
        x = v / vmax
        if x >= 0:
            c = int(255 * (1 - x))
            return f"#ff{c:02x}{c:02x}"
        c = int(255 * (1 + x))
        return f"#{c:02x}{c:02x}ff"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
             f'<text x="{pad}" y="14" font-size="12">{title}</text>']
    for r in rows:
        x = pad + r["point"] * cw
        y = pad + r["realization"] * ch
        b = r.get("bott")
        parts.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{color(b)}" stroke="#fff"/>')
        label = "x" if b is None else str(b)
        parts.append(f'<text x="{x + cw / 2}" y="{y + ch - 5}" font-size="10" text-anchor="middle">{label}</text>')
    first = min(rows, key=lambda r: r["point"])["value"]
    last = max(rows, key=lambda r: r["point"])["value"]
    parts.append(f'<text x="{pad}" y="{h - 8}" font-size="10">{first:.4g}</text>')
    parts.append(f'<text x="{pad + n_pts * cw}" y="{h - 8}" font-size="10" text-anchor="end">{last:.4g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    sweep = SweepSpec(args.param, args.start, args.stop, args.steps, args.realizations)
    t0 = time.perf_counter()
    rows = run_sweep(cfg, sweep, args.jobs)
    wall = time.perf_counter() - t0
    fmt = args.format or cfg.output.format
    out = args.out or cfg.output.path
    if fmt == "csv":
        text = to_csv(SWEEP_COLUMNS, rows,
                      f"bottindex sweep v{FORMAT_VERSION} wall_time={wall:.3f}s")
    else:
        text = to_json({"format_version": FORMAT_VERSION, "rows": rows})
        log.info("wall time %.3f s", wall)
    _emit(text, out)
    svg = args.svg or (cfg.output.emit_svg and out and str(Path(out).with_suffix(".svg")))
    if svg:
        Path(svg).write_text(svg_heatmap(rows, f"Bott index vs {sweep.parameter}"))
    failed = sum(r["status"] != "ok" for r in rows)
    if failed:
        log.warning("%d of %d sweep rows recorded an error status", failed, len(rows))
    return 0


# ---------------------------------------------------------------------------
# verify and bott
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    names = args.suite or list(hs.SUITE_NAMES)
    ens = hs.EnsembleSpec(args.trials, args.seed, args.scale, args.dim)
    verdicts = []
    lines = []
    for name in names:
        v = hs.run_suite(name, ens, args.jobs)
        verdicts.append(v)
        lines.extend(hs.verdict_lines(v))
    if args.report:
        Path(args.report).write_text("\n".join(lines) + "\n")
    print(hs.summary_table(verdicts))
    return 0 if all(v.passed for v in verdicts) else 1


def cmd_bott(args) -> int:
    U, _ = mc.load_matrix(args.u)
    V, _ = mc.load_matrix(args.v)
    r = ix.bott_index(U, V, args.branch_tol)
    d = r.as_dict()
    print(to_json({"format_version": FORMAT_VERSION, **d}), end="")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bottindex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="Bott index and diagnostics of one model instance")
    c.add_argument("--config", required=True, help="YAML run configuration")
    c.add_argument("--out", help="output file (default: stdout)")
    c.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
    c.add_argument("--export-hamiltonian", metavar="PATH",
                   help="also write H as a matrix container")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="scan one parameter over a grid")
    s.add_argument("--config", required=True, help="YAML base configuration")
    s.add_argument("--param", required=True, choices=SWEEP_PARAMS, help="parameter to scan")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True, help="grid points, endpoints included")
    s.add_argument("--realizations", type=int, default=1, help="disorder seeds per point")
    s.add_argument("--jobs", type=int, default=1, help="worker threads")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--svg", metavar="PATH", help="write a heatmap of the index")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("--suite", action="append", metavar="NAME",
                   help=f"repeatable; default all of: {', '.join(hs.SUITE_NAMES)}")
    v.add_argument("--trials", type=int, default=20, help="seeded trials per suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--scale", type=float, default=0.1, help="generator norm of random pairs")
    v.add_argument("--dim", type=int, default=8, help="matrix size of random pairs")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--report", metavar="PATH", help="write per-trial JSON lines here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bott", help="Bott index of two unitaries stored as matrix containers")
    b.add_argument("--u", required=True, help="container holding U (.bin or .txt)")
    b.add_argument("--v", required=True, help="container holding V")
    b.add_argument("--branch-tol", type=float, default=mc.DEFAULT_BRANCH_TOL)
    b.set_defaults(func=cmd_bott)
    return p


def _setup_logging() -> None:
    level = os.environ.get("BOTTINDEX_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BottError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return ConfigError.exit_code
