"""Experiment driver: generate grids, reconstruct, report convergence slopes.

Subcommands
-----------
generate      synthesize Fourier grids for a sweep of band limits and save
              them (plus the ground-truth model) under the output directory
reconstruct   run the two-stage pipeline on saved grids, compare against the
              stored truth, and append one metrics row per band limit
report        fit log-log slopes through the metrics and write a JSON report
              plus a tidy CSV with reference-rate columns
verify        re-check a random sample of saved grid entries against the
              slow 2D quadrature oracle

All file formats are plain text (one JSON header line + CSV for grids, JSON
for models/reports, commented CSV for metrics).  Runs are deterministic:
the only randomness is the seeded sampler inside `verify`.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from mpmath import mp

from .model1d import TrigBackground
from .model2d import (
    Background2D,
    CoeffGrid2D,
    Curve,
    Model2D,
    coeff_grid,
    eval2d,
    load_grid,
    quadrature2d_oracle,
    save_grid,
)
from .numerics import ArithmeticContext
from .recon2d import reconstruct_field, truncated_baseline

__all__ = [
    "ExperimentConfig",
    "MetricsRow",
    "SlopeFit",
    "cmd_generate",
    "cmd_reconstruct",
    "cmd_report",
    "cmd_verify",
    "main",
]

METRICS_HEADER = "# fourier-edge metrics v1"


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs, JSON-serializable.

    M defaults to N^2 per sweep entry unless ``override_M`` is set.  Sweep
    entries with N < d + 2 cannot run the slice stage at order d; they are
    recorded as degenerate rows rather than rejected up front.
    """

    model: dict = field(
        default_factory=lambda: {"kind": "canonical", "d_model": 11}
    )
    d_psi: int = 9
    d: int = 9
    sweep_N: tuple = (8, 12, 16, 24, 32)
    override_M: Optional[int] = None
    x_points: tuple = (1.1,)
    y_count: int = 512
    precision_digits: int = 60
    exclusion_radius: float = math.pi / 8
    boundary_collar: float = math.pi / 64
    jobs: int = 1
    d1: Optional[int] = None
    out_dir: str = "out"

    def __post_init__(self) -> None:
        self.sweep_N = tuple(int(n) for n in self.sweep_N)
        self.x_points = tuple(float(x) for x in self.x_points)
        if self.y_count < 8:
            raise ValueError("y_count must be >= 8")
        if self.precision_digits < 15:
            raise ValueError("precision_digits must be >= 15")
        if not 0 <= self.exclusion_radius < math.pi:
            raise ValueError("exclusion_radius outside [0, pi)")

    def M_for(self, N: int) -> int:
        return self.override_M if self.override_M is not None else N * N

    def degenerate_sweep_entries(self) -> list:
        return [n for n in self.sweep_N if n < self.d + 2]

    def ctx(self) -> ArithmeticContext:
        return ArithmeticContext(self.precision_digits)

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def to_json(self) -> dict:
        d = asdict(self)
        d["sweep_N"] = list(self.sweep_N)
        d["x_points"] = list(self.x_points)
        return d


# -- model (de)serialization -------------------------------------------------

def _cpx_list(values) -> list:
    return [[complex(v).real, complex(v).imag] for v in values]


def _trig_from_json(data) -> TrigBackground:
    return TrigBackground(tuple(complex(re, im) for re, im in data))


def model_to_json(m: Model2D) -> dict:
    mags = []
    for prof in m.magnitudes:
        if isinstance(prof, TrigBackground):
            mags.append({"coeffs": _cpx_list(prof.coeffs)})
        else:
            mags.append(float(prof))
    out = {
        "d_model": m.d_model,
        "curve": {"kind": m.curve.kind, "coeffs": _cpx_list(m.curve.coeffs)},
        "magnitudes": mags,
        "background": None,
    }
    if m.background is not None:
        out["background"] = [
            [_cpx_list(p.coeffs), _cpx_list(q.coeffs)]
            for p, q in m.background.terms
        ]
    return out


def model_from_json(data: dict) -> Model2D:
    curve = Curve(
        data["curve"]["kind"],
        tuple(complex(re, im) for re, im in data["curve"]["coeffs"]),
    )
    mags = []
    for prof in data["magnitudes"]:
        if isinstance(prof, dict):
            mags.append(_trig_from_json(prof["coeffs"]))
        else:
            mags.append(prof)
    background = None
    if data.get("background"):
        background = Background2D(
            tuple(
                (_trig_from_json(p), _trig_from_json(q))
                for p, q in data["background"]
            )
        )
    return Model2D(data["d_model"], tuple(mags), curve, background)


def model_from_config(cfg: ExperimentConfig) -> Model2D:
    choice = cfg.model
    if choice.get("kind") == "canonical":
        return Model2D.canonical(choice.get("d_model", 11))
    if choice.get("kind") == "custom":
        return model_from_json(choice["definition"])
    raise ValueError(f"unknown model kind {choice.get('kind')!r}")


# -- metrics -----------------------------------------------------------------

@dataclass
class MetricsRow:
    """One sweep entry's error metrics (floats; NaN for degenerate rows)."""

    N: int
    M: int
    delta_xi: float
    delta_A: tuple
    delta_F: float
    delta_T: float
    seconds: float

    def csv(self) -> str:
        cells = [str(self.N), str(self.M), repr(self.delta_xi)]
        cells += [repr(a) for a in self.delta_A]
        cells += [repr(self.delta_F), repr(self.delta_T), f"{self.seconds:.3f}"]
        return ",".join(cells)


def metrics_columns(d: int) -> str:
    names = ["N", "M", "delta_xi"]
    names += [f"delta_A_{l}" for l in range(d + 1)]
    names += ["delta_F", "delta_T", "seconds"]
    return ",".join(names)


def _circle_gap(a, b):
    """Angular distance |a - b| on the circle, caller holds precision."""
    g = mp.mpf(a) - mp.mpf(b)
    two_pi = 2 * mp.pi
    g = g - two_pi * mp.floor((g + mp.pi) / two_pi)
    return abs(g)


def compute_metrics(
    model: Model2D,
    grid: CoeffGrid2D,
    cfg: ExperimentConfig,
    N: int,
) -> MetricsRow:
    """Run the pipeline on one grid and compare against the model truth."""
    ctx = cfg.ctx()
    t0 = time.monotonic()
    if N < cfg.d + 2:
        nan = float("nan")
        return MetricsRow(
            N, grid.M, nan, (nan,) * (cfg.d + 1), nan, nan,
            time.monotonic() - t0,
        )
    fld = reconstruct_field(
        grid, cfg.d_psi, cfg.d, cfg.x_points, ctx, jobs=cfg.jobs, d1=cfg.d1
    )
    with ctx.workprec():
        collar = mp.mpf(cfg.boundary_collar)
        excl = mp.mpf(cfg.exclusion_radius)
        d_xi = mp.mpf(0)
        d_A = [mp.mpf(0)] * (cfg.d + 1)
        d_F = mp.mpf(0)
        d_T = mp.mpf(0)
        ys = [-mp.pi + 2 * mp.pi * j / cfg.y_count for j in range(cfg.y_count)]
        for x in cfg.x_points:
            if float(abs(mp.mpf(x))) > float(mp.pi - collar):
                continue  # boundary collar: curve metrics unreliable there
            s = fld.slices.get(float(x))
            if s is None:
                return MetricsRow(
                    N, grid.M, float("nan"), (float("nan"),) * (cfg.d + 1),
                    float("nan"), float("nan"), time.monotonic() - t0,
                )
            xi_true = model.curve.xi(x, ctx)
            # compare on the circle: the curve value is a torus coordinate
            d_xi = max(d_xi, _circle_gap(s.recon.xi_tilde, xi_true))
            for l in range(cfg.d + 1):
                a_true = model.magnitude_value(l, x, ctx)
                a_rec = mp.mpc(s.recon.magnitudes_tilde[l])
                d_A[l] = max(d_A[l], abs(a_rec - a_true))
            for y in ys:
                if _circle_gap(y, s.recon.xi_tilde) < excl:
                    continue
                truth = eval2d(model, x, y, ctx)
                d_F = max(d_F, abs(s.value(y, ctx) - truth))
                d_T = max(d_T, abs(truncated_baseline(grid, x, y, ctx) - truth))
        return MetricsRow(
            N,
            grid.M,
            float(d_xi),
            tuple(float(a) for a in d_A),
            float(d_F),
            float(d_T),
            time.monotonic() - t0,
        )


# -- slope fitting -----------------------------------------------------------

@dataclass
class SlopeFit:
    """Least-squares line through (log N, log err)."""

    metric: str
    slope: float
    intercept: float
    n_points: int

    def to_json(self) -> dict:
        return asdict(self)


def fit_loglog(points) -> tuple:
    """(slope, intercept) of log(err) vs log(N); needs >= 3 finite points."""
    clean = [
        (math.log(n), math.log(e))
        for n, e in points
        if e > 0 and math.isfinite(e)
    ]
    if len(clean) < 3:
        raise ValueError(
            f"refusing slope fit: {len(clean)} usable points (need >= 3)"
        )
    xs = [p[0] for p in clean]
    ys = [p[1] for p in clean]
    n = len(clean)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, ybar - slope * xbar, n


# -- file plumbing -----------------------------------------------------------

def _grid_path(out: Path, N: int) -> Path:
    return out / f"grid_N{N}.fec"


def _append_metrics(path: Path, cfg: ExperimentConfig, rows, notes=()) -> None:
    fresh = not path.exists()
    with open(path, "a") as fh:
        if fresh:
            fh.write(METRICS_HEADER + "\n")
            fh.write(metrics_columns(cfg.d) + "\n")
        for note in notes:
            fh.write(f"# {note}\n")
        for row in rows:
            fh.write(row.csv() + "\n")


def read_metrics(path: Path) -> tuple:
    """(column names, list of float-row dicts); comment lines skipped."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError(f"{path} is not a metrics file (bad header)")
    columns = lines[1].split(",")
    rows = []
    for ln in lines[2:]:
        if not ln or ln.startswith("#"):
            continue
        cells = ln.split(",")
        rows.append(
            {c: (int(v) if c in ("N", "M") else float(v))
             for c, v in zip(columns, cells)}
        )
    return columns, rows


# -- subcommands -------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = model_from_config(cfg)
    ctx = cfg.ctx()
    (out / "model2d.json").write_text(
        json.dumps(
            {"model": model_to_json(model), "config": cfg.to_json()}, indent=2
        )
    )
    for N in cfg.sweep_N:
        M = cfg.M_for(N)
        t0 = time.monotonic()
        grid = coeff_grid(model, M, N, ctx)
        save_grid(grid, _grid_path(out, N), cfg.precision_digits)
        print(
            f"generate: N={N} M={M} -> {_grid_path(out, N).name} "
            f"({time.monotonic() - t0:.1f}s, {grid.diagnostics.get('method')})"
        )
    return 0


def cmd_reconstruct(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    data = json.loads((out / "model2d.json").read_text())
    model = model_from_json(data["model"])
    rows = []
    notes = []
    for N in cfg.sweep_N:
        grid = load_grid(_grid_path(out, N))
        row = compute_metrics(model, grid, cfg, N)
        rows.append(row)
        if N < cfg.d + 2:
            notes.append(
                f"N={N} degenerate: slice stage needs N >= d+2 = {cfg.d + 2}"
            )
        print(f"reconstruct: N={N} M={row.M} "
              f"delta_xi={row.delta_xi:.3e} delta_F={row.delta_F:.3e} "
              f"({row.seconds:.1f}s)")
        field_json = {
            "N": N,
            "M": row.M,
            "delta_xi": row.delta_xi,
            "delta_A": list(row.delta_A),
            "delta_F": row.delta_F,
            "delta_T": row.delta_T,
        }
        (out / f"metrics_N{N}.json").write_text(json.dumps(field_json, indent=2))
    _append_metrics(out / "metrics.csv", cfg, rows, notes)
    return 0


def cmd_report(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    columns, rows = read_metrics(out / "metrics.csv")
    # keep the latest row per N (the metrics file is append-only)
    latest = {}
    for r in rows:
        latest[r["N"]] = r
    rows = [latest[n] for n in sorted(latest)]
    fits = {}
    failures = {}
    for metric in columns:
        if metric in ("N", "M", "seconds"):
            continue
        pts = [(r["N"], r[metric]) for r in rows]
        try:
            slope, intercept, n = fit_loglog(pts)
            fits[metric] = SlopeFit(metric, slope, intercept, n).to_json()
        except ValueError as exc:
            failures[metric] = str(exc)
    report = {"fits": fits, "refused": failures, "d": cfg.d}
    (out / "report.json").write_text(json.dumps(report, indent=2))
    with open(out / "report_tidy.csv", "w") as fh:
        fh.write("N,metric,value,ref_full_order,ref_localization\n")
        for r in rows:
            for metric in columns:
                if metric in ("N", "M", "seconds"):
                    continue
                n = r["N"]
                fh.write(
                    f"{n},{metric},{r[metric]!r},"
                    f"{n ** float(-(cfg.d + 1))!r},{n ** float(-(cfg.d + 2))!r}\n"
                )
    for metric, f in fits.items():
        print(f"report: {metric} slope {f['slope']:+.2f} over {f['n_points']} points")
    for metric, why in failures.items():
        print(f"report: {metric}: {why}")
    return 0


def cmd_verify(cfg: ExperimentConfig, entries: int = 16, nodes: int = 512) -> int:
    out = Path(cfg.out_dir)
    data = json.loads((out / "model2d.json").read_text())
    model = model_from_json(data["model"])
    N = min(cfg.sweep_N)
    grid = load_grid(_grid_path(out, N))
    ctx = ArithmeticContext(15)
    rng = random.Random(1729)
    cap_x = min(grid.M, 16)
    worst = 0.0
    for _ in range(entries):
        wx = rng.randint(-cap_x, cap_x)
        wy = rng.randint(-grid.N, grid.N)
        with ctx.workprec():
            ref = quadrature2d_oracle(model, wx, wy, ctx, nodes=nodes)
            err = float(abs(grid.c(wx, wy) - ref))
        worst = max(worst, err)
        status = "ok" if err <= 1e-8 else "FAIL"
        print(f"verify: ({wx:+3d},{wy:+3d}) |stored - oracle| = {err:.2e} {status}")
    print(f"verify: worst deviation {worst:.2e}")
    return 0 if worst <= 1e-8 else 1


# -- argument parsing --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fourier-edge",
        description="piecewise-smooth Fourier reconstruction experiments",
    )
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--precision", type=int, help="override working digits")
    p.add_argument("--jobs", type=int, help="process count for row stage")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument(
        "--exclusion-radius", type=float, help="error-metric exclusion radius"
    )
    p.add_argument("--override-M", type=int, help="fixed M instead of N^2")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", help="synthesize and store grids")
    sub.add_parser("reconstruct", help="run pipeline, append metrics")
    sub.add_parser("report", help="fit slopes, write report")
    v = sub.add_parser("verify", help="re-check grid entries vs quadrature")
    v.add_argument("--entries", type=int, default=16)
    v.add_argument("--nodes", type=int, default=512)
    return p


def load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_json(json.loads(Path(args.config).read_text()))
    else:
        cfg = ExperimentConfig()
    if args.precision is not None:
        cfg.precision_digits = args.precision
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.out is not None:
        cfg.out_dir = str(args.out)
    if args.exclusion_radius is not None:
        cfg.exclusion_radius = args.exclusion_radius
    if args.override_M is not None:
        cfg.override_M = args.override_M
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = load_config(args)
    for n in cfg.degenerate_sweep_entries():
        print(
            f"note: sweep entry N={n} < d+2 = {cfg.d + 2} is degenerate; "
            "it will be recorded but excluded from slope fits",
            file=sys.stderr,
        )
    if args.command == "generate":
        return cmd_generate(cfg)
    if args.command == "reconstruct":
        return cmd_reconstruct(cfg)
    if args.command == "report":
        return cmd_report(cfg)
    if args.command == "verify":
        return cmd_verify(cfg, entries=args.entries, nodes=args.nodes)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
