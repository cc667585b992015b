"""Experiment sweeps: run solvers over a parameter grid and persist traces.

Each sweep cell (seed, p, beta, eps_sub) produces one CSV with the fixed
header ``iter,r_k,dual_step_norm,inner_iters,cum_inner,objective,wall_ms``.
A JSON manifest written after all cells records the resolved config, the
RNG algorithm, and per-run artifact paths, and suffices to regenerate every
CSV byte-for-byte. Wall-clock timing is inherently non-reproducible, so
persisted CSVs carry a zeroed wall_ms column; measured timings live in the
manifest's metadata instead.
"""

import itertools
import json
import time
import traceback
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .alm import AlmConfig, AlmTrace, OuterRecord, run_alm
from .ppa import PpaConfig, PpaTrace, run_ppa
from .problems import bp_composite, dump_instance, gen_bp, gen_mc, gen_vi_affine, mc_composite

CSV_HEADER = "iter,r_k,dual_step_norm,inner_iters,cum_inner,objective,wall_ms"
RNG_ALGORITHM = "numpy default_rng / PCG64"

KINDS = ("bp", "mc", "vi-affine")

DIM_DEFAULTS = {
    "bp": dict(m=100, n=500, density=0.2),
    "mc": dict(m=50, n=50, density=0.1),
    "vi-affine": dict(m=20, n=20, density=1.0),
}


@dataclass
class ExperimentConfig:
    """One sweep: a problem family and the grid of solver parameters."""

    kind: str
    m: int
    n: int
    density: float
    seeds: list
    p_values: list
    betas: list
    eps_subs: list
    eps: float
    max_outer: int
    max_inner: int
    out_dir: str
    lambda_ppa: float = 1.0
    dump_instances: bool = False

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("seeds", "p_values", "betas", "eps_subs"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.eps < 0 or self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("eps must be nonnegative and iteration caps positive")
        if any(p < 1 for p in self.p_values):
            raise ValueError("every order p must be >= 1")
        if any(b <= 0 for b in self.betas) or any(e <= 0 for e in self.eps_subs):
            raise ValueError("betas and eps_subs must be positive")
        if self.kind != "vi-affine" and self.eps == 0:
            raise ValueError("eps must be positive for ALM runs")


@dataclass
class RunManifest:
    """Resolved sweep description plus per-run artifact bookkeeping."""

    config: dict
    rng_algorithm: str = RNG_ALGORITHM
    runs: list = field(default_factory=list)
    created_utc: str = ""
    total_wall_ms: float = 0.0

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load(path) -> "RunManifest":
        with open(path) as fh:
            raw = json.load(fh)
        return RunManifest(**raw)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_csv(trace, path) -> None:
    """Serialize a solver trace with 17-significant-digit decimals."""
    rows = []
    if isinstance(trace, AlmTrace):
        for rec in trace.records:
            rows.append(
                f"{rec.iteration},{_fmt(rec.primal_residual)},{_fmt(rec.multiplier_step_norm)},"
                f"{rec.inner_iterations},{rec.cumulative_inner},{_fmt(rec.objective)},{_fmt(rec.wall_ms)}"
            )
    elif isinstance(trace, PpaTrace):
        # VI runs have no objective function; that column is written as 0
        cum = 0
        for k, (step, resid, solves, wall) in enumerate(
            zip(trace.step_norms, trace.residual_norms, trace.inner_solves, trace.wall_ms)
        ):
            cum += solves
            rows.append(f"{k},{_fmt(resid)},{_fmt(step)},{solves},{cum},{_fmt(0.0)},{_fmt(wall)}")
    else:
        raise TypeError(f"cannot serialize {type(trace).__name__}")
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")


def read_csv(path) -> list:
    """Parse a trace CSV back into per-iteration records."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    records = []
    for line in lines[1:]:
        it, r_k, step, inner, cum, obj, wall = line.split(",")
        records.append(
            OuterRecord(
                iteration=int(it),
                primal_residual=float(r_k),
                multiplier_step_norm=float(step),
                inner_iterations=int(inner),
                cumulative_inner=int(cum),
                objective=float(obj),
                wall_ms=float(wall),
            )
        )
    return records


def _zero_wall(trace):
    """Copy of the trace with wall times zeroed, for reproducible artifacts."""
    if isinstance(trace, AlmTrace):
        zeroed = AlmTrace(
            records=[replace(rec, wall_ms=0.0) for rec in trace.records],
            status=trace.status,
        )
        return zeroed
    zeroed = PpaTrace(
        step_norms=list(trace.step_norms),
        residual_norms=list(trace.residual_norms),
        inner_solves=list(trace.inner_solves),
        wall_ms=[0.0] * len(trace.wall_ms),
    )
    return zeroed


def _run_id(kind: str, seed, p, beta, eps_sub) -> str:
    if kind == "vi-affine":
        return f"vi_seed{seed}_p{p:g}"
    return f"{kind}_seed{seed}_p{p:g}_beta{beta:g}_esub{eps_sub:g}"


def run_cell(cfg: ExperimentConfig, instance, seed, p, beta, eps_sub):
    """Execute one sweep cell and return its trace."""
    if cfg.kind == "vi-affine":
        op, x0 = instance
        ppa_cfg = PpaConfig(p=p, lambda_ppa=cfg.lambda_ppa, max_iters=cfg.max_outer, step_tol=cfg.eps)
        return run_ppa(op, x0, ppa_cfg)
    prob = bp_composite(instance) if cfg.kind == "bp" else mc_composite(instance)
    alm_cfg = AlmConfig(
        p=p, beta=beta, eps=cfg.eps, eps_sub=eps_sub, max_outer=cfg.max_outer, max_inner=cfg.max_inner
    )
    x0 = np.zeros(prob.a_map.shape[1])
    lam0 = np.zeros(prob.a_map.shape[0])
    return run_alm(prob, x0, lam0, alm_cfg)


def _make_instance(cfg: ExperimentConfig, seed):
    if cfg.kind == "bp":
        return gen_bp(cfg.m, cfg.n, cfg.density, seed)
    if cfg.kind == "mc":
        return gen_mc(cfg.m, cfg.n, cfg.density, seed)
    return gen_vi_affine(cfg.n, seed)


def run_sweep(cfg: ExperimentConfig) -> RunManifest:
    """Run the Cartesian grid of (seed, p, beta, eps_sub) and persist artifacts.

    The instance for a given seed is generated once and shared across all
    parameter combinations so curves are directly comparable. Solver
    failures are recorded per cell and do not abort the sweep.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(config=asdict(cfg))
    sweep_start = time.perf_counter()

    for seed in cfg.seeds:
        instance = _make_instance(cfg, seed)
        if cfg.dump_instances and cfg.kind != "vi-affine":
            dump_instance(instance, out / f"{cfg.kind}_seed{seed}.instance.txt")

        if cfg.kind == "vi-affine":
            grid = [(p, None, None) for p in cfg.p_values]
        else:
            grid = list(itertools.product(cfg.p_values, cfg.betas, cfg.eps_subs))

        for p, beta, eps_sub in grid:
            run_id = _run_id(cfg.kind, seed, p, beta, eps_sub)
            csv_name = f"{run_id}.csv"
            entry = {
                "id": run_id,
                "csv": csv_name,
                "seed": seed,
                "p": p,
                "beta": beta,
                "eps_sub": eps_sub,
            }
            t0 = time.perf_counter()
            try:
                trace = run_cell(cfg, instance, seed, p, beta, eps_sub)
            except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                entry["status"] = f"failed: {exc}"
                entry["error"] = traceback.format_exc(limit=3)
                manifest.runs.append(entry)
                continue
            entry["wall_ms_measured"] = (time.perf_counter() - t0) * 1e3
            if isinstance(trace, AlmTrace):
                entry["status"] = trace.status
                entry["outer_iterations"] = trace.outer_iterations
                entry["final_residual"] = (
                    trace.records[-1].primal_residual if trace.records else 0.0
                )
            else:
                entry["status"] = "ok"
                entry["outer_iterations"] = len(trace.step_norms)
            write_csv(_zero_wall(trace), out / csv_name)
            manifest.runs.append(entry)

    manifest.created_utc = datetime.now(timezone.utc).isoformat()
    manifest.total_wall_ms = (time.perf_counter() - sweep_start) * 1e3
    manifest.save(out / "manifest.json")
    return manifest


def sweep_failed(manifest: RunManifest) -> bool:
    """True when any cell raised or its inner solver stalled.

    Hitting max_outer is a legitimate experimental outcome (a residual
    curve that flattens above the tolerance), not a failure.
    """
    bad = ("failed", "subsolver_stalled")
    return any(str(run.get("status", "")).startswith(bad) for run in manifest.runs)


_PLOT_TEMPLATE = '''"""Render primal-residual curves from the sweep CSVs in this directory."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent

# (panel title, [(csv file, line label), ...])
PANELS = {panels!r}


def load(name):
    iters, residuals = [], []
    with open(HERE / name) as fh:
        for row in csv.DictReader(fh):
            iters.append(int(row["iter"]))
            residuals.append(float(row["r_k"]))
    return iters, residuals


ncols = min(2, len(PANELS))
nrows = (len(PANELS) + ncols - 1) // ncols
fig, axes = plt.subplots(nrows, ncols, figsize=(6 * ncols, 4.5 * nrows), squeeze=False)
for ax, (title, curves) in zip(axes.ravel(), PANELS):
    for name, label in curves:
        iters, residuals = load(name)
        ax.semilogy(iters, residuals, label=label)
    ax.set_title(title)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("primal residual")
    ax.legend()
for ax in axes.ravel()[len(PANELS):]:
    ax.set_visible(False)
fig.tight_layout()
fig.savefig(HERE / "residuals.png", dpi=150)
print(f"wrote {{HERE / 'residuals.png'}}")
'''


def emit_plots(manifest: RunManifest, out_dir=None) -> Path:
    """Write a standalone matplotlib script rendering the sweep's curves.

    One panel per (beta, eps_sub) combination, one line per (p, seed).
    Every successful run's CSV is referenced exactly once.
    """
    out = Path(out_dir if out_dir is not None else manifest.config["out_dir"])
    runs = [r for r in manifest.runs if not str(r.get("status", "")).startswith("failed")]
    missing = [r["csv"] for r in runs if not (out / r["csv"]).exists()]
    if missing:
        raise FileNotFoundError(f"manifest references missing CSVs: {missing}")

    panel_keys = sorted({(r["beta"], r["eps_sub"]) for r in runs}, key=lambda k: (str(k[0]), str(k[1])))
    multi_seed = len({r["seed"] for r in runs}) > 1
    panels = []
    for beta, eps_sub in panel_keys:
        members = [r for r in runs if (r["beta"], r["eps_sub"]) == (beta, eps_sub)]
        members.sort(key=lambda r: (r["p"], r["seed"]))
        if beta is None:
            title = "step residuals"
        else:
            title = f"beta={beta:g}, eps_sub={eps_sub:g}"
        curves = []
        for r in members:
            label = f"p={r['p']:g}" + (f", seed={r['seed']}" if multi_seed else "")
            curves.append((r["csv"], label))
        panels.append((title, curves))

    script = _PLOT_TEMPLATE.format(panels=panels)
    path = out / "plot_residuals.py"
    with open(path, "w") as fh:
        fh.write(script)
    return path
