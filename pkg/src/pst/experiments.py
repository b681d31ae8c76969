"""Monte-Carlo harness for the detection, success-rate and comparison studies.

Run ``k`` of every experiment draws its data from seed ``config.seed + k``,
and results are aggregated in run order, so outputs do not depend on the
number of worker processes.
"""

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, detection, model
from .baselines import BaselineConfig, lrpr_altmin, wf_columns
from .exceptions import DegenerateDirectionError, InvalidConfigError, InvalidDimensionError
from .io import write_csv
from .metrics import subspace_error
from .pstpca import refine_with_lrpr, run_pst_pca

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "RocResult",
    "ComparisonResult",
    "load_config",
    "run_roc_experiment",
    "run_success_table",
    "run_comparison",
]


@dataclass
class ExperimentConfig:
    """Settings shared by all three experiments.

    ``m_grid``, ``q_grid`` and ``se0_grid`` define the success-table cells and
    default to the single values ``m``, ``q`` and ``se0_target``.
    """

    n: int = 200
    r: int = 5
    m: int = 300
    q: int = 300
    theta_degrees: list = field(default_factory=lambda: [30.0, 45.0, 60.0, 75.0])
    se0_target: float = 1e-4
    runs: int = 50
    seed: int = 0
    c_grid: dict = field(default_factory=lambda: {"min": 0.0, "max": 3.0, "count": 301})
    t_max_pstpca: int = 12
    lrpr_refine_iters: int = 3
    lrpr_iters: int = 15
    wf_iters: int = 200
    wf_step: float = 0.2
    success_factor: float = 1.5
    delta_tol: float = 1e-9
    lambda_bar: list | None = None
    m_grid: list | None = None
    q_grid: list | None = None
    se0_grid: list | None = None
    output_dir: str = "results"

    def __post_init__(self):
        for name in ("n", "r", "m", "q"):
            if int(getattr(self, name)) < 1:
                raise InvalidConfigError(f"{name} must be a positive integer")
        if self.r > self.n:
            raise InvalidConfigError("r must not exceed n")
        if self.runs < 1:
            raise InvalidConfigError("runs must be at least 1")
        if not self.theta_degrees:
            raise InvalidConfigError("theta_degrees must be non-empty")
        if any(not (0 <= t <= 90) for t in self.theta_degrees):
            raise InvalidConfigError("angles must lie in [0, 90] degrees")
        if not (0 <= self.se0_target < 1):
            raise InvalidConfigError("se0_target must lie in [0, 1)")
        unknown = set(self.c_grid) - {"min", "max", "count"}
        if unknown or set(self.c_grid) != {"min", "max", "count"}:
            raise InvalidConfigError("c_grid needs exactly the keys min, max, count")
        if self.c_grid["min"] < 0 or self.c_grid["max"] < self.c_grid["min"]:
            raise InvalidConfigError("c_grid must satisfy 0 <= min <= max")
        if int(self.c_grid["count"]) < 1:
            raise InvalidConfigError("c_grid count must be positive")
        if self.lambda_bar is not None:
            if len(self.lambda_bar) != self.r or any(v <= 0 for v in self.lambda_bar):
                raise InvalidConfigError("lambda_bar must hold r positive variances")
        for name in ("t_max_pstpca", "lrpr_refine_iters", "lrpr_iters", "wf_iters"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be non-negative")
        if self.wf_step <= 0 or self.success_factor <= 0:
            raise InvalidConfigError("wf_step and success_factor must be positive")

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {unknown}")
        return cls(**d)

    def to_dict(self):
        return dataclasses.asdict(self)

    def c_values(self):
        g = self.c_grid
        return np.linspace(g["min"], g["max"], int(g["count"]))

    def cells(self):
        ms = self.m_grid or [self.m]
        qs = self.q_grid or [self.q]
        ses = self.se0_grid or [self.se0_target]
        return [(m, q, s) for s in ses for q in qs for m in ms]


def load_config(path, **overrides):
    with open(path) as f:
        d = json.load(f)
    if not isinstance(d, dict):
        raise InvalidConfigError("config file must contain a JSON object")
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def _map_runs(fn, args, threads):
    if threads <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*args)))


def _theta_label(theta):
    return format(float(theta), "g")


def _metadata(config, started, **extra):
    meta = {
        "config": config.to_dict(),
        "version": __version__,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    meta.update(extra)
    return meta


def _write_meta(path, meta):
    with open(path, "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass
class RocResult:
    points: dict
    auc: dict
    paths: dict
    stats_changed: dict
    stats_unchanged: list


def _setup(config, theta_deg):
    lam = None if config.lambda_bar is None else tuple(config.lambda_bar)
    return detection.DetectionSetup(
        n=config.n, r=config.r, m=config.m, q=config.q,
        theta=float(np.deg2rad(theta_deg)), se0=config.se0_target, lambda_bar=lam,
    )


def run_roc_experiment(config, threads=1, write=True):
    """Detection ROC for each angle; writes ``roc_theta<deg>.csv`` (c, fpr, tpr)."""
    started = time.perf_counter()
    seeds = [config.seed + k for k in range(config.runs)]
    unchanged = _map_runs(detection.draw_statistic,
                          [(_setup(config, 0.0), s) for s in seeds], threads)
    c_grid = config.c_values()
    result = RocResult({}, {}, {}, {}, unchanged)
    if write:
        os.makedirs(config.output_dir, exist_ok=True)
    for theta in config.theta_degrees:
        changed = _map_runs(detection.draw_statistic,
                            [(_setup(config, theta), s) for s in seeds], threads)
        points = detection.roc_from_statistics(changed, unchanged, c_grid)
        label = _theta_label(theta)
        result.points[theta] = points
        result.auc[theta] = detection.auc(points)
        result.stats_changed[theta] = changed
        if write:
            path = os.path.join(config.output_dir, f"roc_theta{label}.csv")
            write_csv(path, ["c", "fpr", "tpr"],
                      [(p.c, p.false_positive_rate, p.true_positive_rate) for p in points])
            result.paths[theta] = path
    if write:
        _write_meta(os.path.join(config.output_dir, "roc.meta.json"), _metadata(
            config, started, auc={_theta_label(t): a for t, a in result.auc.items()}))
    return result


@dataclass
class ResultTable:
    rows: list
    metadata: dict
    path: str | None = None

    def probability(self, m, q, se0):
        for row in self.rows:
            if (row["m"], row["q"], row["se0"]) == (m, q, se0):
                return row["success_prob"]
        raise KeyError((m, q, se0))


def _success_run(config, m, q, se0, seed):
    rng = np.random.default_rng(seed)
    try:
        draw = model.draw_change(config.n, config.r, m, q,
                                 np.deg2rad(config.theta_degrees[0]),
                                 config.lambda_bar, rng)
        u0_hat = model.perturb_subspace(draw.u_prev, se0, rng)
        threshold = config.success_factor * subspace_error(u0_hat, draw.u_prev)
        result = run_pst_pca(draw.episode, u0_hat, config.t_max_pstpca,
                             delta_tol=config.delta_tol, success_se=threshold, track=False)
        return subspace_error(result.u_hat, draw.episode.u_true) < threshold
    except (InvalidDimensionError, DegenerateDirectionError, np.linalg.LinAlgError):
        return False


def run_success_table(config, threads=1, write=True):
    """Fraction of runs where PST-PCA reaches ``success_factor`` x the prior error."""
    started = time.perf_counter()
    rows = []
    for m, q, se0 in config.cells():
        outcomes = _map_runs(_success_run,
                             [(config, m, q, se0, config.seed + k) for k in range(config.runs)],
                             threads)
        rows.append({"m": m, "q": q, "se0": se0,
                     "success_prob": sum(outcomes) / len(outcomes), "runs": len(outcomes)})
    table = ResultTable(rows, _metadata(config, started))
    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        table.path = os.path.join(config.output_dir, "success_table.csv")
        write_csv(table.path, ["m", "q", "se0", "success_prob", "runs"],
                  [(r["m"], r["q"], r["se0"], r["success_prob"], r["runs"]) for r in rows])
        _write_meta(os.path.join(config.output_dir, "success_table.meta.json"), table.metadata)
    return table


@dataclass
class ComparisonResult:
    traces: dict
    finals: dict
    paths: dict = field(default_factory=dict)


ALGORITHMS = ("pst_pca_lrpr", "lrpr_altmin", "wf")


def _pad(trace, length):
    trace = list(trace)
    while len(trace) < length:
        last = trace[-1]
        trace.append(dataclasses.replace(last, iteration=last.iteration + 1))
    return trace


def _comparison_run(config, seed):
    rng = np.random.default_rng(seed)
    draw = model.draw_change(config.n, config.r, config.m, config.q,
                             np.deg2rad(config.theta_degrees[0]), config.lambda_bar, rng)
    episode = draw.episode
    u0_hat = model.perturb_subspace(draw.u_prev, config.se0_target, rng)

    pst = run_pst_pca(episode, u0_hat, config.t_max_pstpca, delta_tol=config.delta_tol)
    pst_trace = _pad(pst.trace, config.t_max_pstpca + 1)
    combined = pst_trace
    if config.lrpr_refine_iters > 0:
        refined = refine_with_lrpr(pst, episode, config.lrpr_refine_iters)
        offset_s = pst_trace[-1].seconds
        offset_i = pst_trace[-1].iteration
        combined = pst_trace + [
            dataclasses.replace(e, iteration=e.iteration + offset_i,
                                seconds=e.seconds + offset_s)
            for e in refined.trace[1:]
        ]

    lrpr = lrpr_altmin(episode, config.r, BaselineConfig(max_iters=config.lrpr_iters))
    wf = wf_columns(episode, config.r,
                    BaselineConfig(max_iters=config.wf_iters, step_size=config.wf_step))
    return {"pst_pca_lrpr": combined, "lrpr_altmin": lrpr.trace, "wf": wf.trace}


def run_comparison(config, threads=1, write=True):
    """Error-versus-iteration traces of PST-PCA + refinement, LRPR-AltMin and WF.

    Traces are averaged (mean) over runs at each iteration. Writes
    ``trace_<algorithm>.csv`` with columns algorithm, iteration, seconds_mean,
    norm_err_mean, se_mean.
    """
    started = time.perf_counter()
    per_run = _map_runs(_comparison_run,
                        [(config, config.seed + k) for k in range(config.runs)], threads)
    traces, finals = {}, {}
    for alg in ALGORITHMS:
        runs = [r[alg] for r in per_run]
        length = min(len(t) for t in runs)
        rows = []
        for i in range(length):
            rows.append((
                alg, runs[0][i].iteration,
                float(np.mean([t[i].seconds for t in runs])),
                float(np.mean([t[i].norm_err for t in runs])),
                float(np.mean([t[i].se for t in runs])),
            ))
        traces[alg] = rows
        finals[alg] = [t[length - 1].norm_err for t in runs]
    result = ComparisonResult(traces, finals)
    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        for alg, rows in traces.items():
            path = os.path.join(config.output_dir, f"trace_{alg}.csv")
            write_csv(path, ["algorithm", "iteration", "seconds_mean",
                             "norm_err_mean", "se_mean"], rows)
            result.paths[alg] = path
        _write_meta(os.path.join(config.output_dir, "comparison.meta.json"),
                    _metadata(config, started, averaging="mean over runs per iteration",
                              final_norm_err=finals))
    return result
