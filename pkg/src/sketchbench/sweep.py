"""Experiment harness: repeated sketch-and-approximate trials over a grid of
distributions and sample sizes, with deterministic seeding and aggregation.

All randomness is pre-assigned per (trial, distribution) stream, so results
are byte-identical regardless of the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import algorithms, bounds, distributions, kernels
from .errors import EmptyInput, InvalidParam, SketchBenchError
from .testmatrices import MatrixRecipe


@dataclass
class SweepConfig:
    matrix: MatrixRecipe
    algorithm: str = "rsvd"  # "rsvd" | "nystrom"
    q: int = 1
    k: int = 10
    distributions: list = field(default_factory=list)
    ell_grid: list = field(default_factory=list)
    trials: int = 100
    master_seed: int = 0
    csv_path: str = None
    svg_path: str = None
    bounds: bool = False
    delta: float = 0.1  # failure level for the Gaussian bound check
    truncate_to_k: bool = True  # nystrom only
    log_y: bool = False
    raw: bool = False

    def validate(self):
        if self.algorithm not in ("rsvd", "nystrom"):
            raise InvalidParam(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise InvalidParam("trials must be >= 1")
        if not self.distributions:
            raise InvalidParam("no distributions configured")
        if not self.ell_grid:
            raise InvalidParam("empty ell grid")
        if self.bounds:
            if self.algorithm != "rsvd":
                raise InvalidParam("bound checks require the rsvd algorithm")
            if any(ell < self.k for ell in self.ell_grid):
                raise InvalidParam("bound checks need every ell >= k")


@dataclass(frozen=True)
class SweepRecord:
    distribution_id: int
    distribution: str
    ell: int
    trial: int
    relative_error: float  # nan on failure
    error: str = None
    structural: algorithms.StructuralReport = None

    @property
    def failed(self):
        return self.error is not None


@dataclass(frozen=True)
class AggregateRow:
    distribution: str
    ell: int
    trials: int
    mean_re: float
    std_re: float
    failures: int


@dataclass(frozen=True)
class BoundCheckSummary:
    trials: int
    not_applicable: int
    deterministic_violations: int  # structural bound, must be 0
    chain_violations: int  # covariance chain with eps_cov < 1, must be 0
    gaussian_exceedances: int  # realized T above the explicit Gaussian bound
    gaussian_trials: int


def _prepared_specs(config, A):
    """Attach derived leverage probabilities; resolve per-spec column scale."""
    specs = []
    spectrum = None
    for spec in config.distributions:
        if spec.kind == "leverage_score" and spec.probabilities is None:
            if spectrum is None:
                spectrum = kernels.split_spectrum(A, config.k)
            p = distributions.derive_leverage_probabilities(
                spectrum.Vk, spec.params.get("gamma", 1.0)
            )
            spec = distributions.with_probabilities(spec, p)
        specs.append(spec)
    return specs


def _run_trial(A, config, spec, dist_id, ell, trial):
    seed = distributions.SeedSpec(config.master_seed, trial, dist_id)
    try:
        omega = distributions.sample(spec, A.shape[1], ell, seed)
        if config.algorithm == "rsvd":
            cfg = algorithms.SketchConfig(ell=ell, q=config.q)
            approx = algorithms.randomized_svd(A, omega, cfg)
        else:
            approx = algorithms.nystrom(A, omega)
            if config.truncate_to_k and approx.rank >= config.k:
                approx = algorithms.truncate(approx, config.k)
        re = algorithms.relative_error(A, approx)
        structural = None
        if config.bounds:
            scale = distributions.column_scale(spec, A.shape[1], ell) or 1.0
            structural = algorithms.structural_report(
                A, omega, config.k, config.q, column_scale=scale
            )
        return SweepRecord(dist_id, spec.label(), ell, trial, re, structural=structural)
    except SketchBenchError as exc:
        return SweepRecord(dist_id, spec.label(), ell, trial, float("nan"), error=str(exc))


def run_sweep(config, workers=1):
    """Run every (distribution, ell, trial) cell; returns (records, aggregates).

    Tasks are collected in submission order, so the output is independent of
    the worker schedule.
    """
    config.validate()
    A = config.matrix.build()
    specs = _prepared_specs(config, A)
    tasks = [
        (spec, dist_id, ell, trial)
        for dist_id, spec in enumerate(specs)
        for ell in config.ell_grid
        for trial in range(config.trials)
    ]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(lambda t: _run_trial(A, config, *t), tasks, chunksize=4)
            )
    else:
        records = [_run_trial(A, config, *t) for t in tasks]
    return records, aggregate(records)


def aggregate(records):
    cells = {}
    for rec in records:
        cells.setdefault((rec.distribution_id, rec.distribution, rec.ell), []).append(rec)
    rows = []
    for (dist_id, dist, ell), recs in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][2])):
        ok = [r.relative_error for r in recs if not r.failed]
        failures = len(recs) - len(ok)
        if ok:
            mean = float(np.mean(ok))
            std = float(np.std(ok, ddof=1)) if len(ok) > 1 else 0.0
        else:
            mean = std = float("nan")
        rows.append(AggregateRow(dist, ell, len(recs), mean, std, failures))
    return rows


def run_bound_check(config, workers=1):
    """Per-trial structural reports plus violation counts."""
    config = replace(config, bounds=True)
    records, aggregates = run_sweep(config, workers=workers)
    A = config.matrix.build()
    spectrum = kernels.split_spectrum(A, config.k)
    sr_perp = float(np.sum(spectrum.sigma_perp**2)) / float(spectrum.sigma_perp[0]) ** 2

    not_applicable = det_viol = chain_viol = 0
    g_exceed = g_trials = 0
    for rec in records:
        rep = rec.structural
        if rep is None or rep.bound_holds is None:
            not_applicable += 1
            continue
        if not rep.bound_holds:
            det_viol += 1
        if rep.eps_cov < 1.0:
            cap = rep.sigma_perp_norm**2 * (1.0 + rep.eta) / (1.0 - rep.eps_cov)
            if rep.T * rep.T > cap * (1.0 + 1e-8):
                chain_viol += 1
        if rec.distribution == "gaussian" and rec.ell - config.k >= 4:
            g_trials += 1
            cap = bounds.gauss_bound(
                config.k, rec.ell - config.k, config.delta, rep.sigma_perp_norm, sr_perp
            )
            if rep.T > cap:
                g_exceed += 1
    summary = BoundCheckSummary(
        trials=len(records),
        not_applicable=not_applicable,
        deterministic_violations=det_viol,
        chain_violations=chain_viol,
        gaussian_exceedances=g_exceed,
        gaussian_trials=g_trials,
    )
    return records, aggregates, summary


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return "%.17g" % x
    return str(x)


def emit_csv(aggregates, path):
    if not aggregates:
        raise EmptyInput("no aggregate rows to write")
    lines = ["distribution,ell,trials,mean_re,std_re,failures"]
    for row in aggregates:
        lines.append(
            ",".join(
                [
                    row.distribution,
                    str(row.ell),
                    str(row.trials),
                    _fmt(row.mean_re),
                    _fmt(row.std_re),
                    str(row.failures),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_raw_csv(records, path):
    if not records:
        raise EmptyInput("no records to write")
    lines = ["distribution,ell,trial,relative_error,error"]
    for rec in records:
        lines.append(
            ",".join(
                [
                    rec.distribution,
                    str(rec.ell),
                    str(rec.trial),
                    _fmt(rec.relative_error),
                    (rec.error or "").replace(",", ";"),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_svg(aggregates, path, log_y=False):
    """Line plot per distribution with one-standard-deviation error bars."""
    if not aggregates:
        raise EmptyInput("no aggregate rows to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = {}
    for row in aggregates:
        series.setdefault(row.distribution, []).append(row)
    fig, ax = plt.subplots(figsize=(7, 5))
    for dist, rows in series.items():
        rows = sorted(rows, key=lambda r: r.ell)
        ells = [r.ell for r in rows]
        means = [r.mean_re for r in rows]
        stds = [r.std_re for r in rows]
        ax.errorbar(ells, means, yerr=stds, marker="o", capsize=3, label=dist)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("sample size")
    ax.set_ylabel("relative error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
