"""Scoring and seeded benchmark experiments.

Every experiment is a pure function of its parameters and a seed; trial
seeds are derived through ``numpy.random.SeedSequence`` so reports are
bit-identical across repeated invocations and safe to parallelize by trial.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .bnmodel import Dataset, DiscreteBayesNet, forward_sample
from .citest import (
    ContingencyTable,
    TestConfig,
    _bf_chi2_statistic,
    _g_statistic,
    bf_chi2_test,
    g_test,
    log_bayes_factor,
    mi_eb,
    mi_mle,
    solve_theta_tilde,
)
from .discovery import learn_cpdag
from .graphs import Cpdag, dag_to_cpdag
from .numstat import chi2_sf, log_polya


# ---------------------------------------------------------------------------
# Scoring


def shd(learned: Cpdag, truth: Cpdag) -> int:
    """Structural Hamming distance between two partially directed graphs.

    Each node pair contributes one unit for an extra or missing adjacency,
    or for an adjacency whose orientation status differs (directed versus
    undirected, or opposite directions).
    """
    if set(learned.nodes) != set(truth.nodes):
        raise ValueError("graphs must share one node set")
    distance = 0
    for u, v in itertools.combinations(sorted(learned.nodes), 2):
        if learned.edge_mark(u, v) != truth.edge_mark(u, v):
            distance += 1
    return distance


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class ReportRow:
    size: int
    method: str
    metric_mean: float
    metric_std: float
    runs: int
    ci_tests_mean: float = 0.0


@dataclass
class BenchmarkReport:
    experiment: str
    seed: int
    configs: list[ReportRow] = field(default_factory=list)

    def row(self, size: int, method: str) -> ReportRow:
        for r in self.configs:
            if r.size == size and r.method == method:
                return r
        raise KeyError(f"no row for size={size}, method={method!r}")

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "seed": self.seed,
            "configs": [asdict(r) for r in self.configs],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BenchmarkReport":
        payload = json.loads(text)
        return cls(experiment=payload["experiment"], seed=payload["seed"],
                   configs=[ReportRow(**r) for r in payload["configs"]])


def _mean_std(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0.0, 0.0
    return float(arr.mean()), float(arr.std())


def _child_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


# ---------------------------------------------------------------------------
# Synthetic pairs


@dataclass(frozen=True)
class SyntheticPairSpec:
    """Recipe for one two-variable dataset with a known joint."""

    kx: int
    ky: int
    dependent: bool
    n: int
    gen_alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kx < 2 or self.ky < 2:
            raise ValueError("cardinalities must be at least 2")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.gen_alpha <= 0:
            raise ValueError("gen_alpha must be positive")


def _random_joint(rng: np.random.Generator, kx: int, ky: int,
                  dependent: bool, gen_alpha: float) -> np.ndarray:
    if dependent:
        return rng.dirichlet(np.full(kx * ky, gen_alpha)).reshape(kx, ky)
    theta_x = rng.dirichlet(np.full(kx, gen_alpha))
    theta_y = rng.dirichlet(np.full(ky, gen_alpha))
    return np.outer(theta_x, theta_y)


def true_mi(joint: np.ndarray) -> float:
    """Exact plug-in mutual information of a known joint distribution."""
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / np.outer(px, py)[mask]
    return float(np.sum(joint[mask] * np.log(ratio)))


def _sample_table(rng: np.random.Generator, joint: np.ndarray,
                  n: int) -> ContingencyTable:
    flat = rng.multinomial(n, joint.ravel())
    return ContingencyTable(flat.reshape(joint.shape))


def gen_synthetic_pair(spec: SyntheticPairSpec) -> tuple[Dataset, bool, float]:
    """Dataset of two columns plus the ground truth: whether the pair is
    independent and its exact mutual information."""
    rng = np.random.default_rng(spec.seed)
    joint = _random_joint(rng, spec.kx, spec.ky, spec.dependent, spec.gen_alpha)
    mi = 0.0 if not spec.dependent else true_mi(joint)
    codes = np.searchsorted(np.cumsum(joint.ravel()),
                            rng.random(spec.n)).astype(np.int64)
    codes = np.minimum(codes, spec.kx * spec.ky - 1)
    rows = np.column_stack([codes // spec.ky, codes % spec.ky])
    dataset = Dataset(names=("X", "Y"), cards=(spec.kx, spec.ky),
                      rows=rows, seed=spec.seed)
    return dataset, (not spec.dependent), mi


# ---------------------------------------------------------------------------
# Monte-Carlo oracle for the EB mutual information


def mc_mi_posterior_oracle(table: ContingencyTable, alpha: float,
                           draws: int = 100_000, seed: int = 0,
                           ) -> tuple[float, float]:
    """Posterior-expected plug-in MI by direct sampling.

    Draws joint parameters from Dirichlet(counts + alpha) over the cells,
    evaluates the plug-in MI of each draw, and returns the Monte-Carlo mean
    and its standard error. This is the reference the closed form is
    validated against.
    """
    if draws < 10_000:
        raise ValueError("use at least 10^4 draws")
    rng = np.random.default_rng(seed)
    params = table.counts.ravel() + alpha
    kx, ky = table.kx, table.ky
    total = 0.0
    total_sq = 0.0
    remaining = draws
    while remaining:
        batch = min(remaining, 200_000)
        theta = rng.dirichlet(params, size=batch).reshape(batch, kx, ky)
        px = theta.sum(axis=2)
        py = theta.sum(axis=1)
        mi = np.einsum("bij,bij->b", theta,
                       np.log(theta) - np.log(px)[:, :, None]
                       - np.log(py)[:, None, :])
        total += float(mi.sum())
        total_sq += float((mi * mi).sum())
        remaining -= batch
    mean = total / draws
    var = max(total_sq / draws - mean * mean, 0.0)
    return mean, math.sqrt(var / draws)


# ---------------------------------------------------------------------------
# MI estimation error


def _mi_estimate(table: ContingencyTable, method: str) -> float:
    if method == "mi_mle":
        return mi_mle(table)
    if method == "mi_eb_map":
        return mi_eb(table)
    if method == "mi_eb_fixed":
        return mi_eb(table, alpha=1.0)
    if method.startswith("mi_eb_fixed:"):
        return mi_eb(table, alpha=float(method.split(":", 1)[1]))
    raise ValueError(f"unknown MI method {method!r}")


def run_mi_error_bench(sizes: Sequence[int], trials: int,
                       methods: Sequence[str], seed: int,
                       kx: int = 3, ky: int = 3,
                       gen_alpha: float = 1.0) -> BenchmarkReport:
    """Mean absolute MI-estimation error on fresh synthetic pairs.

    Every method scores the same tables, so column comparisons are paired.
    Trials alternate between dependent and independent pairs.
    """
    report = BenchmarkReport("mi_error", seed)
    for si, size in enumerate(sizes):
        errors: dict[str, list[float]] = {m: [] for m in methods}
        for t in range(trials):
            rng = _child_rng(seed, si, t)
            dependent = t % 2 == 0
            joint = _random_joint(rng, kx, ky, dependent, gen_alpha)
            target = true_mi(joint) if dependent else 0.0
            table = _sample_table(rng, joint, size)
            for m in methods:
                errors[m].append(abs(_mi_estimate(table, m) - target))
        for m in methods:
            mean, std = _mean_std(errors[m])
            report.configs.append(ReportRow(size, m, mean, std, trials))
    return report


# ---------------------------------------------------------------------------
# Type-1 error and power


def _reject_statistic(table: ContingencyTable, method: str,
                      config: TestConfig) -> tuple[float, bool]:
    """Statistic oriented so that larger means stronger rejection, plus the
    default-rule verdict."""
    if method == "g":
        d = g_test(table, config)
        return d.statistic, not d.independent
    if method == "bf_chi2":
        d = bf_chi2_test(table, config)
        return d.statistic, not d.independent
    if method == "bf_threshold":
        log_bf = log_bayes_factor(table, config)
        return -log_bf, log_bf <= math.log(config.bf_threshold)
    if method == "always_independent":
        return 0.0, False
    raise ValueError(f"unknown test method {method!r}")


def run_type1_power_bench(sizes: Sequence[int], trials: int,
                          methods: Sequence[str], seed: int,
                          kx: int = 3, ky: int = 3, gen_alpha: float = 1.0,
                          config: TestConfig | None = None) -> BenchmarkReport:
    """Rejection rates under true and false null hypotheses.

    For every method the report carries four rows per size:

    * ``<m>:type1`` / ``<m>:power`` -- the method's default decision rule;
    * ``<m>:type1_matched`` / ``<m>:power_matched`` -- rejection past a
      critical value placed at the (1 - significance) null quantile on a
      calibration half of the null trials, which puts every method at the
      same Type-1 level before powers are compared.
    """
    if config is None:
        config = TestConfig()
    target = config.significance
    report = BenchmarkReport("type1_power", seed)
    for si, size in enumerate(sizes):
        null_tables = []
        dep_tables = []
        for t in range(trials):
            rng = _child_rng(seed, si, t, 0)
            null_tables.append(_sample_table(
                rng, _random_joint(rng, kx, ky, False, gen_alpha), size))
            rng = _child_rng(seed, si, t, 1)
            dep_tables.append(_sample_table(
                rng, _random_joint(rng, kx, ky, True, gen_alpha), size))
        for m in methods:
            null_stats = np.empty(trials)
            null_reject = np.empty(trials, dtype=bool)
            for t, table in enumerate(null_tables):
                null_stats[t], null_reject[t] = _reject_statistic(table, m, config)
            dep_stats = np.empty(trials)
            dep_reject = np.empty(trials, dtype=bool)
            for t, table in enumerate(dep_tables):
                dep_stats[t], dep_reject[t] = _reject_statistic(table, m, config)

            half = trials // 2
            critical = float(np.quantile(null_stats[:half], 1.0 - target)) \
                if half else math.inf
            type1_matched = null_stats[half:] > critical
            power_matched = dep_stats > critical

            for tag, values in (
                    ("type1", null_reject), ("power", dep_reject),
                    ("type1_matched", type1_matched),
                    ("power_matched", power_matched)):
                mean, std = _mean_std(values.astype(float))
                report.configs.append(
                    ReportRow(size, f"{m}:{tag}", mean, std, len(values)))
    return report


# ---------------------------------------------------------------------------
# Estimator variance


@dataclass
class VarianceReport:
    """Empirical and analytic per-state variance of the frequency estimator
    n_i/N and the smoothed estimator (n_i + alpha)/(N + K alpha)."""

    theta: tuple[float, ...]
    n: int
    trials: int
    alpha: float
    seed: int
    mle_var: tuple[float, ...]
    bayes_var: tuple[float, ...]
    mle_var_analytic: tuple[float, ...]
    bayes_var_analytic: tuple[float, ...]

    def to_benchmark_report(self) -> BenchmarkReport:
        report = BenchmarkReport("variance", self.seed)
        series = {
            "mle": self.mle_var,
            "bayes": self.bayes_var,
            "mle_analytic": self.mle_var_analytic,
            "bayes_analytic": self.bayes_var_analytic,
        }
        for label, values in series.items():
            for i, v in enumerate(values):
                report.configs.append(
                    ReportRow(self.n, f"{label}:state{i}", v, 0.0, self.trials))
        return report


def run_variance_bench(theta: Sequence[float], n: int, trials: int,
                       alpha: float, seed: int) -> VarianceReport:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or abs(theta.sum() - 1.0) > 1e-9 or np.any(theta < 0):
        raise ValueError("theta must be a probability vector")
    if n < 1 or trials < 1 or alpha <= 0:
        raise ValueError("n and trials must be positive, alpha > 0")
    k = theta.size
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, theta, size=trials).astype(np.float64)
    mle = counts / n
    bayes = (counts + alpha) / (n + k * alpha)
    analytic = n * theta * (1.0 - theta)
    return VarianceReport(
        theta=tuple(float(v) for v in theta),
        n=n, trials=trials, alpha=float(alpha), seed=seed,
        mle_var=tuple(float(v) for v in mle.var(axis=0)),
        bayes_var=tuple(float(v) for v in bayes.var(axis=0)),
        mle_var_analytic=tuple(float(v) for v in analytic / n ** 2),
        bayes_var_analytic=tuple(float(v) for v in analytic / (n + k * alpha) ** 2),
    )


# ---------------------------------------------------------------------------
# Quality of the multinomial approximation to the Polya likelihood


def polya_approx_rel_error(counts: Sequence[int], alpha: float) -> float:
    """Relative error |p - p_tilde| / p between the exact Polya probability
    of a count vector and its fitted-multinomial approximation."""
    counts = np.asarray(counts, dtype=np.int64)
    exact = log_polya(counts, alpha)
    theta = solve_theta_tilde(counts, alpha).values
    n = int(counts.sum())
    approx = (gammaln(n + 1.0) - float(gammaln(counts + 1.0).sum())
              + float(np.sum(counts * np.log(theta))))
    return abs(1.0 - math.exp(approx - exact))


def run_polya_approx_bench(count_specs: Sequence[SyntheticPairSpec],
                           alphas: Sequence[float], trials: int,
                           seed: int) -> BenchmarkReport:
    """Mean relative approximation error of the fitted multinomial against
    the exact Polya probability, on joint counts of synthetic pairs."""
    report = BenchmarkReport("polya_approx", seed)
    for si, spec in enumerate(count_specs):
        for alpha in alphas:
            errors = []
            for t in range(trials):
                rng = _child_rng(seed, si, t)
                joint = _random_joint(rng, spec.kx, spec.ky, spec.dependent,
                                      spec.gen_alpha)
                table = _sample_table(rng, joint, spec.n)
                errors.append(polya_approx_rel_error(table.counts.ravel(), alpha))
            mean, std = _mean_std(errors)
            tag = "dep" if spec.dependent else "ind"
            report.configs.append(ReportRow(
                spec.n, f"{tag}:alpha={alpha:g}", mean, std, trials))
    return report


# ---------------------------------------------------------------------------
# Null distribution of the statistics


@dataclass
class StatDistReport:
    """Empirical null behavior of the G and BF-chi2 statistics against
    their chi-squared reference."""

    k: int
    n: int
    trials: int
    df: int
    alpha_policy: str
    seed: int
    sup_distance_g: float
    sup_distance_bf_chi2: float
    mean_g: float
    mean_bf_chi2: float

    def to_benchmark_report(self) -> BenchmarkReport:
        report = BenchmarkReport("stat_dist", self.seed)
        rows = {
            "g:sup_distance": self.sup_distance_g,
            "bf_chi2:sup_distance": self.sup_distance_bf_chi2,
            "g:mean": self.mean_g,
            "bf_chi2:mean": self.mean_bf_chi2,
        }
        for method, value in rows.items():
            report.configs.append(
                ReportRow(self.n, method, value, 0.0, self.trials))
        return report


def _config_kwargs(config: TestConfig) -> dict:
    from dataclasses import fields as _fields
    return {f.name: getattr(config, f.name) for f in _fields(TestConfig)}


def _ks_distance(stats: np.ndarray, df: int) -> float:
    """One-sample sup distance between the empirical CDF and chi-squared."""
    stats = np.sort(stats)
    cdf = 1.0 - np.array([chi2_sf(float(s), df) for s in stats])
    n = stats.size
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def run_statistic_distribution_bench(k: int, n: int, trials: int,
                                     alpha_policy: str = "prior",
                                     seed: int = 0,
                                     gen_alpha: float = 1.0,
                                     config: TestConfig | None = None
                                     ) -> StatDistReport:
    """Sample the G and BF-chi2 statistics under a true null and measure the
    sup distance of their empirical CDFs from chi-squared((k-1)^2).

    ``alpha_policy`` selects the concentrations used by BF-chi2: ``"prior"``
    uses the configured priors (the test's default behavior), ``"map"``
    fits them per table, ``"fixed:<value>"`` pins them.
    """
    if trials < 2000:
        raise ValueError("at least 2000 trials are required")
    if config is None:
        config = TestConfig()
    override: float | None = None
    if alpha_policy == "map":
        config = TestConfig(**{**_config_kwargs(config), "bf_chi2_map_alpha": True})
    elif alpha_policy.startswith("fixed:"):
        override = float(alpha_policy.split(":", 1)[1])
    elif alpha_policy != "prior":
        raise ValueError("alpha_policy must be 'prior', 'map' or 'fixed:<value>'")

    g_stats = np.empty(trials)
    bf_stats = np.empty(trials)
    for t in range(trials):
        rng = _child_rng(seed, t)
        table = _sample_table(rng, _random_joint(rng, k, k, False, gen_alpha), n)
        g_stats[t] = max(_g_statistic(table), 0.0)
        bf_stats[t] = _bf_chi2_statistic(table, config, alpha_override=override)

    df = (k - 1) ** 2
    return StatDistReport(
        k=k, n=n, trials=trials, df=df, alpha_policy=alpha_policy, seed=seed,
        sup_distance_g=_ks_distance(g_stats, df),
        sup_distance_bf_chi2=_ks_distance(bf_stats, df),
        mean_g=float(g_stats.mean()),
        mean_bf_chi2=float(bf_stats.mean()),
    )


# ---------------------------------------------------------------------------
# End-to-end discovery benchmark


def run_discovery_bench(net: DiscreteBayesNet, sizes: Sequence[int],
                        runs: int, methods: Sequence[str],
                        config: TestConfig | None = None,
                        seed: int = 0) -> BenchmarkReport:
    """Sample, learn, score: SHD against the true equivalence class plus
    CI-test counts, averaged over seeded runs. All methods see the same
    datasets at a given (size, run)."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if config is None:
        config = TestConfig()
    truth = net.dag()
    truth_cpdag = dag_to_cpdag(truth)
    report = BenchmarkReport("discovery", seed)
    for si, size in enumerate(sizes):
        datasets = [forward_sample(net, size, _child_rng(seed, si, r))
                    for r in range(runs)]
        for method in methods:
            shds = []
            counts = []
            for dataset in datasets:
                cpdag, stats = learn_cpdag(dataset, method, config, truth=truth)
                shds.append(shd(cpdag, truth_cpdag))
                counts.append(stats.ci_test_count)
            mean, std = _mean_std(shds)
            report.configs.append(ReportRow(
                size, method, mean, std, runs,
                ci_tests_mean=float(np.mean(counts))))
    return report
