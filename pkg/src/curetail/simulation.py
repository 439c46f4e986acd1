"""Monte Carlo study of the extrapolated estimators under the mixture cure
design: covariate uniform on [0, 1], logistic incidence, heavy-tailed
susceptible times and uniform censoring with an atom at the endpoint.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CureTailError
from .kernel_beran import KernelSpec, beran_cdf, conditional_subcdf, select_bandwidth
from .models import DEFAULT_BETA, CureModel, draw_susceptible, incidence, tail_index, tau_grid
from .survdata import SurvivalSample, make_sample, max_followup
from .tail import DEFAULT_GRID, TuningPair, estimate_tail, f_hat, limit_targets


@dataclass(frozen=True)
class Scenario:
    family: str
    s: float
    n: int
    seed: int = 0
    reps: int = 100
    x_eval: tuple = (0.5,)
    epsilon: float = 0.1
    beta: tuple = DEFAULT_BETA
    x_ref: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.reps < 1:
            raise ValueError("reps must be positive")

    @property
    def tau_c(self) -> float:
        return tau_grid(self.family, self.x_ref, self.s)

    @property
    def model(self) -> CureModel:
        return CureModel(self.family, self.tau_c, self.epsilon, tuple(self.beta))


@dataclass(frozen=True)
class EstimatorConfig:
    """``bandwidth=None`` selects the rule-of-thumb bandwidth per replication;
    ``tuning=None`` selects ``(y1, y2)`` from ``grid`` per covariate value."""

    bandwidth: Optional[float] = None
    tuning: Optional[TuningPair] = None
    grid: tuple = DEFAULT_GRID
    # extra evaluation times for the extrapolated distribution function
    t_eval: tuple = ()


def rng_for(seed: int, rep_index: int) -> np.random.Generator:
    """Independent stream per replication, identical however reps are scheduled."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep_index,))))


def generate(scenario: Scenario, rep_index: int) -> SurvivalSample:
    """Draw one sample of size ``n``. Cured subjects are always censored."""
    rng = rng_for(scenario.seed, rep_index)
    n, tau_c = scenario.n, scenario.tau_c
    x = rng.random(n)
    cured = rng.random(n) >= incidence(x, scenario.beta)
    y = draw_susceptible(scenario.family, x, 1.0 - rng.random(n))
    atom = rng.random(n) < scenario.epsilon
    c = np.where(atom, tau_c, rng.random(n) * tau_c)
    y = np.where(cured, np.inf, y)
    status = (y <= c).astype(np.int8)
    return make_sample(np.minimum(y, c), status, x)


@dataclass
class Replication:
    rep: int
    bandwidth: float
    tau_n: float
    # per x_eval, NaN on failure
    p_hat: np.ndarray
    p_beran: np.ndarray
    gamma: np.ndarray
    gamma_raw: np.ndarray
    f_hat: np.ndarray
    failed: np.ndarray


def replicate(scenario: Scenario, config: EstimatorConfig, rep: int) -> Replication:
    sample = generate(scenario, rep)
    h = config.bandwidth if config.bandwidth is not None else select_bandwidth(sample)
    kernel = KernelSpec(h)
    tau_n = max_followup(sample)
    m, k = len(scenario.x_eval), len(config.t_eval)
    out = {name: np.full(m, np.nan) for name in ("p_hat", "p_beran", "gamma", "gamma_raw")}
    f_out = np.full((m, k), np.nan)
    failed = np.zeros(m, dtype=bool)
    for i, x in enumerate(scenario.x_eval):
        try:
            curve = beran_cdf(sample, x, kernel)
            est = estimate_tail(curve, tau_n, config.tuning, config.grid)
        except CureTailError:
            failed[i] = True
            continue
        out["p_hat"][i] = est.p_hat
        out["p_beran"][i] = est.beran_at_tau
        out["gamma"][i] = est.gamma
        if est.gamma_raw is not None:
            out["gamma_raw"][i] = est.gamma_raw
        if k:
            f_out[i] = f_hat(curve, tau_n, est, np.asarray(config.t_eval))
    return Replication(rep, h, tau_n, out["p_hat"], out["p_beran"], out["gamma"],
                       out["gamma_raw"], f_out, failed)


def _run_chunk(args):
    scenario, config, reps = args
    return [replicate(scenario, config, r) for r in reps]


def run_replications(scenario: Scenario, config: EstimatorConfig = EstimatorConfig(),
                     workers: int = 1) -> list[Replication]:
    """All replications, ordered by replication index."""
    reps = list(range(scenario.reps))
    if workers <= 1 or len(reps) <= 1:
        return _run_chunk((scenario, config, reps))
    chunks = [reps[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        results = [r for part in pool.map(_run_chunk, [(scenario, config, c) for c in chunks])
                   for r in part]
    return sorted(results, key=lambda r: r.rep)


@dataclass(frozen=True)
class McSummary:
    """Monte Carlo aggregates at one covariate value."""

    x: float
    s: float
    tau_c: float
    p_true: float
    gamma_true: float
    mean_p_hat: float
    median_p_hat: float
    mse_p_hat: float
    mean_p_beran: float
    median_p_beran: float
    mse_p_beran: float
    mean_gamma_hat: float
    median_gamma_hat: float
    failures: int
    invalid_gamma: int
    p_limit: float = math.nan
    gamma_limit: float = math.nan
    # variances of sqrt(n h) (estimator - limit target); fixed tuning only
    scaled_var_p: float = math.nan
    scaled_var_gamma: float = math.nan
    mean_bandwidth: float = math.nan


def _mean(v):
    # numpy reductions over contiguous float arrays use pairwise summation
    return float(np.mean(v)) if len(v) else math.nan


def _median(v):
    return float(np.median(v)) if len(v) else math.nan


def summarize(scenario: Scenario, config: EstimatorConfig, reps: Sequence[Replication]) -> list[McSummary]:
    reps = sorted(reps, key=lambda r: r.rep)
    tau_c = scenario.tau_c
    model = scenario.model
    hs = np.array([r.bandwidth for r in reps])
    out = []
    for i, x in enumerate(scenario.x_eval):
        ok = np.array([not r.failed[i] for r in reps], dtype=bool)
        p_hat = np.array([r.p_hat[i] for r in reps])[ok]
        p_ber = np.array([r.p_beran[i] for r in reps])[ok]
        gam = np.array([r.gamma[i] for r in reps])[ok]
        graw = np.array([r.gamma_raw[i] for r in reps])[ok]
        p_true, g_true = incidence(x, scenario.beta), tail_index(x)
        extra = {}
        if config.tuning is not None:
            try:
                lim = limit_targets(model, x, tau_c, config.tuning)
            except CureTailError:
                lim = None
            if lim is not None:
                scale = np.sqrt(scenario.n * hs[ok])
                valid = np.isfinite(graw)
                extra = dict(
                    p_limit=lim.p_limit,
                    gamma_limit=lim.gamma_limit,
                    scaled_var_p=float(np.var(scale * (p_hat - lim.p_limit), ddof=1)) if len(p_hat) > 1 else math.nan,
                    scaled_var_gamma=float(np.var((scale * (graw - lim.gamma_limit))[valid], ddof=1))
                    if valid.sum() > 1 else math.nan,
                )
        out.append(McSummary(
            x=float(x), s=scenario.s, tau_c=tau_c, p_true=p_true, gamma_true=g_true,
            mean_p_hat=_mean(p_hat), median_p_hat=_median(p_hat),
            mse_p_hat=_mean((p_hat - p_true) ** 2),
            mean_p_beran=_mean(p_ber), median_p_beran=_median(p_ber),
            mse_p_beran=_mean((p_ber - p_true) ** 2),
            mean_gamma_hat=_mean(gam), median_gamma_hat=_median(gam),
            failures=int((~ok).sum()), invalid_gamma=int((~np.isfinite(graw)).sum()),
            mean_bandwidth=_mean(hs),
            **extra,
        ))
    return out


def run_study(scenario: Scenario, config: EstimatorConfig = EstimatorConfig(),
              workers: int = 1) -> list[McSummary]:
    """Replicate, estimate and aggregate; one summary per ``x_eval`` entry."""
    return summarize(scenario, config, run_replications(scenario, config, workers))


def observed_cdf_sup_error(sample: SurvivalSample, model: CureModel, x: float,
                           kernel: KernelSpec) -> float:
    """``sup_t |H_n(t|x) - H(t|x)|``, checked on both sides of every jump."""
    curve = conditional_subcdf(sample, x, kernel)
    t = curve.jump_times
    left = np.concatenate(([0.0], curve.values[:-1]))
    h_right = model.observed_cdf(t, x)
    h_left = model.observed_cdf_left(t, x)
    return float(max(np.max(np.abs(curve.values - h_right)), np.max(np.abs(left - h_left))))
