"""Kernel weights and the covariate-localized product-limit (Beran) estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCovariate, NoMass
from .survdata import SurvivalSample

EPANECHNIKOV = "epanechnikov"
# squared L2 norm of the Epanechnikov kernel, int K(u)^2 du
EPANECHNIKOV_L2 = 3.0 / 5.0


@dataclass(frozen=True)
class KernelSpec:
    bandwidth: float
    kind: str = EPANECHNIKOV

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth!r}")
        if self.kind != EPANECHNIKOV:
            raise ValueError(f"unsupported kernel {self.kind!r}")

    @property
    def l2_norm_sq(self) -> float:
        return EPANECHNIKOV_L2


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Normalized weights ``W_h(x - X_i)`` aligned to the sample's input order."""

    weights: np.ndarray
    active_count: int


@dataclass(frozen=True, eq=False)
class ConditionalCdfCurve:
    """Right-continuous step function with value ``values[k]`` on
    ``[jump_times[k], jump_times[k+1])`` and 0 before the first jump.

    Tied jump times are allowed; evaluation returns the value after the last
    of them.
    """

    jump_times: np.ndarray
    values: np.ndarray
    x: float
    kernel: KernelSpec

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.jump_times, t, side="right")
        padded = np.concatenate(([0.0], self.values))
        out = padded[k]
        return float(out) if out.ndim == 0 else out

    @property
    def limit(self) -> float:
        return float(self.values[-1]) if len(self.values) else 0.0


def kernel_value(u):
    """Epanechnikov kernel ``(3/4)(1 - u^2)`` on ``|u| < 1``, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_weights(sample: SurvivalSample, x: float, kernel: KernelSpec) -> WeightVector:
    """Nadaraya-Watson weights at ``x``.

    Raises
    ------
    NoMass
        If no covariate lies strictly within one bandwidth of ``x``.
    """
    k = kernel_value((x - sample.covariates) / kernel.bandwidth)
    total = k.sum()
    active = int(np.count_nonzero(k))
    if active == 0:
        raise NoMass(f"no covariate within bandwidth {kernel.bandwidth:g} of x={x:g}")
    return WeightVector(k / total, active)


def _sorted_active(sample, x, kernel):
    w = kernel_weights(sample, x, kernel).weights
    idx = sample.sorted_index
    t, d, w = sample.times[idx], sample.status[idx], w[idx]
    keep = w > 0
    return t[keep], d[keep], w[keep]


def conditional_subcdf(
    sample: SurvivalSample, x: float, kernel: KernelSpec, uncensored_only: bool = False
) -> ConditionalCdfCurve:
    """Weighted empirical cdf ``H_n(.|x)``, or ``H_n^u(.|x)`` when
    ``uncensored_only`` is set."""
    t, d, w = _sorted_active(sample, x, kernel)
    if uncensored_only:
        t, w = t[d == 1], w[d == 1]
    return ConditionalCdfCurve(t, np.cumsum(w), float(x), kernel)


def beran_cdf(
    sample: SurvivalSample, x: float, kernel: KernelSpec, censoring_side: bool = False
) -> ConditionalCdfCurve:
    """Beran estimator ``F_n(.|x)`` of the conditional event-time cdf.

    With ``censoring_side`` the roles of the two statuses swap and the result
    estimates the censoring cdf ``G(.|x)``.

    Each factor is ``1 - W_(i) / R_(i)`` where ``R_(i) = 1 - sum_{j<i} W_(j)``
    is the kernel mass still at risk. ``R`` is accumulated from the right, so
    ``R_(i) >= W_(i) > 0`` for every active observation and the last one at
    risk contributes a factor of exactly 0: the curve reaches 1 when the
    largest active time is uncensored.
    """
    t, d, w = _sorted_active(sample, x, kernel)
    jump = (d == 0) if censoring_side else (d == 1)
    at_risk = np.cumsum(w[::-1])[::-1]
    factor = np.clip(1.0 - w[jump] / at_risk[jump], 0.0, 1.0)
    values = 1.0 - np.cumprod(factor)
    return ConditionalCdfCurve(t[jump], values, float(x), kernel)


def select_bandwidth(sample: SurvivalSample) -> float:
    """Normal-reference rule ``1.06 min(sd, IQR/1.349) n^(-1/5)`` on the covariate."""
    xs = sample.covariates
    if len(xs) < 2 or np.all(xs == xs[0]):
        raise DegenerateCovariate("bandwidth needs at least two distinct covariate values")
    sd = np.std(xs, ddof=1)
    q75, q25 = np.percentile(xs, [75, 25])
    spread = min(sd, (q75 - q25) / 1.349)
    if spread <= 0:
        spread = sd
    return float(1.06 * spread * len(xs) ** (-0.2))
