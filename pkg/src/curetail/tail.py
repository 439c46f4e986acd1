"""Extreme-value extrapolation of the conditional incidence and distribution
function beyond the largest follow-up time.

All estimators read the Beran curve at ``tau_n`` and at fractions
``y tau_n`` of it, so they depend on the times only through ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateDenominator, EmptyGrid, NonPositiveTau

GAMMA_FLOOR = 0.1
# 0.25, 0.27, ..., 0.89
DEFAULT_GRID = tuple(round(0.25 + 0.02 * k, 2) for k in range(33))


@dataclass(frozen=True)
class TuningPair:
    y1: float
    y2: float

    def __post_init__(self):
        for name in ("y1", "y2"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")


@dataclass(frozen=True)
class TailEstimate:
    """Extrapolated estimates at one covariate value.

    ``gamma_raw`` is ``None`` when the ratio of increments was unusable;
    ``gamma`` is the value actually used, floored at 0.1.
    """

    x: float
    tau_n: float
    gamma_raw: Optional[float]
    gamma: float
    p_hat: float
    beran_at_tau: float
    tuning: TuningPair

    @property
    def p_hat_clipped(self) -> float:
        return min(self.p_hat, 1.0)


def _check_tau(tau_n):
    if not tau_n > 0:
        raise NonPositiveTau(f"the largest observed time must be positive, got {tau_n!r}")


def gamma_from_values(f_tau, f_y, f_yy, y2) -> Optional[float]:
    """Ratio-of-increments index from curve values at ``tau``, ``y2 tau`` and
    ``y2^2 tau``. Returns ``None`` if the ratio is undefined, non-positive or 1.
    """
    num = f_yy - f_y
    den = f_y - f_tau
    if den == 0:
        return None
    r = num / den
    if not (math.isfinite(r) and r > 0 and r != 1):
        return None
    return -math.log(y2) / math.log(r)


def gamma_hat(curve: Callable, tau_n: float, y2: float) -> Optional[float]:
    """Raw estimate of the conditional extreme value index, or ``None``."""
    _check_tau(tau_n)
    return gamma_from_values(curve(tau_n), curve(y2 * tau_n), curve(y2 * y2 * tau_n), y2)


def truncate_gamma(gamma_raw: Optional[float]) -> float:
    if gamma_raw is None or not math.isfinite(gamma_raw):
        return GAMMA_FLOOR
    return max(gamma_raw, GAMMA_FLOOR)


def p_from_values(f_tau, f_y1, y1, gamma):
    return f_tau + (f_tau - f_y1) / (y1 ** (-1.0 / gamma) - 1.0)


def p_hat(curve: Callable, tau_n: float, y1: float, gamma: float) -> float:
    """Extrapolated probability of not being cured. Not clipped to [0, 1]."""
    _check_tau(tau_n)
    return p_from_values(curve(tau_n), curve(y1 * tau_n), y1, gamma)


def extrapolate(t, base, tau, f_tau, p, gamma):
    """``base(min(t, tau)) + (p - F(tau)) (1 - max(t/tau, 1)^(-1/gamma))``."""
    t = np.asarray(t, dtype=float)
    ratio = np.maximum(t / tau, 1.0)
    out = base(np.minimum(t, tau)) + (p - f_tau) * -np.expm1(-np.log(ratio) / gamma)
    return float(out) if np.ndim(out) == 0 else out


def f_hat(curve: Callable, tau_n: float, estimate: TailEstimate, t):
    """Extrapolated conditional distribution function; equals the Beran curve
    up to ``tau_n`` and tends to ``p_hat`` as ``t`` grows."""
    _check_tau(tau_n)
    return extrapolate(t, curve, tau_n, estimate.beran_at_tau, estimate.p_hat, estimate.gamma)


def _grid_values(curve, tau_n, grid):
    z = np.asarray(grid, dtype=float)
    return float(curve(tau_n)), np.asarray(curve(z * tau_n)), np.asarray(curve(z * z * tau_n))


def candidate_table(curve: Callable, tau_n: float, grid: Sequence[float] = DEFAULT_GRID):
    """Matrix of ``p_hat`` over all ``(y1, y2)`` in ``grid x grid``.

    Row index follows ``y1``, column index ``y2``. Curve values are read once
    at ``tau_n``, ``z tau_n`` and ``z^2 tau_n``.
    """
    _check_tau(tau_n)
    if len(grid) == 0:
        raise EmptyGrid("tuning grid is empty")
    z = np.asarray(grid, dtype=float)
    if np.any((z <= 0) | (z >= 1)):
        raise ValueError("tuning grid values must lie in (0, 1)")
    f_tau, f_z, f_zz = _grid_values(curve, tau_n, z)
    gammas = np.array(
        [truncate_gamma(gamma_from_values(f_tau, f_z[j], f_zz[j], z[j])) for j in range(len(z))]
    )
    denom = z[:, None] ** (-1.0 / gammas[None, :]) - 1.0
    return f_tau + (f_tau - f_z)[:, None] / denom


def select_tuning(
    curve: Callable, tau_n: float, grid: Sequence[float] = DEFAULT_GRID
) -> TuningPair:
    """Pair minimizing the summed squared distance of its ``p_hat`` to all
    other candidates' ``p_hat``; ties go to the smallest ``y1``, then ``y2``."""
    return select_from_table(candidate_table(curve, tau_n, grid), grid)


def select_from_table(table, grid: Sequence[float]) -> TuningPair:
    """Apply the selection rule to a precomputed ``len(grid) x len(grid)`` table."""
    flat = np.asarray(table, dtype=float).ravel()
    crit = np.sum((flat[:, None] - flat[None, :]) ** 2, axis=1)
    # argmin returns the first minimum in row-major order: smallest y1, then y2
    i, j = divmod(int(np.argmin(crit)), len(grid))
    return TuningPair(float(grid[i]), float(grid[j]))


def estimate_tail(
    curve: Callable,
    tau_n: float,
    tuning: Optional[TuningPair] = None,
    grid: Sequence[float] = DEFAULT_GRID,
    x: float = math.nan,
) -> TailEstimate:
    """Run the full pipeline on one curve: pick ``(y1, y2)`` unless given,
    then compute the index and incidence estimates."""
    _check_tau(tau_n)
    if tuning is None:
        tuning = select_tuning(curve, tau_n, grid)
    g_raw = gamma_hat(curve, tau_n, tuning.y2)
    g = truncate_gamma(g_raw)
    return TailEstimate(
        x=float(getattr(curve, "x", x)),
        tau_n=float(tau_n),
        gamma_raw=g_raw,
        gamma=g,
        p_hat=float(p_hat(curve, tau_n, tuning.y1, g)),
        beran_at_tau=float(curve(tau_n)),
        tuning=tuning,
    )


@dataclass(frozen=True)
class LimitTarget:
    """Deterministic limits of the estimators at a finite censoring endpoint."""

    gamma_limit: float
    p_limit: float
    f_tau: float
    tau_c: float
    tuning: TuningPair
    cdf: Callable = None

    def distribution(self, t):
        """Limit of the extrapolated distribution function at ``t``."""
        return extrapolate(t, self.cdf, self.tau_c, self.f_tau, self.p_limit, self.gamma_limit)


def limit_targets(model, x: float, tau_c: float, tuning: TuningPair) -> LimitTarget:
    """Evaluate the limit functions on a closed-form model.

    ``model`` needs a ``cdf(t, x)`` method returning ``F(t|x)``.

    Raises
    ------
    DegenerateDenominator
        If ``b(y2|x)`` vanishes or is undefined, or if ``y1^(-1/gamma) - 1 == 0``.
    """
    _check_tau(tau_c)
    cdf = lambda t: model.cdf(t, x)  # noqa: E731
    y1, y2 = tuning.y1, tuning.y2
    f0, f1, f2 = float(cdf(tau_c)), float(cdf(y2 * tau_c)), float(cdf(y2 * y2 * tau_c))
    a = f1 - f0
    if a == 0:
        raise DegenerateDenominator(
            "F(y2 tau_c|x) - F(tau_c|x) = 0", hypothesis="b(y2|x) != 0"
        )
    b = (f2 - f1) / a
    if b == 0 or not math.isfinite(b):
        raise DegenerateDenominator("b(y2|x) = 0", hypothesis="b(y2|x) != 0")
    g = gamma_from_values(f0, f1, f2, y2)
    if g is None:
        raise DegenerateDenominator(
            f"ratio b(y2|x) = {b!r} gives no finite index", hypothesis="b(y2|x) != 0"
        )
    denom = y1 ** (-1.0 / g) - 1.0
    if denom == 0 or not math.isfinite(denom):
        raise DegenerateDenominator(
            "y1^(-1/gamma) - 1 = 0", hypothesis="y1^(-1/gamma_{y2,tau_c}(x)) - 1 != 0"
        )
    p = f0 + (f0 - float(cdf(y1 * tau_c))) / denom
    return LimitTarget(g, p, f0, float(tau_c), tuning, cdf)
