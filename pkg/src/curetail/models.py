"""Closed-form conditional cure models used by the simulation study and as
oracles for the estimators.

The event-time sub-distribution is ``F(t|x) = p(x) F0(t|x)`` where ``p`` is a
logistic incidence and ``F0`` a heavy-tailed law with extreme value index
``gamma(x) = (x + 1) / 2``. Censoring is independent of ``X``: uniform on
``[0, tau_c]`` with probability ``1 - epsilon`` and equal to ``tau_c``
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import BadAlpha

FAMILIES = ("gev", "gpd", "frechet")
DEFAULT_BETA = (0.4, 2.0)


def incidence(x, beta=DEFAULT_BETA):
    """Logistic probability of not being cured, ``p(x)``."""
    b1, b2 = beta
    z = b1 + b2 * (2.0 * np.asarray(x, dtype=float) - 1.0)
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out) if out.ndim == 0 else out


def tail_index(x):
    """Conditional extreme value index ``(x + 1) / 2``."""
    out = (np.asarray(x, dtype=float) + 1.0) / 2.0
    return float(out) if out.ndim == 0 else out


# Unit-scale families with tail index g. GEV is shifted to location 1 so the
# lower quartile is positive.

def _gpd_cdf(t, g):
    z = np.maximum(t, 0.0)
    return -np.expm1(-np.log1p(g * z) / g)


def _gpd_pdf(t, g):
    return np.where(t >= 0, np.exp((-1.0 / g - 1.0) * np.log1p(g * np.maximum(t, 0.0))), 0.0)


def _gpd_ppf(a, g):
    return np.expm1(-g * np.log1p(-a)) / g


def _frechet_cdf(t, g):
    with np.errstate(divide="ignore", over="ignore"):
        pos = np.where(t > 0, t, 1.0)
        return np.where(t > 0, np.exp(-pos ** (-1.0 / g)), 0.0)


def _frechet_pdf(t, g):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        pos = np.where(t > 0, t, 1.0)
        u = pos ** (-1.0 / g)
        return np.where(t > 0, u / (g * pos) * np.exp(-u), 0.0)


def _frechet_ppf(a, g):
    return (-np.log(a)) ** (-g)


def _gev_cdf(t, g):
    return _frechet_cdf(1.0 + g * (t - 1.0), g)


def _gev_pdf(t, g):
    return g * _frechet_pdf(1.0 + g * (t - 1.0), g)


def _gev_ppf(a, g):
    return 1.0 + ((-np.log(a)) ** (-g) - 1.0) / g


def _pareto_cdf(t, g):
    with np.errstate(divide="ignore"):
        return np.where(t >= 1.0, -np.expm1(-np.log(np.maximum(t, 1.0)) / g), 0.0)


def _pareto_pdf(t, g):
    return np.where(t >= 1.0, np.maximum(t, 1.0) ** (-1.0 / g - 1.0) / g, 0.0)


def _pareto_ppf(a, g):
    return np.exp(-g * np.log1p(-a))


_LAWS = {
    "gpd": (_gpd_cdf, _gpd_pdf, _gpd_ppf, 0.0),
    "frechet": (_frechet_cdf, _frechet_pdf, _frechet_ppf, 0.0),
    "gev": (_gev_cdf, _gev_pdf, _gev_ppf, None),
    # exact power tail above 1; not part of the simulation design, used as an oracle
    "pareto": (_pareto_cdf, _pareto_pdf, _pareto_ppf, 1.0),
}


def _check_family(family):
    if family not in _LAWS:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(_LAWS)}")


def _scalar(out):
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def susceptible_cdf(family: str, x, t, gamma=None):
    """``F0(t|x)``; ``gamma`` overrides the default index ``(x+1)/2``."""
    _check_family(family)
    g = tail_index(x) if gamma is None else gamma
    return _scalar(_LAWS[family][0](np.asarray(t, dtype=float), g))


def susceptible_pdf(family: str, x, t, gamma=None):
    _check_family(family)
    g = tail_index(x) if gamma is None else gamma
    return _scalar(_LAWS[family][1](np.asarray(t, dtype=float), g))


def susceptible_quantile(family: str, x, alpha, gamma=None):
    """Inverse of :func:`susceptible_cdf` in ``alpha``."""
    _check_family(family)
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0) & (a < 1))):
        raise BadAlpha(f"quantile level must lie in (0, 1), got {alpha!r}")
    g = tail_index(x) if gamma is None else gamma
    return _scalar(_LAWS[family][2](a, g))


def draw_susceptible(family: str, x, u, gamma=None):
    """Inverse-transform draws for uniforms ``u`` in ``(0, 1]``; ``u == 1`` maps to +inf."""
    _check_family(family)
    g = tail_index(x) if gamma is None else gamma
    with np.errstate(divide="ignore", over="ignore"):
        return _LAWS[family][2](np.asarray(u, dtype=float), g)


def support_lower(family: str, x, gamma=None) -> float:
    _check_family(family)
    lo = _LAWS[family][3]
    if lo is None:
        g = tail_index(x) if gamma is None else gamma
        lo = 1.0 - 1.0 / g
    return float(lo)


def tau_grid(family: str, x_ref: float, s: float) -> float:
    """Censoring endpoint ``tau_0.25 + s (tau_0.95 - tau_0.25)`` for ``F0(.|x_ref)``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    lo = susceptible_quantile(family, x_ref, 0.25)
    hi = susceptible_quantile(family, x_ref, 0.95)
    return lo + s * (hi - lo)


@dataclass(frozen=True)
class CureModel:
    """Mixture cure model with uniform-plus-atom censoring on ``[0, tau_c]``.

    ``gamma`` and ``p`` fix the tail index and incidence to constants when
    given (useful for oracle checks); otherwise they follow the covariate.
    """

    family: str
    tau_c: float
    epsilon: float = 0.1
    beta: tuple = DEFAULT_BETA
    gamma: float | None = None
    p: float | None = None
    covariate_density: float = 1.0

    def __post_init__(self):
        _check_family(self.family)
        if not self.tau_c > 0:
            raise ValueError("tau_c must be positive")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")

    def incidence(self, x):
        return incidence(x, self.beta) if self.p is None else self.p

    def tail_index(self, x):
        return tail_index(x) if self.gamma is None else self.gamma

    def cdf(self, t, x):
        """Event-time sub-distribution ``F(t|x) = p(x) F0(t|x)``."""
        return self.incidence(x) * susceptible_cdf(self.family, x, t, self.tail_index(x))

    def pdf(self, t, x):
        return self.incidence(x) * susceptible_pdf(self.family, x, t, self.tail_index(x))

    def censoring_cdf(self, t):
        """``G(t)``; jumps by ``epsilon`` at ``tau_c``."""
        t = np.asarray(t, dtype=float)
        out = np.where(
            t >= self.tau_c, 1.0, np.clip((1.0 - self.epsilon) * t / self.tau_c, 0.0, None)
        )
        return _scalar(out)

    def censoring_cdf_left(self, t):
        """``G(t-)``."""
        t = np.asarray(t, dtype=float)
        out = np.where(
            t > self.tau_c, 1.0, np.clip((1.0 - self.epsilon) * np.minimum(t, self.tau_c) / self.tau_c, 0.0, None)
        )
        return _scalar(out)

    def observed_cdf(self, t, x):
        """``H(t|x) = 1 - (1 - F)(1 - G)``."""
        return _scalar(1.0 - (1.0 - self.cdf(t, x)) * (1.0 - self.censoring_cdf(t)))

    def observed_cdf_left(self, t, x):
        return _scalar(1.0 - (1.0 - self.cdf(t, x)) * (1.0 - self.censoring_cdf_left(t)))

    def uncensored_density(self, t, x):
        """Density of ``H^u(.|x)``, ``(1 - G(t-)) f(t|x)``."""
        return _scalar((1.0 - self.censoring_cdf_left(t)) * self.pdf(t, x))

    def uncensored_cdf(self, t, x):
        """``H^u(t|x)`` by quadrature of :meth:`uncensored_density`."""
        lo = support_lower(self.family, x, self.tail_index(x))
        t = float(t)
        if t <= lo:
            return 0.0
        hi = min(t, self.tau_c)
        points = [p for p in (0.0,) if lo < p < hi]
        val, _ = integrate.quad(
            self.uncensored_density, lo, hi, args=(x,), points=points or None,
            epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        return val

    def susceptible_quantile(self, x, alpha):
        return susceptible_quantile(self.family, x, alpha, self.tail_index(x))

    def support_lower(self, x):
        return support_lower(self.family, x, self.tail_index(x))
