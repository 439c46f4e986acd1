"""Asymptotic covariances of the Beran process and of the extrapolated
estimators, evaluated from model ingredients by numerical quadrature.

Two variants of the incidence and distribution-function covariances are
provided. ``"derived"`` (the default) uses the first-order expansions of the
estimators in the Beran process at the nodes ``tau_c, y1 tau_c, y2 tau_c,
y2^2 tau_c``. ``"printed"`` reproduces the closed-form coefficients as they
were published, which differ from the expansions in several terms; it is kept
for comparison against Monte Carlo output. ``"printed-symmetric"`` is the
printed distribution-function covariance with ``(1 + b)`` in place of
``(1 - b)`` in the third coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DegenerateDenominator, IntegrandBlowup
from .kernel_beran import (
    EPANECHNIKOV_L2,
    KernelSpec,
    beran_cdf,
    conditional_subcdf,
    kernel_value,
)
from .survdata import SurvivalSample

DEFAULT_TOL = 1e-10
VARIANTS = ("derived", "printed", "printed-symmetric")


class ModelIngredients:
    """Conditional distributions at a fixed covariate value.

    Parameters
    ----------
    F, H, Hu : callable
        ``F(t|x)``, ``H(t|x)`` and ``H^u(t|x)``.
    f_x : float
        Covariate density at ``x``.
    kernel_l2 : float
        Squared L2 norm of the kernel.
    hu_density : callable, optional
        Density of ``H^u``; the hazard-type integral is then computed by
        adaptive quadrature.
    H_left : callable, optional
        ``H(t-|x)``; defaults to ``H``.
    lower : float
        Lower end of the support of ``H^u``.
    hazard_integral : callable, optional
        Direct evaluator of ``int_{-inf}^u dH^u / (1 - H(y-))^2``; takes
        precedence over quadrature (used by the plug-in mode).
    """

    def __init__(self, F, H, Hu, f_x, kernel_l2=EPANECHNIKOV_L2, hu_density=None,
                 H_left=None, lower=-math.inf, hazard_integral=None, tol=DEFAULT_TOL):
        if not f_x > 0:
            raise ValueError("covariate density at x must be positive")
        if hu_density is None and hazard_integral is None:
            raise ValueError("need either hu_density or hazard_integral")
        self.F, self.H, self.Hu = F, H, Hu
        self.f_x = float(f_x)
        self.kernel_l2 = float(kernel_l2)
        self.hu_density = hu_density
        self.H_left = H_left or H
        self.lower = lower
        self.tol = tol
        self._direct = hazard_integral
        self._cache: dict = {}
        self.evaluations = 0

    def _integrand(self, y):
        surv = 1.0 - self.H_left(y)
        if surv <= 0:
            raise IntegrandBlowup(f"1 - H(y-|x) vanishes at y={y!r}")
        return self.hu_density(y) / (surv * surv)

    def hazard_integral(self, u: float) -> float:
        u = float(u)
        if self._direct is not None:
            return float(self._direct(u))
        if u in self._cache:
            return self._cache[u]
        if u <= self.lower:
            return 0.0
        lo = self.lower if math.isfinite(self.lower) else -50.0
        pts = [p for p in (0.0,) if lo < p < u]
        val, _, info = integrate.quad(
            self._integrand, lo, u, points=pts or None, epsabs=self.tol,
            epsrel=self.tol, limit=500, full_output=True,
        )[:3]
        self.evaluations += info["neval"]
        self._cache[u] = val
        return val

    @classmethod
    def from_model(cls, model, x: float, kernel_l2=EPANECHNIKOV_L2, tol=DEFAULT_TOL):
        """Oracle ingredients from a closed-form :class:`~curetail.models.CureModel`."""
        return cls(
            F=lambda t: model.cdf(t, x),
            H=lambda t: model.observed_cdf(t, x),
            Hu=lambda t: model.uncensored_cdf(t, x),
            f_x=model.covariate_density,
            kernel_l2=kernel_l2,
            hu_density=lambda t: model.uncensored_density(t, x),
            H_left=lambda t: model.observed_cdf_left(t, x),
            lower=model.support_lower(x),
            tol=tol,
        )

    @classmethod
    def from_sample(cls, sample: SurvivalSample, x: float, kernel: KernelSpec, f_x=None):
        """Plug-in ingredients: Beran and weighted empirical curves, and a
        kernel density estimate of the covariate when ``f_x`` is not given.

        The hazard-type integral becomes a Stieltjes sum over the jumps of
        ``H_n^u``.
        """
        F = beran_cdf(sample, x, kernel)
        H = conditional_subcdf(sample, x, kernel)
        Hu = conditional_subcdf(sample, x, kernel, uncensored_only=True)
        if f_x is None:
            h = kernel.bandwidth
            f_x = float(np.sum(kernel_value((x - sample.covariates) / h)) / (len(sample) * h))
        jumps = Hu.jump_times
        dHu = np.diff(np.concatenate(([0.0], Hu.values)))
        left = 1.0 - H(np.nextafter(jumps, -np.inf))
        with np.errstate(divide="ignore"):
            terms = np.where(dHu > 0, dHu / (left * left), 0.0)
        cum = np.cumsum(terms)

        def direct(u):
            k = np.searchsorted(jumps, u, side="right")
            return cum[k - 1] if k > 0 else 0.0

        return cls(F=F, H=H, Hu=Hu, f_x=f_x, kernel_l2=kernel.l2_norm_sq,
                   hazard_integral=direct)


def gamma_cov(ing: ModelIngredients, t: float, s: float) -> float:
    """Covariance ``Gamma(t, s|x)`` of the limiting Beran process."""
    u = min(t, s)
    return (ing.kernel_l2 / ing.f_x) * (1.0 - ing.F(t)) * (1.0 - ing.F(s)) * ing.hazard_integral(u)


def gamma_matrix(ing: ModelIngredients, nodes) -> np.ndarray:
    nodes = list(nodes)
    m = len(nodes)
    out = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            out[i, j] = out[j, i] = gamma_cov(ing, nodes[i], nodes[j])
    return out


def phi(y2: float, v: float) -> float:
    """Derivative of ``v -> -log(y2) / log(v)``."""
    lv = math.log(v)
    return math.log(y2) / (v * lv * lv)


def psi(y1: float, g: float) -> float:
    """Derivative of ``g -> 1 / (y1^(-1/g) - 1)``."""
    u = y1 ** (-1.0 / g)
    return -math.log(y1) * u / (g * (u - 1.0)) ** 2


def index_coefficients(b: float) -> np.ndarray:
    """Symmetric 3x3 table ``c_ij`` for the index variance."""
    return np.array([
        [b * b, -b * (1.0 + b), b],
        [-b * (1.0 + b), (1.0 + b) ** 2, -(1.0 + b)],
        [b, -(1.0 + b), 1.0],
    ])


@dataclass(frozen=True)
class _Pieces:
    tau_c: float
    y1: float
    y2: float
    f0: float
    fy1: float
    f1: float
    f2: float
    a: float
    b: float
    gamma: float
    u: float
    p: float

    @property
    def nodes(self):
        return (self.tau_c, self.y1 * self.tau_c, self.y2 * self.tau_c, self.y2 ** 2 * self.tau_c)

    @property
    def phi_b(self):
        return phi(self.y2, self.b)

    @property
    def k(self):
        """Sensitivity of the incidence limit to the index numerator, ``c psi phi``."""
        d = self.u - 1.0
        return math.log(self.y1) * self.u / (self.gamma * d) ** 2 * (self.f0 - self.fy1) * self.phi_b / self.a


def _pieces(ing: ModelIngredients, y1: float, y2: float, tau_c: float) -> _Pieces:
    if not tau_c > 0:
        raise ValueError("tau_c must be positive")
    f0, fy1 = float(ing.F(tau_c)), float(ing.F(y1 * tau_c))
    f1, f2 = float(ing.F(y2 * tau_c)), float(ing.F(y2 * y2 * tau_c))
    a = f1 - f0
    hyp = "b(y2|x) != 0"
    if a == 0:
        raise DegenerateDenominator("a(y2|x) = F(y2 tau_c|x) - F(tau_c|x) = 0", hyp)
    b = (f2 - f1) / a
    if b == 0 or not math.isfinite(b):
        raise DegenerateDenominator(f"b(y2|x) = {b!r}", hyp)
    if b < 0 or b == 1:
        raise DegenerateDenominator(f"b(y2|x) = {b!r} leaves the index undefined", hyp)
    g = -math.log(y2) / math.log(b)
    u = y1 ** (-1.0 / g)
    if u - 1.0 == 0 or not math.isfinite(u):
        raise DegenerateDenominator(
            "y1^(-1/gamma) - 1 = 0", "y1^(-1/gamma_{y2,tau_c}(x)) - 1 != 0"
        )
    p = f0 + (f0 - fy1) / (u - 1.0)
    return _Pieces(float(tau_c), y1, y2, f0, fy1, f1, f2, a, b, g, u, p)


def sigma2_gamma(ing: ModelIngredients, y2: float, tau_c: float) -> float:
    """Asymptotic variance of ``sqrt(nh)(gamma_hat - gamma_{y2,tau_c})``."""
    pc = _pieces(ing, 0.5, y2, tau_c)
    nodes = (tau_c, y2 * tau_c, y2 * y2 * tau_c)
    quad = float(np.sum(index_coefficients(pc.b) * gamma_matrix(ing, nodes)))
    return (pc.phi_b / pc.a) ** 2 * quad


def incidence_coefficients(pc: _Pieces, variant: str = "derived") -> np.ndarray:
    """Weights ``d_0..d_3`` on the Beran process at the four nodes."""
    d = pc.u - 1.0
    if variant == "derived":
        k = pc.k
        return np.array([pc.u / d - k * pc.b, -1.0 / d, k * (1.0 + pc.b), -k])
    if variant in ("printed", "printed-symmetric"):
        lead = math.log(pc.y1) * pc.u / (pc.gamma * d) ** 2
        ratio = (pc.f0 - pc.fy1) / (pc.f0 - pc.f1)
        d3 = lead * ratio * pc.phi_b
        return np.array([
            pc.u / d - lead * (pc.f0 - pc.fy1) * pc.phi_b,
            -1.0 / d,
            d3 * (1.0 - 1.0 / (pc.f1 - pc.f0)),
            d3,
        ])
    raise ValueError(f"unknown variant {variant!r}")


def sigma2_p(ing: ModelIngredients, y1: float, y2: float, tau_c: float,
             variant: str = "derived") -> float:
    """Asymptotic variance of ``sqrt(nh)(p_hat - p_{y1,y2,tau_c})``."""
    pc = _pieces(ing, y1, y2, tau_c)
    dvec = incidence_coefficients(pc, variant)
    g = gamma_matrix(ing, pc.nodes)
    return float(dvec @ g @ dvec)


def distribution_coefficients(pc: _Pieces, t: float, variant: str = "derived") -> np.ndarray:
    """Weights ``e_0(t)..e_3(t)`` on the Beran process at the four nodes."""
    ratio = max(t / pc.tau_c, 1.0)
    w = ratio ** (-1.0 / pc.gamma)
    ell = math.log(ratio) * w
    q = (pc.p - pc.f0) / pc.gamma ** 2 * ell * pc.phi_b / pc.a
    k = pc.k
    d = pc.u - 1.0
    e0 = -q * pc.b + (1.0 - w) * (1.0 / d - k * pc.b)
    if variant == "derived":
        return np.array([e0, -(1.0 - w) / d, q * (1.0 + pc.b) + (1.0 - w) * k * (1.0 + pc.b),
                         -q - (1.0 - w) * k])
    if variant == "printed":
        return np.array([e0, (1.0 - w) / d, q * (1.0 + pc.b) + (1.0 - w) * k * (1.0 - pc.b),
                         q + (1.0 - w) * k])
    if variant == "printed-symmetric":
        return np.array([e0, (1.0 - w) / d, q * (1.0 + pc.b) + (1.0 - w) * k * (1.0 + pc.b),
                         q + (1.0 - w) * k])
    raise ValueError(f"unknown variant {variant!r}")


def delta_cov(ing: ModelIngredients, y1: float, y2: float, tau_c: float, t: float, s: float,
              variant: str = "derived") -> float:
    """Asymptotic covariance of ``sqrt(nh)(F_hat - F_{y1,y2,tau_c})`` at ``(t, s)``.

    The derived variant includes the direct term ``Gamma(t ^ tau_c, s ^ tau_c)``
    contributed by the Beran curve itself; the printed variants do not.
    """
    pc = _pieces(ing, y1, y2, tau_c)
    nodes = pc.nodes
    g = gamma_matrix(ing, nodes)
    et = distribution_coefficients(pc, t, variant)
    es = distribution_coefficients(pc, s, variant)
    tc, sc = min(t, tau_c), min(s, tau_c)
    gt = np.array([gamma_cov(ing, nd, tc) for nd in nodes])
    gs = np.array([gamma_cov(ing, nd, sc) for nd in nodes])
    out = float(et @ g @ es + gt @ es + gs @ et)
    if variant == "derived":
        out += gamma_cov(ing, tc, sc)
    if t == s and out < -1e-9:
        raise ArithmeticError(f"negative variance {out!r} at t={t!r}")
    return out


@dataclass(frozen=True)
class VarianceReport:
    sigma2_gamma: float
    sigma2_p: float
    gamma_limit: float
    p_limit: float
    quadrature: tuple
    inputs: dict = field(default_factory=dict)


def variance_report(ing: ModelIngredients, x: float, y1: float, y2: float, tau_c: float,
                    variant: str = "derived") -> VarianceReport:
    pc = _pieces(ing, y1, y2, tau_c)
    s2g = sigma2_gamma(ing, y2, tau_c)
    s2p = sigma2_p(ing, y1, y2, tau_c, variant)
    rule = "QUADPACK adaptive Gauss-Kronrod 21" if ing.hu_density is not None else "Stieltjes sum"
    return VarianceReport(
        sigma2_gamma=s2g,
        sigma2_p=s2p,
        gamma_limit=pc.gamma,
        p_limit=pc.p,
        quadrature=(rule, ing.evaluations, (ing.lower, tau_c)),
        inputs={"x": x, "y1": y1, "y2": y2, "tau_c": tau_c},
    )
