"""Bivariate models and their difference/ratio conditional structure.

A model couples a joint density for the pivotal pair (Z1, Z2) with the
conditional kernels the estimator layer integrates against.  For a location
model the conditioned variable is the difference Z = Z2 - Z1; for a scale
model it is the ratio Z = Z2 / Z1.  Component i conditions on Z_i = s:

    location:  h1(t|s) = f(s, s + t) / f1(s)      h2(t|s) = f(s - t, s) / f2(s)
    scale:     h1(t|s) = s f(s, s t) / f1(s)      h2(t|s) = (s / t^2) f(s / t, s) / f2(s)

with H_i the corresponding conditional cdf in t.  The built-in models carry
closed forms; ``generic_model`` builds the same interface from a black-box
joint density by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import gamma as _gamma_dist

from . import numerics
from .errors import (
    ConditioningError,
    DomainError,
    ModelConstructionError,
    ModelError,
    ParameterError,
)
from .numerics import Interval

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Orientation(str, Enum):
    LOCATION = "location"
    SCALE = "scale"


def _norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _em1_frac(u):
    """(1 - exp(-u)) / u, stable for all u >= 0 (limit 1 at u = 0)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(u == 0.0, 1.0, -np.expm1(-u) / np.where(u == 0.0, 1.0, u))
    return out


def _em1_frac_c(u):
    """1 - (1 - exp(-u)) / u without cancellation near u = 0."""
    u = np.asarray(u, dtype=float)
    small = u < 1e-3
    us = np.where(small, u, 1.0)
    series = us / 2.0 - us**2 / 6.0 + us**3 / 24.0 - us**4 / 120.0
    return np.where(small, series, 1.0 - _em1_frac(u))


@dataclass(frozen=True)
class NormalSpec:
    """Parameters of the centered bivariate normal pivotal pair.

    The derived quantities drive every closed form: mu1 = rho*sigma2 - sigma1
    and mu2 = sigma2 - rho*sigma1 are the regression slopes of the difference
    D = Z2 - Z1 on Z1 and Z2 (per unit of conditioning value), tau^2 is the
    variance of D, and beta0 = 1 + sigma1*mu1/tau^2 = sigma2*mu2/tau^2 is the
    shrinkage slope shared by the component estimators.
    """

    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self):
        if not (self.sigma1 > 0.0 and math.isfinite(self.sigma1)):
            raise ParameterError(f"sigma1 must be positive and finite, got {self.sigma1}")
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise ParameterError(f"sigma2 must be positive and finite, got {self.sigma2}")
        if not (abs(self.rho) < 1.0):
            raise ParameterError(f"rho must satisfy |rho| < 1, got {self.rho}")

    @property
    def mu1(self) -> float:
        return self.rho * self.sigma2 - self.sigma1

    @property
    def mu2(self) -> float:
        return self.sigma2 - self.rho * self.sigma1

    @property
    def tau(self) -> float:
        return math.sqrt(
            self.sigma1**2 + self.sigma2**2 - 2.0 * self.rho * self.sigma1 * self.sigma2
        )

    @property
    def beta0(self) -> float:
        return 1.0 + self.sigma1 * self.mu1 / self.tau**2

    def mu(self, component: int) -> float:
        return self.mu1 if component == 1 else self.mu2

    def cond_scale(self, component: int) -> float:
        """Std. dev. of D given Z_component; the other sigma scaled by sqrt(1-rho^2)."""
        other = self.sigma2 if component == 1 else self.sigma1
        return math.sqrt(1.0 - self.rho**2) * other

    def is_degenerate(self, component: int) -> bool:
        """True when the conditional mean slope vanishes and shrinkage is inert."""
        return abs(self.mu(component)) <= 1e-12 * (self.sigma1 + self.sigma2)


@dataclass(frozen=True)
class BivariateModel:
    """Joint density plus conditional kernels, marginals and a sampler.

    The callable fields are internal; use the methods, which validate the
    component index.  ``draw_pivot(rng, size)`` draws the pivotal pair
    (Z1, Z2); ``sample`` applies the parameters deterministically on top, so
    risk simulations at different base parameters reuse identical pivots.
    """

    kind: str
    orientation: Orientation
    joint_pdf: Callable
    supports: tuple
    kernel_breakpoints: tuple
    marginal_fns: tuple
    cond_pdf_fns: tuple
    cond_cdf_fns: tuple
    ppf_fns: tuple
    draw_pivot_fn: Optional[Callable] = None
    normal: Optional[NormalSpec] = None

    def _check_component(self, i: int) -> None:
        if i not in (1, 2):
            raise ValueError(f"component must be 1 or 2, got {i!r}")

    def support(self, i: int) -> Interval:
        self._check_component(i)
        return self.supports[i - 1]

    def marginal_pdf(self, i: int, s):
        self._check_component(i)
        return self.marginal_fns[i - 1](s)

    def cond_pdf(self, i: int, t, s):
        self._check_component(i)
        return self.cond_pdf_fns[i - 1](t, s)

    def cond_cdf(self, i: int, t, s):
        self._check_component(i)
        return self.cond_cdf_fns[i - 1](t, s)

    def marginal_ppf(self, i: int, q):
        self._check_component(i)
        return self.ppf_fns[i - 1](q)

    def draw_pivot(self, rng, size: int):
        if self.draw_pivot_fn is None:
            raise ModelError(f"model {self.kind!r} has no sampler")
        return self.draw_pivot_fn(rng, size)

    def sample(self, theta1: float, theta2: float, rng, size: int = 1):
        """Draw (X1, X2) at parameters (theta1, theta2)."""
        if self.orientation is Orientation.SCALE and not (theta1 > 0.0 and theta2 > 0.0):
            raise ParameterError("scale parameters must be positive")
        z1, z2 = self.draw_pivot(rng, int(size))
        if self.orientation is Orientation.LOCATION:
            return theta1 + z1, theta2 + z2
        return theta1 * z1, theta2 * z2

    def d_support(self) -> Interval:
        if self.orientation is Orientation.LOCATION:
            return Interval(-math.inf, math.inf)
        return Interval(0.0, math.inf)

    def d_scale(self) -> float:
        """Typical spread of D = X2 - X1, used to size default location grids."""
        if self.orientation is not Orientation.LOCATION:
            raise DomainError("d_scale is defined for location models only")
        if self.normal is not None:
            return self.normal.tau
        halfwidth = 0.0
        for i in (1, 2):
            halfwidth += 0.5 * (self.marginal_ppf(i, 0.84) - self.marginal_ppf(i, 0.16))
        return halfwidth


def conditional_cdf(model: BivariateModel, i: int, t: float, s: float) -> float:
    """H_i(t | s) with conditioning-point validation, clipped to [0, 1]."""
    model._check_component(i)
    sup = model.support(i)
    if not sup.contains(s):
        raise ConditioningError(f"s={s!r} lies outside the component-{i} support")
    dens = float(model.marginal_pdf(i, s))
    if not dens > 0.0:
        raise ConditioningError(f"marginal density of component {i} vanishes at s={s!r}")
    val = float(model.cond_cdf(i, t, s))
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# bivariate normal (location orientation)


def normal_model(spec: NormalSpec) -> BivariateModel:
    """Centered bivariate normal with closed-form difference kernels."""
    s1, s2, rho = spec.sigma1, spec.sigma2, spec.rho
    det_coef = 1.0 / (2.0 * math.pi * s1 * s2 * math.sqrt(1.0 - rho * rho))
    qcoef = 1.0 / (2.0 * (1.0 - rho * rho))

    def joint_pdf(z1, z2):
        u = np.asarray(z1, dtype=float) / s1
        v = np.asarray(z2, dtype=float) / s2
        return det_coef * np.exp(-qcoef * (u * u - 2.0 * rho * u * v + v * v))

    slopes = (spec.mu1 / s1, spec.mu2 / s2)
    scales = (spec.cond_scale(1), spec.cond_scale(2))
    sigmas = (s1, s2)

    def marginal(i):
        sd = sigmas[i - 1]
        return lambda s: _norm_pdf(np.asarray(s, dtype=float) / sd) / sd

    def cond_pdf(i):
        a, xi = slopes[i - 1], scales[i - 1]
        return lambda t, s: _norm_pdf((np.asarray(t, float) - a * np.asarray(s, float)) / xi) / xi

    def cond_cdf(i):
        a, xi = slopes[i - 1], scales[i - 1]
        return lambda t, s: ndtr((np.asarray(t, float) - a * np.asarray(s, float)) / xi)

    def ppf(i):
        sd = sigmas[i - 1]
        return lambda q: sd * ndtri(q)

    root_1m = math.sqrt(1.0 - rho * rho)

    def draw_pivot(rng, size):
        u = rng.standard_normal((2, size))
        z1 = s1 * u[0]
        z2 = s2 * (rho * u[0] + root_1m * u[1])
        return z1, z2

    real_line = Interval(-math.inf, math.inf)
    return BivariateModel(
        kind="normal",
        orientation=Orientation.LOCATION,
        joint_pdf=joint_pdf,
        supports=(real_line, real_line),
        kernel_breakpoints=(),
        marginal_fns=(marginal(1), marginal(2)),
        cond_pdf_fns=(cond_pdf(1), cond_pdf(2)),
        cond_cdf_fns=(cond_cdf(1), cond_cdf(2)),
        ppf_fns=(ppf(1), ppf(2)),
        draw_pivot_fn=draw_pivot,
        normal=spec,
    )


# ---------------------------------------------------------------------------
# correlated gamma (scale orientation)


def _crg_joint(z1, z2):
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    lo = np.minimum(z1, z2)
    hi = np.maximum(z1, z2)
    out = np.exp(-hi) * (-np.expm1(-np.maximum(lo, 0.0)))
    return np.where(lo > 0.0, out, 0.0)


def _crg_h1(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    below = -np.expm1(-s * np.maximum(t, 0.0))
    above = np.exp(-s * np.maximum(t - 1.0, 0.0)) * (-np.expm1(-s))
    out = np.where(t < 1.0, below, above)
    return np.where(t > 0.0, out, 0.0)


def _crg_H1(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    tc = np.maximum(t, 0.0)
    below = tc * _em1_frac_c(s * tc)
    above = 1.0 - np.exp(-s * np.maximum(t - 1.0, 0.0)) * _em1_frac(s)
    out = np.where(t < 1.0, below, above)
    return np.where(t > 0.0, out, 0.0)


def _crg_h2(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    tc = np.where(t > 0.0, t, 1.0)
    below = np.exp(-s * np.maximum(1.0 - tc, 0.0) / tc) * (-np.expm1(-s)) / (tc * tc)
    above = -np.expm1(-s / tc) / (tc * tc)
    out = np.where(t < 1.0, below, above)
    return np.where(t > 0.0, out, 0.0)


def _crg_H2(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    tc = np.where(t > 0.0, t, 1.0)
    below = np.exp(-s * np.maximum(1.0 - tc, 0.0) / tc) * _em1_frac(s)
    above = 1.0 - _em1_frac_c(s / tc) / tc
    out = np.where(t < 1.0, below, above)
    return np.where(t > 0.0, out, 0.0)


def cr_gamma_model() -> BivariateModel:
    """Correlated gamma pair built from shared and idiosyncratic exponentials.

    Z_i = Y0 + Y_i with Y0, Y1, Y2 iid standard exponential, so each margin
    is gamma with shape 2 and the pair is exchangeable with a density kink
    on the diagonal, which maps to a ratio-kernel kink at t = 1.
    """

    def marginal(s):
        s = np.asarray(s, dtype=float)
        return np.where(s > 0.0, s * np.exp(-np.maximum(s, 0.0)), 0.0)

    gamma2 = _gamma_dist(a=2.0)

    def ppf(q):
        return gamma2.ppf(q)

    def draw_pivot(rng, size):
        y = rng.standard_exponential((3, size))
        return y[0] + y[1], y[0] + y[2]

    pos = Interval(0.0, math.inf)
    return BivariateModel(
        kind="cr-gamma",
        orientation=Orientation.SCALE,
        joint_pdf=_crg_joint,
        supports=(pos, pos),
        kernel_breakpoints=(1.0,),
        marginal_fns=(marginal, marginal),
        cond_pdf_fns=(_crg_h1, _crg_h2),
        cond_cdf_fns=(_crg_H1, _crg_H2),
        ppf_fns=(ppf, ppf),
        draw_pivot_fn=draw_pivot,
    )


# ---------------------------------------------------------------------------
# generic model from a black-box joint density


def generic_model(
    joint_pdf: Callable,
    orientation: Orientation,
    supports: tuple,
    draw_pivot: Optional[Callable] = None,
    t_breakpoints: tuple = (),
    normalization_tol: float = 1e-6,
    abs_tol: float = numerics.DEFAULT_ABS_TOL,
    rel_tol: float = numerics.DEFAULT_REL_TOL,
) -> BivariateModel:
    """Build the conditional-kernel interface from a joint density alone.

    Marginals and conditional cdfs are computed by adaptive quadrature in
    the t variable (difference or ratio), so any non-smooth points of the
    kernels must be supplied as fixed t-axis values in ``t_breakpoints``.
    The first marginal is integrated over its support at construction time
    and must normalize to 1 within ``normalization_tol``.
    """
    orientation = Orientation(orientation)
    sup1, sup2 = (s if isinstance(s, Interval) else Interval(*s) for s in supports)
    if orientation is Orientation.SCALE and (sup1.lo < 0.0 or sup2.lo < 0.0):
        raise ModelConstructionError("scale models need supports within (0, inf)")
    cuts = tuple(sorted(float(b) for b in t_breakpoints))

    def t_domain(i: int, s: float) -> Interval:
        # Image of the other component's support in the t variable.
        if orientation is Orientation.LOCATION:
            if i == 1:
                return Interval(sup2.lo - s, sup2.hi - s)
            return Interval(s - sup1.hi, s - sup1.lo)
        if i == 1:
            lo = sup2.lo / s
            hi = math.inf if math.isinf(sup2.hi) else sup2.hi / s
            return Interval(lo, hi)
        lo = 0.0 if math.isinf(sup1.hi) else s / sup1.hi
        hi = math.inf if sup1.lo == 0.0 else s / sup1.lo
        return Interval(lo, hi)

    def numerator(i: int, t, s):
        # Joint density expressed in (t, s); integrates over t to f_i(s).
        t = np.asarray(t, dtype=float)
        if orientation is Orientation.LOCATION:
            val = joint_pdf(s, s + t) if i == 1 else joint_pdf(s - t, s)
            return np.asarray(val, dtype=float)
        if i == 1:
            return s * np.asarray(joint_pdf(s, s * t), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(t > 0.0, (s / t**2) * np.asarray(joint_pdf(s / np.where(t > 0, t, 1.0), s), float), 0.0)
        return val

    def marginal_at(i: int, s: float) -> float:
        dom = t_domain(i, s)
        res = numerics.integrate(
            lambda t: float(numerator(i, t, s)),
            dom,
            abs_tol=abs_tol,
            rel_tol=rel_tol,
            breakpoints=cuts,
        )
        return res.value

    def marginal(i):
        def f(s):
            s_arr = np.asarray(s, dtype=float)
            if s_arr.ndim == 0:
                return marginal_at(i, float(s_arr))
            return np.array([marginal_at(i, float(x)) for x in s_arr.ravel()]).reshape(s_arr.shape)

        return f

    # Where the marginal underflows to zero the conditional kernels return 0:
    # every integral weights them by that same marginal, so the value carries
    # no mass.  Conditioning on such a point explicitly is rejected by the
    # conditional_cdf wrapper, which validates before calling in here.
    def _no_mass(t):
        zero = np.zeros_like(np.asarray(t, dtype=float))
        return zero if zero.ndim else 0.0

    def cond_pdf(i):
        def h(t, s):
            dens = marginal_at(i, float(s))
            if not dens > 0.0:
                return _no_mass(t)
            return numerator(i, t, s) / dens

        return h

    def cond_cdf(i):
        def H(t, s):
            s = float(s)
            dens = marginal_at(i, s)
            if not dens > 0.0:
                return _no_mass(t)

            def one(tv: float) -> float:
                dom = t_domain(i, s)
                if tv <= dom.lo:
                    return 0.0
                hi = min(tv, dom.hi)
                if not dom.lo < hi:
                    return 1.0
                res = numerics.integrate(
                    lambda z: float(numerator(i, z, s)),
                    Interval(dom.lo, hi),
                    abs_tol=abs_tol,
                    rel_tol=rel_tol,
                    breakpoints=cuts,
                )
                return res.value / dens

            t_arr = np.asarray(t, dtype=float)
            if t_arr.ndim == 0:
                return one(float(t_arr))
            return np.array([one(float(x)) for x in t_arr.ravel()]).reshape(t_arr.shape)

        return H

    def ppf(i):
        sup = (sup1, sup2)[i - 1]
        marg = marginal(i)

        def F(x: float) -> float:
            if x <= sup.lo:
                return 0.0
            res = numerics.integrate(
                lambda s: float(marg(s)), Interval(sup.lo, x), abs_tol=abs_tol, rel_tol=rel_tol
            )
            return res.value

        def inv(q: float) -> float:
            if not 0.0 < q < 1.0:
                raise DomainError(f"quantile level must lie in (0, 1), got {q!r}")
            if sup.finite:
                hint = 0.5 * (sup.lo + sup.hi)
            elif math.isfinite(sup.lo):
                hint = sup.lo + 1.0
            elif math.isfinite(sup.hi):
                hint = sup.hi - 1.0
            else:
                hint = 0.0

            def g(x: float) -> float:
                lo = max(sup.lo, -1e300)
                hi = min(sup.hi, 1e300)
                return F(min(max(x, lo), hi)) - q

            return numerics.find_root_monotone(g, "non-decreasing", hint, tol=1e-9)

        return inv

    model = BivariateModel(
        kind="generic",
        orientation=orientation,
        joint_pdf=joint_pdf,
        supports=(sup1, sup2),
        kernel_breakpoints=cuts,
        marginal_fns=(marginal(1), marginal(2)),
        cond_pdf_fns=(cond_pdf(1), cond_pdf(2)),
        cond_cdf_fns=(cond_cdf(1), cond_cdf(2)),
        ppf_fns=(ppf(1), ppf(2)),
        draw_pivot_fn=draw_pivot,
    )

    total = numerics.integrate(
        lambda s: float(model.marginal_pdf(1, s)),
        sup1,
        abs_tol=max(abs_tol, 1e-9),
        rel_tol=max(rel_tol, 1e-7),
    )
    if abs(total.value - 1.0) > normalization_tol:
        raise ModelConstructionError(
            f"first marginal integrates to {total.value!r}, not 1 "
            f"(tolerance {normalization_tol}); check the joint density"
        )
    return model
