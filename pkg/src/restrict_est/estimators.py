"""Equivariant estimators of the ordered pair, improved and baseline.

All estimators share the equivariant form: for a location model the
component-i estimate is X_i - psi(D) with D = X2 - X1, for a scale model it
is psi(D) * X_i with D = X2 / X1.  The baseline ("best equivariant")
estimator uses the constant psi = c0 that is optimal when the order
restriction theta1 <= theta2 is ignored.  The improved families solve a
kernel equation in c at each observed t = D:

    location, cdf kernel:  integral of W'(s - c) H_i(t|s) f_i(s) ds = 0
    location, pdf kernel:  same with h_i in place of H_i
    scale, cdf kernel:     integral of s W'(c s) H_i(t|s) f_i(s) ds = 0
    scale, pdf kernel:     same with h_i

The cdf kernel yields the smooth shrinkage family (``bz_psi``); the pdf
kernel yields the conditional-expectation family (``stein_psi``), which
dominates only after clamping against c0 (``stein_clamped_psi``).  Closed
forms are used for the built-in models under squared error; everything else
goes through quadrature and monotone root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import erfcx

from . import numerics
from .errors import DirectionUnknownError, DomainError, NumericsError
from .loss import LossSpec
from .models import BivariateModel, NormalSpec, Orientation

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

#: Which side of c0 the conditional-expectation estimate must be pulled to,
#: keyed by (orientation, component, density-ratio direction in s).  One row
#: per dominance corollary.
CLAMP_RULES = {
    (Orientation.LOCATION, 1, "non-decreasing"): "max",
    (Orientation.LOCATION, 1, "non-increasing"): "min",
    (Orientation.LOCATION, 2, "non-decreasing"): "max",
    (Orientation.LOCATION, 2, "non-increasing"): "min",
    (Orientation.SCALE, 1, "non-decreasing"): "min",
    (Orientation.SCALE, 1, "non-increasing"): "max",
    (Orientation.SCALE, 2, "non-decreasing"): "min",
    (Orientation.SCALE, 2, "non-increasing"): "max",
}


def _mills(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _SQRT_2_OVER_PI / erfcx(-x / math.sqrt(2.0))


def mills_ratio(x):
    """phi(x) / Phi(x), stable over the whole real line via erfcx."""
    out = _mills(x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EquivariantEstimator:
    """A fitted equivariant rule: psi maps the observed t = D to the shift/scale."""

    orientation: Orientation
    component: int
    psi: Callable
    kind: str
    label: str
    params: Mapping = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class KernelEquation:
    """The root equation g(c; t) behind one improved-estimator family.

    ``id`` follows the house numbering: location equations are k1..k4 and
    scale equations l1..l4; odd ids integrate against the conditional cdf,
    even ids against the conditional pdf; ids 1-2 treat component 1 and ids
    3-4 component 2.  ``direction`` is how g varies with c.
    """

    id: str
    model: BivariateModel
    loss: LossSpec
    component: int
    level: str  # "cdf" or "pdf"
    abs_tol: float = numerics.DEFAULT_ABS_TOL
    rel_tol: float = numerics.DEFAULT_REL_TOL

    @property
    def direction(self) -> str:
        if self.model.orientation is Orientation.LOCATION:
            return "non-increasing"
        return "non-decreasing"

    def _kernel(self, t, s):
        if self.level == "cdf":
            return self.model.cond_cdf(self.component, t, s)
        return self.model.cond_pdf(self.component, t, s)

    def normalizer(self, t: float) -> float:
        """Mass of the weighted kernel at this t; sets the root equation's scale."""
        sup = self.model.support(self.component)
        if self.model.orientation is Orientation.LOCATION:
            f = lambda s: float(self._kernel(t, s) * self.model.marginal_pdf(self.component, s))
        else:
            f = lambda s: float(s * s * self._kernel(t, s) * self.model.marginal_pdf(self.component, s))
        res = numerics.integrate(f, sup, abs_tol=1e-300, rel_tol=max(self.rel_tol, 1e-10))
        return res.value

    def __call__(self, c: float, t: float, abs_tol: Optional[float] = None) -> float:
        sup = self.model.support(self.component)
        w_prime = self.loss.w_prime
        if self.model.orientation is Orientation.LOCATION:
            f = lambda s: float(
                w_prime(s - c) * self._kernel(t, s) * self.model.marginal_pdf(self.component, s)
            )
        else:
            f = lambda s: float(
                s * w_prime(c * s) * self._kernel(t, s) * self.model.marginal_pdf(self.component, s)
            )
        res = numerics.integrate(
            f, sup, abs_tol=self.abs_tol if abs_tol is None else abs_tol, rel_tol=self.rel_tol
        )
        return res.value


def kernel_equation(
    model: BivariateModel, component: int, loss: LossSpec, level: str
) -> KernelEquation:
    if level not in ("cdf", "pdf"):
        raise ValueError(f"level must be 'cdf' or 'pdf', got {level!r}")
    model._check_component(component)
    if model.orientation is Orientation.LOCATION:
        ids = {(1, "cdf"): "k1", (1, "pdf"): "k2", (2, "cdf"): "k3", (2, "pdf"): "k4"}
    else:
        ids = {(1, "cdf"): "l1", (1, "pdf"): "l2", (2, "cdf"): "l3", (2, "pdf"): "l4"}
    return KernelEquation(
        id=ids[(component, level)], model=model, loss=loss, component=component, level=level
    )


def _solve_kernel_root(
    eq: KernelEquation, t: float, hint: float, root_tol: float = numerics.DEFAULT_ROOT_TOL
) -> float:
    mass = eq.normalizer(t)
    if not mass > 0.0:
        raise NumericsError(
            f"kernel mass underflows at t={t!r}; the conditioning event has no "
            "representable probability"
        )
    # Absolute tolerance proportional to the mass keeps the root's accuracy
    # independent of how far in the tail t sits.
    g_tol = max(mass * 1e-8, 1e-300)
    g = lambda c: eq(c, t, abs_tol=g_tol)
    return numerics.find_root_monotone(g, eq.direction, hint, tol=root_tol)


# ---------------------------------------------------------------------------
# closed forms for the built-in models under squared error


def _is_squared_error(loss: LossSpec, orientation: Orientation) -> bool:
    pivot = 0.0 if orientation is Orientation.LOCATION else 1.0
    return loss.name == "squared-error" and loss.pivot == pivot


def _has_closed_form(model: BivariateModel, loss: LossSpec) -> bool:
    return model.kind in ("normal", "cr-gamma") and _is_squared_error(loss, model.orientation)


def _normal_bz(spec: NormalSpec, component: int) -> Callable:
    coef = (1.0 - spec.beta0) if component == 1 else -spec.beta0
    tau = spec.tau

    def psi(t):
        t = np.asarray(t, dtype=float)
        out = coef * tau * _mills(t / tau)
        return out if out.ndim else float(out)

    return psi


def _normal_stein(spec: NormalSpec, component: int) -> Callable:
    slope = (spec.beta0 - 1.0) if component == 1 else spec.beta0

    def psi(t):
        t = np.asarray(t, dtype=float)
        out = slope * t
        return out if out.ndim else float(out)

    return psi


def _require_positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("scale-model psi is defined for t > 0 only")
    return t


def _crg_bz_1(t):
    t = _require_positive(t)
    lo = np.where(t < 1.0, t, 1.0)
    below = (2.0 * lo + 3.0) * (lo + 1.0) / (2.0 * (3.0 * lo * lo + 8.0 * lo + 6.0))
    hi = np.where(t < 1.0, 1.0, t)
    above = (2.0 - 1.0 / hi**2 + 1.0 / (hi + 1.0) ** 2) / (
        6.0 - 2.0 / hi**3 + 2.0 / (hi + 1.0) ** 3
    )
    out = np.where(t < 1.0, below, above)
    return out if out.ndim else float(out)


def _crg_stein_1(t):
    t = _require_positive(t)
    lo = np.where(t < 1.0, t, 1.0)
    below = (lo + 1.0) * (lo * lo + 3.0 * lo + 3.0) / (
        3.0 * (lo**3 + 4.0 * lo * lo + 6.0 * lo + 4.0)
    )
    hi = np.where(t < 1.0, 1.0, t)
    above = hi * (hi + 1.0) * (3.0 * hi * hi + 3.0 * hi + 1.0) / (
        3.0 * (4.0 * hi**3 + 6.0 * hi * hi + 4.0 * hi + 1.0)
    )
    out = np.where(t < 1.0, below, above)
    return out if out.ndim else float(out)


def _crg_bz_2(t):
    t = _require_positive(t)
    lo = np.where(t < 1.0, t, 1.0)
    below = (1.0 + lo) * (lo + 2.0) / (2.0 * lo * (lo * lo + 3.0 * lo + 3.0))
    hi = np.where(t < 1.0, 1.0, t)
    above = (3.0 - 2.0 / hi - hi**2 / (1.0 + hi) ** 2) / (
        8.0 - 6.0 / hi - 2.0 * hi**3 / (1.0 + hi) ** 3
    )
    out = np.where(t < 1.0, below, above)
    return out if out.ndim else float(out)


def _crg_stein_2(t):
    t = _require_positive(t)
    lo = np.where(t < 1.0, t, 1.0)
    below = (1.0 + lo) * (lo * lo + 3.0 * lo + 3.0) / (
        3.0 * lo * (lo**3 + 4.0 * lo * lo + 6.0 * lo + 4.0)
    )
    hi = np.where(t < 1.0, 1.0, t)
    above = (1.0 + hi) * (3.0 * hi * hi + 3.0 * hi + 1.0) / (
        3.0 * (4.0 * hi**3 + 6.0 * hi * hi + 4.0 * hi + 1.0)
    )
    out = np.where(t < 1.0, below, above)
    return out if out.ndim else float(out)


_CRG_CLOSED = {
    ("cdf", 1): _crg_bz_1,
    ("pdf", 1): _crg_stein_1,
    ("cdf", 2): _crg_bz_2,
    ("pdf", 2): _crg_stein_2,
}


def _closed_form_psi(model: BivariateModel, component: int, loss: LossSpec, level: str):
    if not _has_closed_form(model, loss):
        return None
    if model.kind == "normal":
        fam = _normal_bz if level == "cdf" else _normal_stein
        return fam(model.normal, component)
    return _CRG_CLOSED[(level, component)]


def default_direction(model: BivariateModel, component: int) -> Optional[str]:
    """Density-ratio monotonicity direction from the built-in sign analysis.

    Returns None when no closed-form analysis exists (generic models) or
    when the model is degenerate for the component (normal with the
    conditional mean slope equal to zero).
    """
    model._check_component(component)
    if model.kind == "normal":
        if model.normal.is_degenerate(component):
            return None
        return "non-decreasing" if model.normal.mu(component) < 0.0 else "non-increasing"
    if model.kind == "cr-gamma":
        return "non-decreasing" if component == 1 else "non-increasing"
    return None


# ---------------------------------------------------------------------------
# public psi computations


def best_equivariant_constant(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    method: str = "auto",
    root_tol: float = numerics.DEFAULT_ROOT_TOL,
) -> float:
    """The constant c0 minimizing unrestricted equivariant risk for one component.

    Solves E[W'(Z_i - c)] = 0 (location) or E[Z_i W'(c Z_i)] = 0 (scale)
    over the marginal of Z_i.  ``method="auto"`` short-circuits to the known
    closed forms; ``"generic"`` forces the quadrature + root-finding path.
    """
    model._check_component(component)
    if method not in ("auto", "closed-form", "generic"):
        raise ValueError(f"unknown method {method!r}")
    if method != "generic" and _has_closed_form(model, loss):
        return 0.0 if model.kind == "normal" else 1.0 / 3.0
    if method == "closed-form":
        raise ValueError("no closed form for this model/loss combination")

    sup = model.support(component)
    if model.orientation is Orientation.LOCATION:
        integrand = lambda c: lambda s: float(
            loss.w_prime(s - c) * model.marginal_pdf(component, s)
        )
        direction = "non-increasing"
        hint = float(model.marginal_ppf(component, 0.5))
    else:
        integrand = lambda c: lambda s: float(
            s * loss.w_prime(c * s) * model.marginal_pdf(component, s)
        )
        direction = "non-decreasing"
        hint = 1.0 / max(float(model.marginal_ppf(component, 0.5)), 1e-12)

    def g(c: float) -> float:
        return numerics.integrate(integrand(c), sup, abs_tol=1e-12, rel_tol=1e-10).value

    return numerics.find_root_monotone(g, direction, hint, tol=root_tol)


def _psi_values(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    level: str,
    t,
    method: str,
    hint: Optional[float],
    root_tol: float,
):
    if method not in ("auto", "closed-form", "generic"):
        raise ValueError(f"unknown method {method!r}")
    closed = _closed_form_psi(model, component, loss, level)
    if method == "closed-form" and closed is None:
        raise ValueError("no closed form for this model/loss combination")
    if closed is not None and method != "generic":
        return closed(t)

    eq = kernel_equation(model, component, loss, level)
    if model.orientation is Orientation.SCALE:
        _require_positive(t)
    c0 = best_equivariant_constant(model, component, loss) if hint is None else float(hint)

    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    out = np.empty_like(flat)
    order = np.argsort(flat, kind="stable")
    warm = c0
    for idx in order:
        warm = _solve_kernel_root(eq, float(flat[idx]), hint=warm, root_tol=root_tol)
        out[idx] = warm
    if t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def bz_psi(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    t,
    method: str = "auto",
    hint: Optional[float] = None,
    root_tol: float = numerics.DEFAULT_ROOT_TOL,
):
    """Smooth improved psi from the conditional-cdf kernel equation.

    Accepts scalar or array t; generic solves sweep t in ascending order and
    warm-start each root from the previous one.
    """
    return _psi_values(model, component, loss, "cdf", t, method, hint, root_tol)


def stein_psi(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    t,
    method: str = "auto",
    hint: Optional[float] = None,
    root_tol: float = numerics.DEFAULT_ROOT_TOL,
):
    """Conditional-expectation psi from the conditional-pdf kernel equation."""
    return _psi_values(model, component, loss, "pdf", t, method, hint, root_tol)


def stein_clamped_psi(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    t,
    direction: Optional[str] = None,
    method: str = "auto",
):
    """The pdf-kernel psi clamped against c0 on the side its corollary requires."""
    if direction is None:
        direction = default_direction(model, component)
    if direction is None:
        raise DirectionUnknownError(
            "density-ratio direction is unknown for this model; run the conditions "
            "verifier (check_ratio_monotone) and pass direction explicitly"
        )
    rule = CLAMP_RULES[(model.orientation, component, direction)]
    c0 = best_equivariant_constant(model, component, loss, method=method)
    raw = stein_psi(model, component, loss, t, method=method, hint=c0)
    clamp = np.maximum if rule == "max" else np.minimum
    out = clamp(np.asarray(raw, dtype=float), c0)
    return out if out.ndim else float(out)


def alpha_family_psi(spec: NormalSpec, component: int, variant: str, alpha: float, t):
    """One-parameter families of improved psi for the normal model.

    ``variant="smooth"`` scales the cdf-kernel solution's shape; at
    alpha = beta0 it reproduces ``bz_psi`` exactly.  ``variant="piecewise"``
    is the clamped two-slope form: slope (alpha - 1) for component 1 (alpha
    for component 2) below t = 0 and the constant 0 above.
    """
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component!r}")
    if variant not in ("smooth", "piecewise"):
        raise ValueError(f"variant must be 'smooth' or 'piecewise', got {variant!r}")
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    t = np.asarray(t, dtype=float)
    if variant == "smooth":
        coef = (1.0 - alpha) if component == 1 else -alpha
        out = coef * spec.tau * _mills(t / spec.tau)
    else:
        slope = (alpha - 1.0) if component == 1 else alpha
        out = np.where(t < 0.0, slope * t, 0.0)
    return out if out.ndim else float(out)


def alpha_in_dominance_range(spec: NormalSpec, component: int, alpha: float) -> bool:
    """Whether alpha lies in the interval its dominance result covers.

    Component 1 requires alpha between beta0 and 1 (excluding the side of 1,
    including beta0); component 2 replaces 1 by 0.  Empty when the model is
    degenerate for the component.
    """
    mu = spec.mu(component)
    edge = 1.0 if component == 1 else 0.0
    if spec.is_degenerate(component):
        return False
    if mu < 0.0:
        return spec.beta0 <= alpha < edge
    return edge < alpha <= spec.beta0


def evaluate(estimator: EquivariantEstimator, x1, x2):
    """Apply an estimator to observations; scalars in, scalar out."""
    x1a = np.asarray(x1, dtype=float)
    x2a = np.asarray(x2, dtype=float)
    if estimator.orientation is Orientation.SCALE:
        if np.any(x1a <= 0.0) or np.any(x2a <= 0.0):
            raise DomainError("scale-model observations must be strictly positive")
        d = x2a / x1a
        base = x1a if estimator.component == 1 else x2a
        out = np.asarray(estimator.psi(d), dtype=float) * base
    else:
        d = x2a - x1a
        base = x1a if estimator.component == 1 else x2a
        out = base - np.asarray(estimator.psi(d), dtype=float)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# estimator constructors


def make_best_equivariant(
    model: BivariateModel, component: int, loss: LossSpec, method: str = "auto"
) -> EquivariantEstimator:
    c0 = best_equivariant_constant(model, component, loss, method=method)

    def psi(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, c0)
        return out if out.ndim else float(out)

    return EquivariantEstimator(
        orientation=model.orientation,
        component=component,
        psi=psi,
        kind="best-equivariant",
        label="best-equivariant",
        params={"c0": c0},
    )


def _degenerate_note(model: BivariateModel, component: int) -> Optional[str]:
    if model.kind == "normal" and model.normal.is_degenerate(component):
        return (
            "model is degenerate for this component (conditional mean slope is 0); "
            "the improved estimator coincides with the best equivariant one"
        )
    return None


def make_brewster_zidek(
    model: BivariateModel, component: int, loss: LossSpec, method: str = "auto"
) -> EquivariantEstimator:
    """Smooth improved estimator from the conditional-cdf kernel."""
    note = _degenerate_note(model, component)
    if note is not None:
        base = make_best_equivariant(model, component, loss, method=method)
        return EquivariantEstimator(
            orientation=base.orientation,
            component=component,
            psi=base.psi,
            kind="brewster-zidek",
            label="brewster-zidek",
            params=dict(base.params),
            note=note,
        )
    c0 = best_equivariant_constant(model, component, loss, method=method)

    def psi(t):
        return bz_psi(model, component, loss, t, method=method, hint=c0)

    return EquivariantEstimator(
        orientation=model.orientation,
        component=component,
        psi=psi,
        kind="brewster-zidek",
        label="brewster-zidek",
        params={"c0": c0},
    )


def make_stein_clamped(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    direction: Optional[str] = None,
    method: str = "auto",
) -> EquivariantEstimator:
    """Clamped conditional-expectation estimator; needs the ratio direction."""
    note = _degenerate_note(model, component)
    if note is not None:
        base = make_best_equivariant(model, component, loss, method=method)
        return EquivariantEstimator(
            orientation=base.orientation,
            component=component,
            psi=base.psi,
            kind="stein-clamped",
            label="stein-clamped",
            params=dict(base.params),
            note=note,
        )
    if direction is None:
        direction = default_direction(model, component)
    if direction is None:
        raise DirectionUnknownError(
            "density-ratio direction is unknown for this model; run the conditions "
            "verifier (check_ratio_monotone) and pass direction explicitly"
        )
    c0 = best_equivariant_constant(model, component, loss, method=method)

    def psi(t):
        return stein_clamped_psi(model, component, loss, t, direction=direction, method=method)

    return EquivariantEstimator(
        orientation=model.orientation,
        component=component,
        psi=psi,
        kind="stein-clamped",
        label="stein-clamped",
        params={"c0": c0, "direction": direction},
    )


def make_alpha_family(
    spec: NormalSpec, component: int, variant: str, alpha: float
) -> EquivariantEstimator:
    """Alpha-family estimator for the normal model; out-of-range alpha is flagged."""
    in_range = alpha_in_dominance_range(spec, component, alpha)
    alpha_family_psi(spec, component, variant, alpha, 0.0)  # validate args eagerly

    def psi(t):
        return alpha_family_psi(spec, component, variant, alpha, t)

    note = "" if in_range else (
        f"alpha={alpha} lies outside the dominance range for this component; "
        "the estimator is usable but carries no improvement guarantee"
    )
    return EquivariantEstimator(
        orientation=Orientation.LOCATION,
        component=component,
        psi=psi,
        kind="alpha-family",
        label=f"alpha-family-{variant}",
        params={"alpha": alpha, "variant": variant, "in_dominance_range": in_range},
        note=note,
    )


def make_custom(
    psi: Callable, orientation: Orientation, component: int, label: str = "custom"
) -> EquivariantEstimator:
    """Wrap an arbitrary psi callable as an equivariant estimator."""
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component!r}")
    return EquivariantEstimator(
        orientation=Orientation(orientation),
        component=component,
        psi=psi,
        kind="custom",
        label=label,
    )
