"""Evaluable three-variable continuous models and the built-in families.

A :class:`ContinuousModel` bundles the conditional CDF/pdf of the response
given (x, w) and of the background given x, with declared supports (unbounded
background laws carry an explicit truncation).  Families attach analytic
derivative and marginal hooks wherever the algebra is closed-form; consumers
fall back to the shared numerics when a hook is absent, and record which
route they used.

Built-in family tags
--------------------
``uniform-quadratic``
    Response uniform on (0, 1/(x^2 + (w-x)^2)) with background N(x, 1).
``uniform-shift``
    Response uniform on (w-x, w+x) with background scale-normal, F(w|x) =
    Phi(w/x); requires x > 0.
``linear-interaction``
    Gaussian response around intercept + cx*x + cw*w + cxw*x*w with a
    configurable normal background mean in x.
``ci-yw``
    Response law free of w by construction (conditional independence).
``indep-xw``
    Background law free of x by construction.
``grid``
    Tabulated CDFs: piecewise-linear in y and w, adjacent-difference in x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ModelConfigError, NullEventError, NumericalError
from .numerics import QuadratureSpec, integrate

TRUNC_SIGMAS = 8.0  # tail mass ~1e-15, below every check tolerance

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / _SQRT2))


@dataclass(frozen=True)
class EvalGrid:
    """Evaluation points discretizing the "for all y, x, w" quantifiers."""

    ys: tuple[float, ...]
    xs: tuple[float, ...]
    ws: tuple[float, ...]

    def __post_init__(self):
        for name, axis in (("ys", self.ys), ("xs", self.xs), ("ws", self.ws)):
            if len(axis) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError(f"{name} must be strictly increasing")

    @staticmethod
    def linspace(y: tuple[float, float, int], x: tuple[float, float, int],
                 w: tuple[float, float, int]) -> "EvalGrid":
        def axis(lo, hi, n):
            if n == 1:
                return (0.5 * (lo + hi),)
            return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))
        return EvalGrid(axis(*y), axis(*x), axis(*w))

    def to_json(self) -> dict:
        return {"ys": list(self.ys), "xs": list(self.xs), "ws": list(self.ws)}


@dataclass(frozen=True)
class ContinuousModel:
    """Evaluable conditional laws F(y|x,w), f(y|x,w), f(w|x), F(w|x).

    Optional hooks (``None`` means "no closed form; use numerics"):

    * ``dcdf_y_dx``, ``dpdf_y_dx``, ``dcdf_y_dw`` -- x/w derivatives of the
      response law, as almost-everywhere values for piecewise families;
    * ``dpdf_w_dx``, ``dcdf_w_dx`` -- x derivatives of the background law;
    * ``cdf_y_given_x`` and friends -- closed-form marginals over W.
    """

    family_tag: str
    params: dict
    cdf_y_given_xw: Callable[[float, float, float], float]
    pdf_y_given_xw: Callable[[float, float, float], float]
    pdf_w_given_x: Callable[[float, float], float]
    cdf_w_given_x: Callable[[float, float], float]
    support_x: tuple[float, float]
    support_y: Callable[[float, float], tuple[float, float]]
    support_w: Callable[[float], tuple[float, float]]
    dcdf_y_dx: Callable[[float, float, float], float] | None = None
    dpdf_y_dx: Callable[[float, float, float], float] | None = None
    dcdf_y_dw: Callable[[float, float, float], float] | None = None
    dpdf_w_dx: Callable[[float, float], float] | None = None
    dcdf_w_dx: Callable[[float, float], float] | None = None
    cdf_y_given_x: Callable[[float, float], float] | None = None
    pdf_y_given_x: Callable[[float, float], float] | None = None
    dcdf_y_given_x_dx: Callable[[float, float], float] | None = None
    dpdf_y_given_x_dx: Callable[[float, float], float] | None = None
    breakpoints_w: Callable[[float, float], tuple[float, ...]] | None = None
    clamped_support: bool = False
    complete_posterior: bool | None = None
    x_derivative_method: str = "analytic"
    tabulated_xs: tuple[float, ...] | None = None

    def w_interval(self, x: float) -> tuple[float, float]:
        return self.support_w(x)

    def w_kinks(self, y: float, x: float) -> tuple[float, ...]:
        return self.breakpoints_w(y, x) if self.breakpoints_w is not None else ()

    def describe(self) -> dict:
        return {"family": self.family_tag, "params": dict(self.params)}


# ---------------------------------------------------------------------------
# marginalization and posterior operations


def marginal_cdf_y_given_x(model: ContinuousModel, y: float, x: float,
                           quad: QuadratureSpec | None = None) -> float:
    """F(y|x) = integral of F(y|x,w) f(w|x) dw over the truncated W support.

    The result is clamped into [0, 1] only when the excess is within the
    quadrature error allowance; larger excursions raise.
    """
    quad = quad or QuadratureSpec()
    lo, hi = model.support_w(x)
    res = integrate(lambda w: model.cdf_y_given_xw(y, x, w) * model.pdf_w_given_x(w, x),
                    lo, hi, quad, breakpoints=model.w_kinks(y, x))
    v = res.value
    slack = max(10.0 * res.error, 1e-9)
    if v < -slack or v > 1.0 + slack:
        raise NumericalError(f"marginal CDF estimate {v} outside [0,1] beyond tolerance")
    return min(1.0, max(0.0, v))


def marginal_pdf_y_given_x(model: ContinuousModel, y: float, x: float,
                           quad: QuadratureSpec | None = None) -> float:
    """f(y|x) = integral of f(y|x,w) f(w|x) dw."""
    quad = quad or QuadratureSpec()
    lo, hi = model.support_w(x)
    res = integrate(lambda w: model.pdf_y_given_xw(y, x, w) * model.pdf_w_given_x(w, x),
                    lo, hi, quad, breakpoints=model.w_kinks(y, x))
    return max(0.0, res.value)


def posterior_w_density(model: ContinuousModel, w: float, y: float, x: float,
                        quad: QuadratureSpec | None = None) -> float:
    """Density of W given (Y=y, X=x): f(y|x,w) f(w|x) / f(y|x)."""
    den = marginal_pdf_y_given_x(model, y, x, quad)
    if den <= 0.0:
        raise NullEventError(f"conditioning on null event: f(y|x) = 0 at y={y}, x={x}")
    return model.pdf_y_given_xw(y, x, w) * model.pdf_w_given_x(w, x) / den


# ---------------------------------------------------------------------------
# families


def uniform_quadratic(support_x: tuple[float, float] = (0.1, 2.0),
                      trunc_sigmas: float = TRUNC_SIGMAS) -> ContinuousModel:
    """Uniform response whose width is set by x^2 + (w-x)^2; background N(x, 1).

    The CDF clamps at 1 beyond the response support, which keeps it an even
    function of (w - x); that symmetry is what makes the averaged and marginal
    dependence agree for this family.
    """
    lo_x, hi_x = support_x
    if not (lo_x > 0):
        raise ModelConfigError("uniform-quadratic needs support_x with positive lower end")
    T = float(trunc_sigmas)

    def scale(x, w):
        return x * x + (w - x) ** 2

    def inside(y, x, w):
        s = scale(x, w)
        return 0.0 < y < 1.0 / s

    def cdf_y(y, x, w):
        if y <= 0.0:
            return 0.0
        return min(1.0, y * scale(x, w))

    def pdf_y(y, x, w):
        return scale(x, w) if inside(y, x, w) else 0.0

    def dcdf_y_dx(y, x, w):
        return y * (2 * x + 2 * (x - w)) if inside(y, x, w) else 0.0

    def dpdf_y_dx(y, x, w):
        return (2 * x + 2 * (x - w)) if inside(y, x, w) else 0.0

    def dcdf_y_dw(y, x, w):
        return y * 2 * (w - x) if inside(y, x, w) else 0.0

    def breakpoints(y, x):
        if y <= 0.0:
            return ()
        inv = 1.0 / y - x * x
        if inv <= 0.0:
            return ()
        r = math.sqrt(inv)
        return (x - r, x + r)

    return ContinuousModel(
        family_tag="uniform-quadratic",
        params={"support_x": list(support_x), "trunc_sigmas": T},
        cdf_y_given_xw=cdf_y,
        pdf_y_given_xw=pdf_y,
        pdf_w_given_x=lambda w, x: norm_pdf(w - x),
        cdf_w_given_x=lambda w, x: norm_cdf(w - x),
        support_x=(lo_x, hi_x),
        support_y=lambda x, w: (0.0, 1.0 / scale(x, w)),
        support_w=lambda x: (x - T, x + T),
        dcdf_y_dx=dcdf_y_dx,
        dpdf_y_dx=dpdf_y_dx,
        dcdf_y_dw=dcdf_y_dw,
        dpdf_w_dx=lambda w, x: (w - x) * norm_pdf(w - x),
        dcdf_w_dx=lambda w, x: -norm_pdf(w - x),
        breakpoints_w=breakpoints,
        clamped_support=True,
        complete_posterior=False,
    )


def uniform_shift(support_x: tuple[float, float] = (0.25, 4.0),
                  trunc_sigmas: float = TRUNC_SIGMAS) -> ContinuousModel:
    """Uniform response on (w-x, w+x); background scale-normal F(w|x) = Phi(w/x).

    Requires x > 0.  The marginal response law is the scale family of
    Z + U(-1, 1), so closed-form marginal hooks are attached.
    """
    lo_x, hi_x = support_x
    if not (lo_x > 0):
        raise ModelConfigError("uniform-shift requires x > 0: support_x lower end must be positive")
    T = float(trunc_sigmas)

    def inside(y, x, w):
        return w - x < y < w + x

    def cdf_y(y, x, w):
        if y <= w - x:
            return 0.0
        if y >= w + x:
            return 1.0
        return (y + x - w) / (2 * x)

    # marginal of (Y|x) = x * (Z + U(-1,1)): CDF G, density g, and g'
    def _shift_cdf(t):
        return 0.5 * ((t + 1) * norm_cdf(t + 1) + norm_pdf(t + 1)
                      - (t - 1) * norm_cdf(t - 1) - norm_pdf(t - 1))

    def _shift_pdf(t):
        return 0.5 * (norm_cdf(t + 1) - norm_cdf(t - 1))

    def _shift_dpdf(t):
        return 0.5 * (norm_pdf(t + 1) - norm_pdf(t - 1))

    return ContinuousModel(
        family_tag="uniform-shift",
        params={"support_x": list(support_x), "trunc_sigmas": T},
        cdf_y_given_xw=cdf_y,
        pdf_y_given_xw=lambda y, x, w: 1.0 / (2 * x) if inside(y, x, w) else 0.0,
        pdf_w_given_x=lambda w, x: norm_pdf(w / x) / x,
        cdf_w_given_x=lambda w, x: norm_cdf(w / x),
        support_x=(lo_x, hi_x),
        support_y=lambda x, w: (w - x, w + x),
        support_w=lambda x: (-T * x, T * x),
        dcdf_y_dx=lambda y, x, w: (w - y) / (2 * x * x) if inside(y, x, w) else 0.0,
        dpdf_y_dx=lambda y, x, w: -1.0 / (2 * x * x) if inside(y, x, w) else 0.0,
        dcdf_y_dw=lambda y, x, w: -1.0 / (2 * x) if inside(y, x, w) else 0.0,
        dpdf_w_dx=lambda w, x: norm_pdf(w / x) * (w * w - x * x) / x ** 4,
        dcdf_w_dx=lambda w, x: -(w / (x * x)) * norm_pdf(w / x),
        cdf_y_given_x=lambda y, x: _shift_cdf(y / x),
        pdf_y_given_x=lambda y, x: _shift_pdf(y / x) / x,
        dcdf_y_given_x_dx=lambda y, x: -(y / (x * x)) * _shift_pdf(y / x),
        dpdf_y_given_x_dx=lambda y, x: -(y * _shift_dpdf(y / x) / x + _shift_pdf(y / x)) / (x * x),
        breakpoints_w=lambda y, x: (y - x, y + x),
        clamped_support=True,
        complete_posterior=False,
    )


def _linear_family(tag: str, *, intercept: float, coef_x: float, coef_w: float,
                   coef_xw: float, noise_sd: float, w_intercept: float,
                   w_slope: float, w_sd: float, support_x: tuple[float, float],
                   trunc_sigmas: float) -> ContinuousModel:
    if not (noise_sd > 0 and w_sd > 0):
        raise ModelConfigError("noise_sd and w_sd must be positive")
    sd = float(noise_sd)
    s = float(w_sd)
    T = float(trunc_sigmas)
    a, b = float(w_intercept), float(w_slope)

    def mean(x, w):
        return intercept + coef_x * x + coef_w * w + coef_xw * x * w

    def u(y, x, w):
        return (y - mean(x, w)) / sd

    def w_mean(x):
        return a + b * x

    def t(w, x):
        return (w - w_mean(x)) / s

    # Gaussian mixture marginal: Y|x normal with mean mu(x), variance v(x)
    def mu(x):
        return intercept + coef_x * x + (coef_w + coef_xw * x) * w_mean(x)

    def var(x):
        return (coef_w + coef_xw * x) ** 2 * s * s + sd * sd

    def mu_p(x):
        return coef_x + coef_xw * w_mean(x) + (coef_w + coef_xw * x) * b

    def var_p(x):
        return 2 * (coef_w + coef_xw * x) * coef_xw * s * s

    def um(y, x):
        return (y - mu(x)) / math.sqrt(var(x))

    def um_dx(y, x):
        v = var(x)
        return -mu_p(x) / math.sqrt(v) - um(y, x) * var_p(x) / (2 * v)

    def dcdf_marg_dx(y, x):
        return norm_pdf(um(y, x)) * um_dx(y, x)

    def dpdf_marg_dx(y, x):
        v = var(x)
        z = um(y, x)
        return (-z * norm_pdf(z) * um_dx(y, x) / math.sqrt(v)
                - norm_pdf(z) * var_p(x) / (2 * v ** 1.5))

    def breakpoints(y, x):
        # center/width of the response bump as a function of w, so w-quadratures
        # subdivide there even when the bump is narrow relative to the W range
        den = coef_w + coef_xw * x
        if abs(den) < 1e-12:
            return ()
        center = (y - intercept - coef_x * x) / den
        width = sd / abs(den)
        return (center - width, center, center + width)

    return ContinuousModel(
        family_tag=tag,
        params={"intercept": intercept, "coef_x": coef_x, "coef_w": coef_w,
                "coef_xw": coef_xw, "noise_sd": sd, "w_intercept": a,
                "w_slope": b, "w_sd": s, "support_x": list(support_x),
                "trunc_sigmas": T},
        cdf_y_given_xw=lambda y, x, w: norm_cdf(u(y, x, w)),
        pdf_y_given_xw=lambda y, x, w: norm_pdf(u(y, x, w)) / sd,
        pdf_w_given_x=lambda w, x: norm_pdf(t(w, x)) / s,
        cdf_w_given_x=lambda w, x: norm_cdf(t(w, x)),
        support_x=tuple(support_x),
        support_y=lambda x, w: (mean(x, w) - T * sd, mean(x, w) + T * sd),
        support_w=lambda x: (w_mean(x) - T * s, w_mean(x) + T * s),
        dcdf_y_dx=lambda y, x, w: -((coef_x + coef_xw * w) / sd) * norm_pdf(u(y, x, w)),
        dpdf_y_dx=lambda y, x, w: (coef_x + coef_xw * w) * u(y, x, w) * norm_pdf(u(y, x, w)) / sd ** 2,
        dcdf_y_dw=lambda y, x, w: -((coef_w + coef_xw * x) / sd) * norm_pdf(u(y, x, w)),
        dpdf_w_dx=lambda w, x: b * t(w, x) * norm_pdf(t(w, x)) / s ** 2,
        dcdf_w_dx=lambda w, x: -(b / s) * norm_pdf(t(w, x)),
        cdf_y_given_x=lambda y, x: norm_cdf(um(y, x)),
        pdf_y_given_x=lambda y, x: norm_pdf(um(y, x)) / math.sqrt(var(x)),
        dcdf_y_given_x_dx=dcdf_marg_dx,
        dpdf_y_given_x_dx=dpdf_marg_dx,
        breakpoints_w=breakpoints,
        clamped_support=False,
        complete_posterior=True,  # Gaussian posterior for W given (y, x)
    )


def linear_interaction(coef_x: float = 1.0, coef_w: float = 1.0, coef_xw: float = 0.5,
                       noise_sd: float = 1.0, intercept: float = 0.0,
                       w_intercept: float = 0.0, w_slope: float = 1.0, w_sd: float = 1.0,
                       support_x: tuple[float, float] = (-4.0, 4.0),
                       trunc_sigmas: float = TRUNC_SIGMAS) -> ContinuousModel:
    """Gaussian response around a bilinear mean; normal background mean in x.

    With ``coef_xw != 0`` the x-derivative of the response CDF depends on w,
    so the family is deliberately non-homogeneous.
    """
    return _linear_family("linear-interaction", intercept=intercept, coef_x=coef_x,
                          coef_w=coef_w, coef_xw=coef_xw, noise_sd=noise_sd,
                          w_intercept=w_intercept, w_slope=w_slope, w_sd=w_sd,
                          support_x=support_x, trunc_sigmas=trunc_sigmas)


def ci_yw(intercept: float = 0.0, coef_x: float = 1.0, noise_sd: float = 1.0,
          w_intercept: float = 0.0, w_slope: float = 1.0, w_sd: float = 1.0,
          support_x: tuple[float, float] = (-4.0, 4.0),
          trunc_sigmas: float = TRUNC_SIGMAS) -> ContinuousModel:
    """Response law free of w by construction (Y independent of W given X)."""
    return _linear_family("ci-yw", intercept=intercept, coef_x=coef_x, coef_w=0.0,
                          coef_xw=0.0, noise_sd=noise_sd, w_intercept=w_intercept,
                          w_slope=w_slope, w_sd=w_sd, support_x=support_x,
                          trunc_sigmas=trunc_sigmas)


def indep_xw(coef_x: float = 1.0, coef_w: float = 1.0, coef_xw: float = 0.5,
             noise_sd: float = 1.0, intercept: float = 0.0, w_mean: float = 0.0,
             w_sd: float = 1.0, support_x: tuple[float, float] = (-4.0, 4.0),
             trunc_sigmas: float = TRUNC_SIGMAS) -> ContinuousModel:
    """Background law free of x by construction (W independent of X)."""
    return _linear_family("indep-xw", intercept=intercept, coef_x=coef_x,
                          coef_w=coef_w, coef_xw=coef_xw, noise_sd=noise_sd,
                          w_intercept=w_mean, w_slope=0.0, w_sd=w_sd,
                          support_x=support_x, trunc_sigmas=trunc_sigmas)


def grid_model(ys: Sequence[float], xs: Sequence[float], ws: Sequence[float],
               cdf_y: Sequence, cdf_w: Sequence) -> ContinuousModel:
    """Tabulated model: CDFs piecewise-linear in y and w, tabulated in x.

    ``cdf_y`` has shape (ny, nx, nw): F(y_i | x_j, w_k).  ``cdf_w`` has shape
    (nx, nw): F(w_k | x_j).  Derivatives in x are adjacent differences on the
    tabulated x axis (flagged as such in method metadata); between nodes the
    interpolant's exact slope is used.
    """
    ys_a = np.asarray(ys, dtype=float)
    xs_a = np.asarray(xs, dtype=float)
    ws_a = np.asarray(ws, dtype=float)
    Fy = np.asarray(cdf_y, dtype=float)
    Fw = np.asarray(cdf_w, dtype=float)

    for name, axis in (("ys", ys_a), ("xs", xs_a), ("ws", ws_a)):
        if axis.ndim != 1 or axis.size < 2:
            raise ModelConfigError(f"grid axis {name} needs at least 2 increasing points")
        if np.any(np.diff(axis) <= 0):
            raise ModelConfigError(f"grid axis {name} must be strictly increasing")
    if Fy.shape != (ys_a.size, xs_a.size, ws_a.size):
        raise ModelConfigError(f"cdf_y shape {Fy.shape} != (ny, nx, nw) "
                               f"{(ys_a.size, xs_a.size, ws_a.size)}")
    if Fw.shape != (xs_a.size, ws_a.size):
        raise ModelConfigError(f"cdf_w shape {Fw.shape} != (nx, nw) {(xs_a.size, ws_a.size)}")

    tol = 1e-6
    if np.any(np.diff(Fy, axis=0) < -1e-12):
        raise ModelConfigError("cdf_y must be nondecreasing along y")
    if np.any(np.diff(Fw, axis=1) < -1e-12):
        raise ModelConfigError("cdf_w must be nondecreasing along w")
    if np.any(np.abs(Fy[0]) > tol) or np.any(np.abs(Fy[-1] - 1.0) > tol):
        raise ModelConfigError("cdf_y must run from ~0 to ~1 along y")
    if np.any(np.abs(Fw[:, 0]) > tol) or np.any(np.abs(Fw[:, -1] - 1.0) > tol):
        raise ModelConfigError("cdf_w must run from ~0 to ~1 along w")
    Fy = Fy.copy()
    Fw = Fw.copy()
    Fy[0] = 0.0
    Fy[-1] = 1.0
    Fw[:, 0] = 0.0
    Fw[:, -1] = 1.0

    def _bracket(axis, v):
        j = int(np.searchsorted(axis, v, side="right") - 1)
        j = min(max(j, 0), axis.size - 2)
        frac = (v - axis[j]) / (axis[j + 1] - axis[j])
        return j, min(max(frac, 0.0), 1.0)

    def _fy_at(iy_pair, x, w):
        """Bilinear (x, w) interpolation of the CDF at a y node index."""
        jx, fx = _bracket(xs_a, x)
        jw, fw = _bracket(ws_a, w)
        sub = Fy[iy_pair, jx:jx + 2, jw:jw + 2]
        cx = np.array([1 - fx, fx])
        cw = np.array([1 - fw, fw])
        return np.einsum("ijk,j,k->i", sub, cx, cw)

    def cdf_y_eval(y, x, w):
        if y <= ys_a[0]:
            return 0.0
        if y >= ys_a[-1]:
            return 1.0
        jy, fy = _bracket(ys_a, y)
        pair = _fy_at(slice(jy, jy + 2), x, w)
        return float(pair[0] + fy * (pair[1] - pair[0]))

    def pdf_y_eval(y, x, w):
        if not (ys_a[0] < y < ys_a[-1]):
            return 0.0
        jy, _ = _bracket(ys_a, y)
        pair = _fy_at(slice(jy, jy + 2), x, w)
        return float(max(0.0, (pair[1] - pair[0]) / (ys_a[jy + 1] - ys_a[jy])))

    def _fw_col(x):
        jx, fx = _bracket(xs_a, x)
        return (1 - fx) * Fw[jx] + fx * Fw[jx + 1]

    def cdf_w_eval(w, x):
        if w <= ws_a[0]:
            return 0.0
        if w >= ws_a[-1]:
            return 1.0
        col = _fw_col(x)
        jw, fw = _bracket(ws_a, w)
        return float(col[jw] + fw * (col[jw + 1] - col[jw]))

    def pdf_w_eval(w, x):
        if not (ws_a[0] < w < ws_a[-1]):
            return 0.0
        col = _fw_col(x)
        jw, _ = _bracket(ws_a, w)
        return float(max(0.0, (col[jw + 1] - col[jw]) / (ws_a[jw + 1] - ws_a[jw])))

    def _x_difference(eval_at, x):
        """Adjacent-difference derivative in x of a scalar x->value map."""
        j = int(np.searchsorted(xs_a, x, side="right") - 1)
        j = min(max(j, 0), xs_a.size - 2)
        on_node = abs(x - xs_a[j]) <= 1e-12 * max(1.0, abs(x))
        if on_node and 0 < j < xs_a.size - 1:
            return (eval_at(xs_a[j + 1]) - eval_at(xs_a[j - 1])) / (xs_a[j + 1] - xs_a[j - 1])
        return (eval_at(xs_a[j + 1]) - eval_at(xs_a[j])) / (xs_a[j + 1] - xs_a[j])

    return ContinuousModel(
        family_tag="grid",
        params={"ny": int(ys_a.size), "nx": int(xs_a.size), "nw": int(ws_a.size)},
        cdf_y_given_xw=cdf_y_eval,
        pdf_y_given_xw=pdf_y_eval,
        pdf_w_given_x=pdf_w_eval,
        cdf_w_given_x=cdf_w_eval,
        support_x=(float(xs_a[0]), float(xs_a[-1])),
        support_y=lambda x, w: (float(ys_a[0]), float(ys_a[-1])),
        support_w=lambda x: (float(ws_a[0]), float(ws_a[-1])),
        dcdf_y_dx=lambda y, x, w: _x_difference(lambda xv: cdf_y_eval(y, xv, w), x),
        dpdf_y_dx=lambda y, x, w: _x_difference(lambda xv: pdf_y_eval(y, xv, w), x),
        dpdf_w_dx=lambda w, x: _x_difference(lambda xv: pdf_w_eval(w, xv), x),
        dcdf_w_dx=lambda w, x: _x_difference(lambda xv: cdf_w_eval(w, xv), x),
        breakpoints_w=lambda y, x: tuple(float(v) for v in ws_a),
        clamped_support=True,
        complete_posterior=None,
        x_derivative_method="adjacent-difference",
        tabulated_xs=tuple(float(v) for v in xs_a),
    )


FAMILY_BUILDERS = {
    "uniform-quadratic": uniform_quadratic,
    "uniform-shift": uniform_shift,
    "linear-interaction": linear_interaction,
    "ci-yw": ci_yw,
    "indep-xw": indep_xw,
}


def model_from_config(cfg: dict) -> ContinuousModel:
    """Build a model from config JSON: {"family", "params", "truncation", "grid"}."""
    if not isinstance(cfg, dict):
        raise ModelConfigError(f"model config must be an object, got {type(cfg).__name__}")
    family = cfg.get("family")
    if family is None:
        raise ModelConfigError('model config is missing the "family" tag')

    if family == "grid":
        grid = cfg.get("grid")
        if not isinstance(grid, dict):
            raise ModelConfigError('family "grid" requires a "grid" object with tabulated arrays')
        try:
            return grid_model(grid["ys"], grid["xs"], grid["ws"],
                              grid["cdf_y"], grid["cdf_w"])
        except KeyError as exc:
            raise ModelConfigError(f"grid config is missing array {exc.args[0]!r}") from None

    builder = FAMILY_BUILDERS.get(family)
    if builder is None:
        known = ", ".join(sorted([*FAMILY_BUILDERS, "grid"]))
        raise ModelConfigError(f"unknown family {family!r}; known tags: {known}")

    params = {str(k).replace("-", "_"): v for k, v in dict(cfg.get("params", {})).items()}
    if "support_x" in params:
        params["support_x"] = tuple(params["support_x"])
    trunc = cfg.get("truncation", {})
    if "sigmas" in trunc:
        params["trunc_sigmas"] = float(trunc["sigmas"])
    try:
        return builder(**params)
    except TypeError as exc:
        raise ModelConfigError(f"bad parameters for family {family!r}: {exc}") from None


def auto_grid(model: ContinuousModel, n_y: int = 25, n_x: int = 25, n_w: int = 15,
              y_quantiles: tuple[float, float] = (0.05, 0.95),
              quad: QuadratureSpec | None = None) -> EvalGrid:
    """Build an interior evaluation grid from the model's declared supports.

    The x axis shrinks away from the support edges by a few differencing
    steps; the w axis covers the intersection of the truncated background
    supports across the x range; the y axis spans marginal quantiles at the
    middle x.
    """
    from .numerics import invert_cdf, noisy_step

    quad = quad or QuadratureSpec()
    lo_x, hi_x = model.support_x
    pad = 3.0 * noisy_step(quad.abs_tol)
    lo_x2 = lo_x + pad * max(1.0, abs(lo_x))
    hi_x2 = hi_x - pad * max(1.0, abs(hi_x))
    if lo_x2 >= hi_x2:
        lo_x2, hi_x2 = lo_x, hi_x
    xs = tuple(lo_x2 + (hi_x2 - lo_x2) * i / max(n_x - 1, 1) for i in range(n_x))

    w_lo = max(model.support_w(x)[0] for x in xs)
    w_hi = min(model.support_w(x)[1] for x in xs)
    if w_lo >= w_hi:  # disjoint truncations across x; fall back to mid-x support
        w_lo, w_hi = model.support_w(xs[len(xs) // 2])
    w_pad = 0.05 * (w_hi - w_lo)
    ws = tuple((w_lo + w_pad) + (w_hi - w_lo - 2 * w_pad) * i / max(n_w - 1, 1)
               for i in range(n_w))

    x_mid = xs[len(xs) // 2]
    y_candidates = [model.support_y(x_mid, w) for w in ws]
    y_lo_b = min(lo for lo, _ in y_candidates)
    y_hi_b = max(hi for _, hi in y_candidates)
    if model.cdf_y_given_x is not None:
        def marg(yv):
            return model.cdf_y_given_x(yv, x_mid)
    else:
        def marg(yv):
            return marginal_cdf_y_given_x(model, yv, x_mid, quad)
    y_lo = invert_cdf(marg, y_quantiles[0], y_lo_b, y_hi_b, value_tol=1e-6)
    y_hi = invert_cdf(marg, y_quantiles[1], y_lo_b, y_hi_b, value_tol=1e-6)
    if n_y == 1:
        ys = (0.5 * (y_lo + y_hi),)
    else:
        ys = tuple(y_lo + (y_hi - y_lo) * i / (n_y - 1) for i in range(n_y))
    return EvalGrid(ys, xs, ws)
