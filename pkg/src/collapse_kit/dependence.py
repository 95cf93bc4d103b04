"""Distribution- and density-dependence functions, conditional and marginal.

For continuous X the dependence function is the x-derivative of the
conditional (or marginalized) CDF of the response; for discrete X it is the
difference between adjacent X levels.  :func:`decomposition_terms` splits the
marginal derivative into the averaged conditional derivative plus the
background-shift term, which is the engine behind every averaged-collapse
check downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NonDifferentiablePointError, TableError
from .models import (
    ContinuousModel,
    EvalGrid,
    marginal_cdf_y_given_x,
    marginal_pdf_y_given_x,
)
from .numerics import DiffSpec, QuadratureSpec, central_diff, integrate, noisy_step
from .tables import DiscreteJoint


@dataclass(frozen=True)
class DiscreteAxes:
    """Grid analogue for tables: Y levels, adjacent X steps, W levels."""

    levels_y: tuple
    x_steps: tuple  # pairs (level_i, level_{i+1})
    levels_w: tuple

    def to_json(self) -> dict:
        return {"ys": [str(v) for v in self.levels_y],
                "x_steps": [[str(a), str(b)] for a, b in self.x_steps],
                "ws": [str(v) for v in self.levels_w]}


@dataclass
class DependenceField:
    """Sampled dependence values plus provenance of how each was obtained.

    ``values`` is indexed [iy][ix] for marginal scope and [iy][ix][iw] for
    conditional scope; entries are floats for continuous models and exact
    ``Fraction``s for tables.  ``method`` is the dominant evaluation route;
    per-point exceptions (one-sided stencils at support edges) are listed in
    ``method_exceptions``.
    """

    kind: str  # "distribution" | "density"
    scope: str  # "conditional" | "marginal"
    grid: EvalGrid | DiscreteAxes
    values: list
    method: str
    method_exceptions: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, list):
                return [conv(u) for u in v]
            return float(v)

        return {"kind": self.kind, "scope": self.scope, "grid": self.grid.to_json(),
                "values": conv(self.values), "method": self.method,
                "method_exceptions": {str(k): v for k, v in self.method_exceptions.items()}}


# ---------------------------------------------------------------------------
# discrete (adjacent-level differencing)


def dist_dep_discrete(joint: DiscreteJoint, y, i: int, w="marginal") -> Fraction:
    """Adjacent-level dependence P(Y<=y | i+1, w) - P(Y<=y | i, w), exact.

    ``i`` is the 1-based index of the lower X level (1 <= i <= I-1), matching
    the differencing convention for ordinal X.  ``w`` is a W level, a set of
    W levels (the table is renormalized over the set), or "marginal".
    """
    if not 1 <= i <= joint.n_x - 1:
        raise TableError(f"x step index {i} outside 1..{joint.n_x - 1}")
    x_lo = joint.levels_x[i - 1]
    x_hi = joint.levels_x[i]
    cond = None if (isinstance(w, str) and w == "marginal") else w
    return joint.cdf_y(y, x_hi, cond) - joint.cdf_y(y, x_lo, cond)


def discrete_axes(joint: DiscreteJoint) -> DiscreteAxes:
    steps = tuple((joint.levels_x[i - 1], joint.levels_x[i]) for i in range(1, joint.n_x))
    return DiscreteAxes(joint.levels_y, steps, joint.levels_w)


def discrete_conditional_field(joint: DiscreteJoint) -> DependenceField:
    axes = discrete_axes(joint)
    values = [[[dist_dep_discrete(joint, y, i, w) for w in joint.levels_w]
               for i in range(1, joint.n_x)] for y in joint.levels_y]
    return DependenceField("distribution", "conditional", axes, values, "adjacent-difference")


def discrete_marginal_field(joint: DiscreteJoint) -> DependenceField:
    axes = discrete_axes(joint)
    values = [[dist_dep_discrete(joint, y, i, "marginal") for i in range(1, joint.n_x)]
              for y in joint.levels_y]
    return DependenceField("distribution", "marginal", axes, values, "adjacent-difference")


# ---------------------------------------------------------------------------
# continuous: conditional dependence


def _fd_spec(model: ContinuousModel, h0: float | None = None) -> DiffSpec:
    return DiffSpec(h0=h0, bounds=model.support_x) if h0 else DiffSpec(bounds=model.support_x)


def dist_dep_continuous(model: ContinuousModel, y: float, x: float, w: float | None = None,
                        quad: QuadratureSpec | None = None) -> float:
    """dF/dx of the conditional (w given) or marginalized (w None) CDF."""
    if w is None:
        return marginal_dist_dep(model, y, x, quad)
    if model.dcdf_y_dx is not None:
        return model.dcdf_y_dx(y, x, w)
    return central_diff(lambda xv: model.cdf_y_given_xw(y, xv, w), x, _fd_spec(model)).value


def marginal_dist_dep(model: ContinuousModel, y: float, x: float,
                      quad: QuadratureSpec | None = None) -> float:
    """dF(y|x)/dx: analytic when the family has a closed marginal, else a
    finite difference over the quadrature marginal with a noise-adapted step."""
    if model.dcdf_y_given_x_dx is not None:
        return model.dcdf_y_given_x_dx(y, x)
    quad = quad or QuadratureSpec()
    spec = _fd_spec(model, h0=noisy_step(quad.abs_tol))
    return central_diff(lambda xv: marginal_cdf_y_given_x(model, y, xv, quad), x, spec).value


def _density_edge_guard(model: ContinuousModel, y: float, x: float, w: float) -> None:
    lo, hi = model.support_y(x, w)
    h = noisy_step(0.0) * max(1.0, abs(y))
    if min(abs(y - lo), abs(y - hi)) < 10 * h:
        raise NonDifferentiablePointError(
            f"non-differentiable point: y={y} sits on a support edge of the density at "
            f"(x={x}, w={w})")


def density_dep(model: ContinuousModel, y: float, x: float, w: float | None = None,
                quad: QuadratureSpec | None = None) -> float:
    """df/dx of the conditional (or marginalized) response density.

    Support-edge points are rejected: differentiating across a density jump
    is meaningless at any step size.
    """
    if w is None:
        return marginal_density_dep(model, y, x, quad)
    _density_edge_guard(model, y, x, w)
    if model.dpdf_y_dx is not None:
        return model.dpdf_y_dx(y, x, w)

    def f(xv):
        return model.pdf_y_given_xw(y, xv, w)

    # a >10% density jump across the stencil marks a moving support edge
    h = noisy_step(0.0) * max(1.0, abs(x))
    f0 = f(x)
    if f0 > 0 and abs(f(x + h) - f(x - h)) > 0.1 * f0:
        raise NonDifferentiablePointError(
            f"non-differentiable point: density jumps across x={x} at (y={y}, w={w})")
    return central_diff(f, x, _fd_spec(model)).value


def marginal_density_dep(model: ContinuousModel, y: float, x: float,
                         quad: QuadratureSpec | None = None) -> float:
    if model.dpdf_y_given_x_dx is not None:
        return model.dpdf_y_given_x_dx(y, x)
    quad = quad or QuadratureSpec()
    spec = _fd_spec(model, h0=noisy_step(quad.abs_tol))
    return central_diff(lambda xv: marginal_pdf_y_given_x(model, y, xv, quad), x, spec).value


def background_shift_rate(model: ContinuousModel, w: float, x: float) -> float:
    """df(w|x)/dx, analytic when the family provides it."""
    if model.dpdf_w_dx is not None:
        return model.dpdf_w_dx(w, x)
    return central_diff(lambda xv: model.pdf_w_given_x(w, xv), x, _fd_spec(model)).value


def _cond_dep_integrand(model: ContinuousModel, y: float, x: float):
    if model.dcdf_y_dx is not None:
        return lambda w: model.dcdf_y_dx(y, x, w)
    spec = _fd_spec(model)
    return lambda w: central_diff(lambda xv: model.cdf_y_given_xw(y, xv, w), x, spec).value


def averaged_dist_dep(model: ContinuousModel, y: float, x: float,
                      quad: QuadratureSpec | None = None) -> float:
    """E over W given X=x of the conditional dependence at (y, x, W)."""
    quad = quad or QuadratureSpec()
    dep = _cond_dep_integrand(model, y, x)
    lo, hi = model.support_w(x)
    return integrate(lambda w: dep(w) * model.pdf_w_given_x(w, x), lo, hi, quad,
                     breakpoints=model.w_kinks(y, x)).value


def averaged_density_dep(model: ContinuousModel, y: float, x: float,
                         quad: QuadratureSpec | None = None) -> float:
    """E over W given X=x of the conditional density dependence at (y, x, W)."""
    quad = quad or QuadratureSpec()
    if model.dpdf_y_dx is not None:
        def ddep(w):
            return model.dpdf_y_dx(y, x, w)
    else:
        spec = _fd_spec(model)

        def ddep(w):
            return central_diff(lambda xv: model.pdf_y_given_xw(y, xv, w), x, spec).value

    lo, hi = model.support_w(x)
    return integrate(lambda w: ddep(w) * model.pdf_w_given_x(w, x), lo, hi, quad,
                     breakpoints=model.w_kinks(y, x)).value


def decomposition_terms(model: ContinuousModel, y: float, x: float,
                        quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Split dF(y|x)/dx into (averaged conditional derivative, background term).

    term_avg     = integral of dF(y|x,w)/dx * f(w|x) dw
    term_residual = integral of F(y|x,w) * df(w|x)/dx dw

    Their sum equals the marginal dependence; the residual term vanishing at
    every (y, x) is exactly averaged collapsibility.
    """
    quad = quad or QuadratureSpec()
    term_avg = averaged_dist_dep(model, y, x, quad)
    lo, hi = model.support_w(x)
    term_residual = integrate(
        lambda w: model.cdf_y_given_xw(y, x, w) * background_shift_rate(model, w, x),
        lo, hi, quad, breakpoints=model.w_kinks(y, x)).value
    return term_avg, term_residual


# ---------------------------------------------------------------------------
# field construction over grids


def _dep_method(model: ContinuousModel, kind: str, scope: str) -> str:
    if scope == "marginal":
        if kind == "distribution":
            hook = model.dcdf_y_given_x_dx
        else:
            hook = model.dpdf_y_given_x_dx
        if hook is not None:
            return model.x_derivative_method
        return "finite-difference"
    hook = model.dcdf_y_dx if kind == "distribution" else model.dpdf_y_dx
    return model.x_derivative_method if hook is not None else "finite-difference"


def continuous_conditional_field(model: ContinuousModel, grid: EvalGrid,
                                 kind: str = "distribution",
                                 quad: QuadratureSpec | None = None) -> DependenceField:
    point = dist_dep_continuous if kind == "distribution" else density_dep
    values = [[[point(model, y, x, w, quad) for w in grid.ws] for x in grid.xs]
              for y in grid.ys]
    return DependenceField(kind, "conditional", grid, values, _dep_method(model, kind, "conditional"))


def continuous_marginal_field(model: ContinuousModel, grid: EvalGrid,
                              kind: str = "distribution",
                              quad: QuadratureSpec | None = None) -> DependenceField:
    point = marginal_dist_dep if kind == "distribution" else marginal_density_dep
    values = [[point(model, y, x, quad) for x in grid.xs] for y in grid.ys]
    return DependenceField(kind, "marginal", grid, values, _dep_method(model, kind, "marginal"))
