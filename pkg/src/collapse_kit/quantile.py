"""Quantile regression coefficients, total-effect decomposition, posterior
averaging identities, and the least-squares slope decomposition.

The coefficient q_x(y|x) = -dF(y|x)/dx / f(y|x) is the rate of change of the
y-quantile with x; conditional versions replace the marginal law with the
(x, w) law, and q_w / q_x(w|x) swap the differentiated variable.  Posterior
expectations over W given (y, x) are computed division-free on shared
quadrature nodes: the coefficient-times-density products reduce to plain
CDF derivatives, avoiding ratio-of-noisy-integrals bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collapse import TOL_SMOOTH, Verdict
from .errors import InputError, QuantileUndefinedError
from .models import (
    ContinuousModel,
    EvalGrid,
    auto_grid,
    marginal_pdf_y_given_x,
)
from .dependence import marginal_dist_dep
from .numerics import (
    DEFAULT_STEP,
    DiffSpec,
    QuadratureSpec,
    central_diff,
    integrate,
    integrate_pair,
    invert_cdf,
    noisy_step,
)

# below this density a coefficient is reported undefined rather than returned
# as an unstable huge ratio
DENSITY_FLOOR = 1e-12

# default tolerance for the averaged-coefficient identity checks
TOL_QUANTILE = 1e-5
EDGE_MARGIN_STEPS = 2


def _dcdf_y_dx(model: ContinuousModel, y: float, x: float, w: float) -> float:
    if model.dcdf_y_dx is not None:
        return model.dcdf_y_dx(y, x, w)
    spec = DiffSpec(bounds=model.support_x)
    return central_diff(lambda xv: model.cdf_y_given_xw(y, xv, w), x, spec).value


def _dcdf_y_dw(model: ContinuousModel, y: float, x: float, w: float) -> float:
    if model.dcdf_y_dw is not None:
        return model.dcdf_y_dw(y, x, w)
    spec = DiffSpec(bounds=model.support_w(x))
    return central_diff(lambda wv: model.cdf_y_given_xw(y, x, wv), w, spec).value


def _dcdf_w_dx(model: ContinuousModel, w: float, x: float) -> float:
    if model.dcdf_w_dx is not None:
        return model.dcdf_w_dx(w, x)
    spec = DiffSpec(bounds=model.support_x)
    return central_diff(lambda xv: model.cdf_w_given_x(w, xv), x, spec).value


def quantile_coeff(model: ContinuousModel, y: float, x: float, w: float | None = None,
                   quad: QuadratureSpec | None = None) -> float:
    """q_x at (y, x[, w]): minus the x-derivative of the CDF over the density.

    With ``w`` given this is the conditional coefficient; without it the
    marginal one.  Raises :class:`QuantileUndefinedError` when the local
    density is below the floor.
    """
    if w is not None:
        den = model.pdf_y_given_xw(y, x, w)
        if den <= DENSITY_FLOOR:
            raise QuantileUndefinedError(
                f"quantile coefficient undefined (null density) at (y={y}, x={x}, w={w})")
        return -_dcdf_y_dx(model, y, x, w) / den
    if model.pdf_y_given_x is not None:
        den = model.pdf_y_given_x(y, x)
    else:
        den = marginal_pdf_y_given_x(model, y, x, quad)
    if den <= DENSITY_FLOOR:
        raise QuantileUndefinedError(
            f"quantile coefficient undefined (null density) at (y={y}, x={x})")
    return -marginal_dist_dep(model, y, x, quad) / den


def quantile_coeff_w(model: ContinuousModel, y: float, x: float, w: float) -> float:
    """q_w at (y, x, w): same rule with the roles of x and w swapped."""
    den = model.pdf_y_given_xw(y, x, w)
    if den <= DENSITY_FLOOR:
        raise QuantileUndefinedError(
            f"quantile coefficient undefined (null density) at (y={y}, x={x}, w={w})")
    return -_dcdf_y_dw(model, y, x, w) / den


def quantile_coeff_x_of_w(model: ContinuousModel, w: float, x: float) -> float:
    """q_x for the background law: -dF(w|x)/dx / f(w|x)."""
    den = model.pdf_w_given_x(w, x)
    if den <= DENSITY_FLOOR:
        raise QuantileUndefinedError(
            f"quantile coefficient undefined (null density) at (w={w}, x={x})")
    return -_dcdf_w_dx(model, w, x) / den


def total_effect(model: ContinuousModel, y: float, x: float, w: float,
                 quad: QuadratureSpec | None = None) -> float:
    """Direct plus mediated effect: q_x(y|x,w) + q_w(y|x,w) * q_x(w|x)."""
    return (quantile_coeff(model, y, x, w, quad)
            + quantile_coeff_w(model, y, x, w) * quantile_coeff_x_of_w(model, w, x))


# ---------------------------------------------------------------------------
# posterior expectations (division-free, shared nodes)


def _posterior_parts(model: ContinuousModel, y: float, x: float,
                     quad: QuadratureSpec | None = None):
    """Shared-node integrals over w:

    returns (avg_dcdf_dx, crossed, norm) where
      avg_dcdf_dx = integral of dF(y|x,w)/dx * f(w|x) dw
      crossed     = integral of dF(y|x,w)/dw * dF(w|x)/dx dw
      norm        = integral of f(y|x,w) * f(w|x) dw   (the marginal density)

    E[q_x(y|x,W) | y, x]        = -avg_dcdf_dx / norm
    E[q_w q_x(W|x) | y, x]      =  crossed / norm
    """
    quad = quad or QuadratureSpec()
    lo, hi = model.support_w(x)
    bps = model.w_kinks(y, x)

    def pair_a(w):
        fw = model.pdf_w_given_x(w, x)
        return (_dcdf_y_dx(model, y, x, w) * fw,
                model.pdf_y_given_xw(y, x, w) * fw)

    avg, norm, _ = integrate_pair(pair_a, lo, hi, quad, breakpoints=bps)
    crossed = integrate(lambda w: _dcdf_y_dw(model, y, x, w) * _dcdf_w_dx(model, w, x),
                        lo, hi, quad, breakpoints=bps).value
    return avg, crossed, norm


def posterior_mean_total_effect(model: ContinuousModel, y: float, x: float,
                                quad: QuadratureSpec | None = None) -> float:
    """E over W given (y, x) of the total effect at (y, x, W)."""
    avg, crossed, norm = _posterior_parts(model, y, x, quad)
    if norm <= DENSITY_FLOOR:
        raise QuantileUndefinedError(f"null posterior: f(y|x) = 0 at (y={y}, x={x})")
    return (-avg + crossed) / norm


def cox_residual(model: ContinuousModel, y: float, x: float,
                 quad: QuadratureSpec | None = None) -> float:
    """q_x(y|x) minus the posterior average of the total effect.

    This is an identity for every valid model: a residual beyond numerical
    error indicates an evaluation bug, not a property of the model.
    """
    return quantile_coeff(model, y, x, None, quad) - posterior_mean_total_effect(model, y, x, quad)


def criterion_integral(model: ContinuousModel, y: float, x: float,
                       quad: QuadratureSpec | None = None) -> float:
    """integral of dF(y|x,w)/dw * dF(w|x)/dx dw (unnormalized).

    Vanishing at every (y, x) is equivalent to averaged collapsibility of the
    conditional quantile coefficient; dividing by f(y|x) gives the posterior
    mean of q_w * q_x(W|x).
    """
    quad = quad or QuadratureSpec()
    lo, hi = model.support_w(x)
    return integrate(lambda w: _dcdf_y_dw(model, y, x, w) * _dcdf_w_dx(model, w, x),
                     lo, hi, quad, breakpoints=model.w_kinks(y, x)).value


def check_a_collapsibility_quantile(model: ContinuousModel, grid: EvalGrid | None = None,
                                    tol: float | None = None,
                                    quad: QuadratureSpec | None = None) -> Verdict:
    """Does q_x(y|x) equal the posterior average of q_x(y|x, W)?

    Two forms are computed at every point: the definition (marginal minus
    averaged conditional coefficient) and the equivalent posterior mean of
    q_w * q_x(W|x); their agreement is recorded in the notes.  Points where
    the marginal density is below the floor are skipped and counted.
    """
    tol = TOL_QUANTILE if tol is None else tol
    grid = grid if grid is not None else auto_grid(model)
    skipped = 0
    rows = []
    form_gap = 0.0
    for y in grid.ys:
        for x in grid.xs:
            avg, crossed, norm = _posterior_parts(model, y, x, quad)
            if norm <= DENSITY_FLOOR:
                skipped += 1
                continue
            try:
                qx_marg = quantile_coeff(model, y, x, None, quad)
            except QuantileUndefinedError:
                skipped += 1
                continue
            defect = qx_marg - (-avg / norm)
            alt = crossed / norm
            form_gap = max(form_gap, abs(defect - alt))
            rows.append((defect, {"y": y, "x": x, "marginal_coeff": qx_marg,
                                  "averaged_coeff": -avg / norm,
                                  "posterior_mean_product": alt}))
    if not rows:
        raise InputError("quantile collapsibility check: no evaluable grid points")
    verdict = Verdict.from_items("quantile-a-collapsibility", rows, tol,
                                 {"mode": "grid", "skipped_points": skipped,
                                  "form_agreement_gap": form_gap})
    return verdict


def pointwise_product_field(model: ContinuousModel, grid: EvalGrid | None = None,
                            quad: QuadratureSpec | None = None):
    """Field of q_w(y|x,w) * q_x(w|x) over the grid (None where undefined).

    For a family whose posterior laws are declared complete, averaged
    collapsibility of the quantile coefficient forces this field to vanish,
    which is the checkable face of the necessity direction.
    """
    grid = grid if grid is not None else auto_grid(model)
    values = []
    for y in grid.ys:
        plane = []
        for x in grid.xs:
            row = []
            for w in grid.ws:
                try:
                    row.append(quantile_coeff_w(model, y, x, w)
                               * quantile_coeff_x_of_w(model, w, x))
                except QuantileUndefinedError:
                    row.append(None)
            plane.append(row)
        values.append(plane)
    return values


# ---------------------------------------------------------------------------
# quantile functions


def quantile_function(model: ContinuousModel, eta: float, x: float,
                      w: float | None = None,
                      quad: QuadratureSpec | None = None) -> float:
    """y with F(y | x[, w]) = eta, by bracketed inversion."""
    if w is not None:
        lo, hi = model.support_y(x, w)
        return invert_cdf(lambda yv: model.cdf_y_given_xw(yv, x, w), eta, lo, hi)
    spans = [model.support_y(x, wv) for wv in _w_probe(model, x)]
    lo = min(s[0] for s in spans)
    hi = max(s[1] for s in spans)
    if model.cdf_y_given_x is not None:
        return invert_cdf(lambda yv: model.cdf_y_given_x(yv, x), eta, lo, hi)
    from .models import marginal_cdf_y_given_x
    return invert_cdf(lambda yv: marginal_cdf_y_given_x(model, yv, x, quad), eta, lo, hi,
                      value_tol=1e-8)


def _w_probe(model: ContinuousModel, x: float, n: int = 9):
    lo, hi = model.support_w(x)
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def quantile_slope_identity(model: ContinuousModel, eta: float, x: float,
                            w: float | None = None,
                            quad: QuadratureSpec | None = None) -> dict:
    """Compare d/dx of the eta-quantile against q_x evaluated at the quantile.

    Returns the finite-difference slope, the coefficient, and their gap; the
    two agree by implicit differentiation of F(y_eta(x) | x) = eta.
    """
    h0 = noisy_step(1e-9)
    spec = DiffSpec(h0=h0, bounds=model.support_x)
    slope = central_diff(lambda xv: quantile_function(model, eta, xv, w, quad), x, spec).value
    y_at = quantile_function(model, eta, x, w, quad)
    coeff = quantile_coeff(model, y_at, x, w, quad)
    return {"eta": eta, "x": x, "w": w, "y": y_at, "slope_fd": slope,
            "coefficient": coeff, "gap": abs(slope - coeff)}


# ---------------------------------------------------------------------------
# w-free total effect (transfer to the marginal coefficient)


def check_total_effect_transfer(model: ContinuousModel, grid: EvalGrid | None = None,
                                tol: float | None = None,
                                quad: QuadratureSpec | None = None) -> Verdict:
    """Where the total effect does not depend on w, it must equal q_x(y|x).

    At each (y, x) the w-spread of the total effect is measured; points with
    spread within tolerance assert the transfer, the rest only report that
    the premise fails (no assertion is made there).
    """
    tol = TOL_QUANTILE if tol is None else tol
    grid = grid if grid is not None else auto_grid(model)
    rows = []
    premise_failed = 0
    skipped = 0
    for y in grid.ys:
        for x in grid.xs:
            deltas = []
            for w in grid.ws:
                try:
                    deltas.append(total_effect(model, y, x, w, quad))
                except QuantileUndefinedError:
                    continue
            if len(deltas) < 2:
                skipped += 1
                continue
            spread = max(deltas) - min(deltas)
            if spread > tol:
                premise_failed += 1
                continue
            try:
                qx_marg = quantile_coeff(model, y, x, None, quad)
            except QuantileUndefinedError:
                skipped += 1
                continue
            delta = sum(deltas) / len(deltas)
            rows.append((qx_marg - delta, {"y": y, "x": x, "total_effect": delta,
                                           "marginal_coeff": qx_marg, "w_spread": spread}))
    notes = {"mode": "grid", "premise_failed_points": premise_failed,
             "skipped_points": skipped}
    if not rows:
        notes["status"] = "premise holds nowhere; nothing to assert"
        return Verdict("total-effect-transfer", True, 0.0, None, float(tol), notes)
    return Verdict.from_items("total-effect-transfer", rows, tol, notes)


# ---------------------------------------------------------------------------
# least-squares slope decomposition


@dataclass
class CochranDecomposition:
    """Simple-regression slope split into direct and mediated parts.

    ``beta_yx`` is the slope of Y on X alone; ``beta_yx_w`` and ``beta_yw_x``
    come from the two-regressor fit; ``beta_wx`` is the slope of W on X.
    ``residual`` is beta_yx - (beta_yx_w + beta_yw_x * beta_wx), zero up to
    rounding for any least-squares fit.
    """

    beta_yx: float
    beta_yx_w: float
    beta_yw_x: float
    beta_wx: float
    residual: float

    def to_json(self) -> dict:
        return {"beta_yx": self.beta_yx, "beta_yx_w": self.beta_yx_w,
                "beta_yw_x": self.beta_yw_x, "beta_wx": self.beta_wx,
                "residual": self.residual}


def cochran_decompose(cov) -> CochranDecomposition:
    """Decompose from a 3x3 covariance of (Y, X, W)."""
    c = np.asarray(cov, dtype=float)
    if c.shape != (3, 3):
        raise InputError(f"covariance must be 3x3 (Y, X, W), got shape {c.shape}")
    s_yx, s_yw, s_xw = c[0, 1], c[0, 2], c[1, 2]
    var_x, var_w = c[1, 1], c[2, 2]
    if var_x <= 0:
        raise InputError("collinear regressors: Var(X) must be positive")
    gram = np.array([[var_x, s_xw], [s_xw, var_w]])
    det = var_x * var_w - s_xw * s_xw
    if det <= 1e-14 * max(var_x * var_w, 1.0):
        raise InputError("collinear regressors: the (X, W) Gram matrix is singular")
    beta_yx = s_yx / var_x
    beta_wx = s_xw / var_x
    sol = np.linalg.solve(gram, np.array([s_yx, s_yw]))
    beta_yx_w, beta_yw_x = float(sol[0]), float(sol[1])
    residual = beta_yx - (beta_yx_w + beta_yw_x * beta_wx)
    return CochranDecomposition(float(beta_yx), beta_yx_w, beta_yw_x,
                                float(beta_wx), float(residual))


def cochran_from_samples(data) -> CochranDecomposition:
    """Decompose from an (n, 3) sample with columns (Y, X, W); n >= 3."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InputError(f"sample must have 3 columns (Y, X, W), got shape {arr.shape}")
    if arr.shape[0] < 3:
        raise InputError(f"need at least 3 sample rows, got {arr.shape[0]}")
    cov = np.cov(arr, rowvar=False, ddof=1)
    return cochran_decompose(cov)


# ---------------------------------------------------------------------------
# profiles


@dataclass
class QuantileProfile:
    """All quantile coefficients and the total effect sampled on a grid.

    Conditional arrays are indexed [iy][ix][iw]; the marginal coefficient
    [iy][ix]; the background coefficient [ix][iw].  Entries are ``None``
    where a coefficient is undefined (density at or below the floor, or a
    support-edge margin of two differencing steps).
    """

    grid: EvalGrid
    q_x_marginal: list
    q_x_cond: list
    q_w_cond: list
    q_x_w: list
    delta: list
    skipped_points: int

    def to_json(self) -> dict:
        return {"grid": self.grid.to_json(), "q_x_marginal": self.q_x_marginal,
                "q_x_cond": self.q_x_cond, "q_w_cond": self.q_w_cond,
                "q_x_w": self.q_x_w, "delta": self.delta,
                "skipped_points": self.skipped_points}


def _inside_margin(model: ContinuousModel, y: float, x: float, w: float) -> bool:
    lo, hi = model.support_y(x, w)
    pad = EDGE_MARGIN_STEPS * DEFAULT_STEP * max(1.0, abs(y))
    return lo + pad < y < hi - pad


def build_quantile_profile(model: ContinuousModel, grid: EvalGrid | None = None,
                           quad: QuadratureSpec | None = None) -> QuantileProfile:
    grid = grid if grid is not None else auto_grid(model)
    skipped = 0

    q_x_w = []
    for x in grid.xs:
        row = []
        for w in grid.ws:
            try:
                row.append(quantile_coeff_x_of_w(model, w, x))
            except QuantileUndefinedError:
                row.append(None)
        q_x_w.append(row)

    q_x_marg = []
    q_x_cond = []
    q_w_cond = []
    delta = []
    for y in grid.ys:
        marg_row = []
        cond_plane = []
        w_plane = []
        d_plane = []
        for ix, x in enumerate(grid.xs):
            try:
                marg_row.append(quantile_coeff(model, y, x, None, quad))
            except QuantileUndefinedError:
                marg_row.append(None)
            cond_row = []
            w_row = []
            d_row = []
            for iw, w in enumerate(grid.ws):
                if not _inside_margin(model, y, x, w):
                    skipped += 1
                    cond_row.append(None)
                    w_row.append(None)
                    d_row.append(None)
                    continue
                try:
                    qx = quantile_coeff(model, y, x, w, quad)
                    qw = quantile_coeff_w(model, y, x, w)
                except QuantileUndefinedError:
                    skipped += 1
                    cond_row.append(None)
                    w_row.append(None)
                    d_row.append(None)
                    continue
                cond_row.append(qx)
                w_row.append(qw)
                qxw = q_x_w[ix][iw]
                d_row.append(None if qxw is None else qx + qw * qxw)
            cond_plane.append(cond_row)
            w_plane.append(w_row)
            d_plane.append(d_row)
        q_x_marg.append(marg_row)
        q_x_cond.append(cond_plane)
        q_w_cond.append(w_plane)
        delta.append(d_plane)
    return QuantileProfile(grid, q_x_marg, q_x_cond, q_w_cond, q_x_w, delta, skipped)
