"""Shared numerical kernel: central differences, adaptive quadrature, CDF inversion.

Everything here is a pure function of its inputs.  Derivatives and integrals
are returned together with an error proxy / bound so that downstream verdicts
can report how accurate their ingredients were.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .errors import (
    BracketError,
    DifferentiationError,
    NotACdfError,
    NumericalError,
    QuadratureError,
)

# eps^(1/3): the standard trade-off between truncation and rounding error
# for a two-point central difference of an accurately evaluable function.
DEFAULT_STEP = 2.0 ** (-52.0 / 3.0)

SCHEMES = ("central-2pt", "central-4pt")


def noisy_step(noise: float) -> float:
    """Differencing step for a function whose evaluations carry absolute `noise`.

    Minimizing noise/h + h^2/6 gives h = (3*noise)^(1/3); never go below the
    clean-evaluation default.
    """
    return max(DEFAULT_STEP, (3.0 * max(noise, 0.0)) ** (1.0 / 3.0))


@dataclass(frozen=True)
class DiffSpec:
    """How to difference: scheme, base step, and optional domain bounds.

    The actual step is ``h0 * max(1, |x|)``.  When bounds are given and the
    full central stencil does not fit, a second-order one-sided stencil is
    used instead (the result is flagged in ``method``).
    """

    scheme: str = "central-2pt"
    h0: float = DEFAULT_STEP
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (self.h0 > 0):
            raise ValueError("h0 must be positive")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise ValueError("bounds must be an increasing pair")


class DiffResult(NamedTuple):
    value: float
    error: float
    method: str


def _eval_checked(f: Callable[[float], float], x: float) -> float:
    v = f(x)
    if not math.isfinite(v):
        raise DifferentiationError(f"non-finite function value {v!r} at stencil point x={x!r}")
    return v


def central_diff(f: Callable[[float], float], x: float,
                 spec: DiffSpec | None = None) -> DiffResult:
    """Differentiate ``f`` at ``x``.

    Central scheme: 2-point (f(x+h)-f(x-h))/(2h) and its 4-point Richardson
    refinement; the error proxy is |2pt - 4pt|.  Falls back to a one-sided
    second-order stencil when the domain bounds cut off the central stencil.
    """
    spec = spec or DiffSpec()
    h = spec.h0 * max(1.0, abs(x))

    if spec.bounds is not None:
        lo, hi = spec.bounds
        if x < lo or x > hi:
            raise DifferentiationError(f"x={x!r} outside bounds {spec.bounds}")
        if x - 2 * h < lo or x + 2 * h > hi:
            return _one_sided_diff(f, x, h, lo, hi)

    fm2 = _eval_checked(f, x - 2 * h)
    fm1 = _eval_checked(f, x - h)
    fp1 = _eval_checked(f, x + h)
    fp2 = _eval_checked(f, x + 2 * h)
    two_pt = (fp1 - fm1) / (2 * h)
    four_pt = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    err = abs(two_pt - four_pt)
    value = two_pt if spec.scheme == "central-2pt" else four_pt
    return DiffResult(value, err, spec.scheme)


def _one_sided_diff(f, x, h, lo, hi) -> DiffResult:
    # second-order one-sided stencil into whichever side has room
    forward = (hi - x) >= (x - lo)
    s = 1.0 if forward else -1.0
    if forward and x + 2 * h > hi:
        h = max((hi - x) / 2, 1e-300)
    if not forward and x - 2 * h < lo:
        h = max((x - lo) / 2, 1e-300)
    f0 = _eval_checked(f, x)
    f1 = _eval_checked(f, x + s * h)
    f2 = _eval_checked(f, x + 2 * s * h)
    second_order = s * (-3 * f0 + 4 * f1 - f2) / (2 * h)
    first_order = s * (f1 - f0) / h
    return DiffResult(second_order, abs(second_order - first_order), "one-sided-2pt")


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-quadrature tolerances and (optional) domain truncation.

    ``min_panels`` forces an initial uniform split so that a feature narrower
    than the whole interval cannot hide between the first Simpson nodes.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    truncation: tuple[float, float] | None = None
    min_panels: int = 8

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.min_panels < 1:
            raise ValueError("min_panels must be >= 1")


class QuadResult(NamedTuple):
    value: float
    error: float


def _quad_eval(f, x):
    v = f(x)
    if not math.isfinite(v):
        raise NumericalError(f"non-finite integrand value {v!r} at x={x!r}")
    return v


def _adaptive(f, a, fa, m, fm, b, fb, whole, abs_tol, rel_tol, budget):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = _quad_eval(f, lm)
    frm = _quad_eval(f, rm)
    left = (m - a) * (fa + 4 * flm + fm) / 6
    right = (b - m) * (fm + 4 * frm + fb) / 6
    s2 = left + right
    err = (s2 - whole) / 15
    if abs(err) <= max(abs_tol, rel_tol * abs(s2)):
        return s2 + err, abs(err)
    budget[0] -= 1
    if budget[0] <= 0:
        raise QuadratureError("quadrature subdivision budget exhausted",
                              estimate=s2 + err, error_bound=abs(err))
    v1, e1 = _adaptive(f, a, fa, lm, flm, m, fm, left, abs_tol / 2, rel_tol, budget)
    v2, e2 = _adaptive(f, m, fm, rm, frm, b, fb, right, abs_tol / 2, rel_tol, budget)
    return v1 + v2, e1 + e2


def _panels(lo: float, hi: float, breakpoints: Sequence[float],
            min_panels: int = 1) -> list[tuple[float, float]]:
    cuts = sorted({p for p in breakpoints if lo < p < hi})
    edges = [lo, *cuts, hi]
    out = []
    max_width = (hi - lo) / min_panels
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        pieces = max(1, math.ceil((b - a) / max_width - 1e-12))
        for k in range(pieces):
            out.append((a + (b - a) * k / pieces, a + (b - a) * (k + 1) / pieces))
    return out


def integrate(f: Callable[[float], float], lo: float, hi: float,
              spec: QuadratureSpec | None = None,
              breakpoints: Sequence[float] = ()) -> QuadResult:
    """Integrate ``f`` over [lo, hi] by adaptive composite Simpson.

    ``breakpoints`` mark known kinks (support edges of piecewise integrands);
    the interval is split there first so the adaptive refinement never has to
    chase a discontinuity.  Raises ``QuadratureError`` carrying the best
    estimate when the subdivision budget runs out.
    """
    spec = spec or QuadratureSpec()
    if spec.truncation is not None:
        lo = max(lo, spec.truncation[0])
        hi = min(hi, spec.truncation[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NumericalError(f"integration interval [{lo}, {hi}] must be finite (truncate first)")
    if hi <= lo:
        return QuadResult(0.0, 0.0)

    panels = _panels(lo, hi, breakpoints, spec.min_panels)
    width = hi - lo
    budget = [spec.max_subdivisions]
    total = 0.0
    total_err = 0.0
    for a, b in panels:
        fa = _quad_eval(f, a)
        m = 0.5 * (a + b)
        fm = _quad_eval(f, m)
        fb = _quad_eval(f, b)
        whole = (b - a) * (fa + 4 * fm + fb) / 6
        share = max(spec.abs_tol * (b - a) / width, 1e-300)
        try:
            v, e = _adaptive(f, a, fa, m, fm, b, fb, whole, share, spec.rel_tol, budget)
        except QuadratureError as exc:
            partial = total + (exc.estimate if exc.estimate is not None else 0.0)
            raise QuadratureError(str(exc), estimate=partial,
                                  error_bound=(exc.error_bound or 0.0) + total_err) from None
        total += v
        total_err += e
    return QuadResult(total, total_err)


def _adaptive_pair(f, a, fa, m, fm, b, fb, whole, abs_tol, rel_tol, budget):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = tuple((m - a) * (fa[i] + 4 * flm[i] + fm[i]) / 6 for i in (0, 1))
    right = tuple((b - m) * (fm[i] + 4 * frm[i] + fb[i]) / 6 for i in (0, 1))
    s2 = (left[0] + right[0], left[1] + right[1])
    err = ((s2[0] - whole[0]) / 15, (s2[1] - whole[1]) / 15)
    worst = max(abs(err[0]), abs(err[1]))
    scale = max(abs(s2[0]), abs(s2[1]))
    if worst <= max(abs_tol, rel_tol * scale):
        return (s2[0] + err[0], s2[1] + err[1]), worst
    budget[0] -= 1
    if budget[0] <= 0:
        raise QuadratureError("quadrature subdivision budget exhausted",
                              estimate=s2[0] + err[0], error_bound=worst)
    v1, e1 = _adaptive_pair(f, a, fa, lm, flm, m, fm, left, abs_tol / 2, rel_tol, budget)
    v2, e2 = _adaptive_pair(f, m, fm, rm, frm, b, fb, right, abs_tol / 2, rel_tol, budget)
    return (v1[0] + v2[0], v1[1] + v2[1]), e1 + e2


def integrate_pair(f: Callable[[float], tuple[float, float]], lo: float, hi: float,
                   spec: QuadratureSpec | None = None,
                   breakpoints: Sequence[float] = ()) -> tuple[float, float, float]:
    """Integrate a pair of integrands on shared nodes; returns (v0, v1, err).

    Used for ratio estimands (posterior expectations) so that numerator and
    denominator see exactly the same quadrature nodes.
    """
    spec = spec or QuadratureSpec()
    if spec.truncation is not None:
        lo = max(lo, spec.truncation[0])
        hi = min(hi, spec.truncation[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NumericalError(f"integration interval [{lo}, {hi}] must be finite (truncate first)")
    if hi <= lo:
        return 0.0, 0.0, 0.0

    panels = _panels(lo, hi, breakpoints, spec.min_panels)
    width = hi - lo
    budget = [spec.max_subdivisions]
    t0 = t1 = terr = 0.0
    for a, b in panels:
        fa = f(a)
        m = 0.5 * (a + b)
        fm = f(m)
        fb = f(b)
        whole = tuple((b - a) * (fa[i] + 4 * fm[i] + fb[i]) / 6 for i in (0, 1))
        share = max(spec.abs_tol * (b - a) / width, 1e-300)
        (v0, v1), e = _adaptive_pair(f, a, fa, m, fm, b, fb, whole, share, spec.rel_tol, budget)
        t0 += v0
        t1 += v1
        terr += e
    return t0, t1, terr


def invert_cdf(cdf: Callable[[float], float], eta: float, lo: float, hi: float,
               value_tol: float = 1e-10, width_tol: float = 1e-12,
               max_iter: int = 256) -> float:
    """Solve F(y) = eta on the bracket [lo, hi].

    Safeguarded secant steps alternate with bisection so the bracket is never
    lost and shrinks geometrically.  Stops when |F(y)-eta| <= value_tol or the
    bracket is narrower than width_tol.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must satisfy 0 < eta < 1, got {eta!r}")
    flo = cdf(lo)
    fhi = cdf(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise NumericalError("non-finite CDF value at bracket endpoint")
    if not (flo <= eta <= fhi):
        raise BracketError(
            f"bracket [{lo}, {hi}] does not enclose eta={eta}: F(lo)={flo}, F(hi)={fhi}")

    use_secant = True
    for _ in range(max_iter):
        width = hi - lo
        if width <= width_tol:
            return 0.5 * (lo + hi)
        y = None
        if use_secant and fhi > flo:
            y = lo + (eta - flo) * width / (fhi - flo)
            if not (lo + 0.01 * width <= y <= hi - 0.01 * width):
                y = None
        if y is None:
            y = 0.5 * (lo + hi)
        fy = cdf(y)
        if not math.isfinite(fy):
            raise NumericalError(f"non-finite CDF value at y={y!r}")
        if fy < flo - 1e-12 or fy > fhi + 1e-12:
            raise NotACdfError("not a CDF: non-monotone samples detected")
        if abs(fy - eta) <= value_tol:
            return y
        if fy < eta:
            lo, flo = y, fy
        else:
            hi, fhi = y, fy
        use_secant = not use_secant
    raise NumericalError(f"CDF inversion did not converge in {max_iter} iterations")
