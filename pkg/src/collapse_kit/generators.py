"""Seeded random generators: tables, constrained table classes, continuous
models with random parameters, covariance matrices, and the brute-force
search for association-reversal tables.

Everything takes a ``random.Random`` (or a seed) so batches are reproducible;
constructions that must satisfy a property exactly (conditional independence,
background independence, homogeneity) build it in with rational arithmetic
rather than hoping a draw lands on it.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .errors import GeneratorBudgetError
from .models import ContinuousModel, ci_yw, indep_xw, linear_interaction, uniform_quadratic, uniform_shift
from .tables import DiscreteJoint, build_discrete_joint

# level-shape pool: 8..36 cells
TABLE_SHAPES = ((2, 2, 2), (3, 2, 2), (2, 2, 3), (3, 2, 3), (2, 3, 2),
                (3, 3, 2), (2, 3, 3), (4, 2, 2), (3, 3, 4))


def _rng(seed_or_rng) -> random.Random:
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


def _levels(n: int) -> tuple:
    return tuple(range(1, n + 1))


def _build(counts: dict) -> DiscreteJoint:
    return build_discrete_joint([(y, x, w, c) for (y, x, w), c in counts.items()])


def random_table(rng, shape=None, max_count: int = 60, binary_w: bool = False) -> DiscreteJoint:
    """Positive integer table over a random (or given) shape."""
    rng = _rng(rng)
    if shape is None:
        shape = rng.choice(TABLE_SHAPES)
    ny, nx, nw = shape
    if binary_w:
        nw = 2
    counts = {(y, x, w): rng.randint(1, max_count)
              for y in _levels(ny) for x in _levels(nx) for w in _levels(nw)}
    return _build(counts)


def ci_yw_table(rng, shape=None) -> DiscreteJoint:
    """Table with Y independent of W given X, exactly, by factorization.

    Cell counts are products a(y|x) * b(w|x) * c(x) of positive integers, so
    P(y | x, w) = a(y|x) / sum_y a(y|x) carries no w dependence.
    """
    rng = _rng(rng)
    if shape is None:
        shape = rng.choice(TABLE_SHAPES)
    ny, nx, nw = shape
    a = {(y, x): rng.randint(1, 9) for y in _levels(ny) for x in _levels(nx)}
    b = {(w, x): rng.randint(1, 9) for w in _levels(nw) for x in _levels(nx)}
    c = {x: rng.randint(1, 9) for x in _levels(nx)}
    counts = {(y, x, w): a[(y, x)] * b[(w, x)] * c[x]
              for y in _levels(ny) for x in _levels(nx) for w in _levels(nw)}
    return _build(counts)


def _composition(rng, total: int, parts: int) -> list[int]:
    """Positive integers summing to ``total`` (uniform over cut positions)."""
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    edges = [0, *cuts, total]
    return [edges[i + 1] - edges[i] for i in range(parts)]


def indep_xw_table(rng, shape=None, y_total: int = 24) -> DiscreteJoint:
    """Table with W independent of X, exactly.

    For each (x, w) cell the Y column is a random composition of a *fixed*
    total, so P(x, w) factorizes as c(x) * b(w) regardless of the Y draw.
    """
    rng = _rng(rng)
    if shape is None:
        shape = rng.choice(TABLE_SHAPES)
    ny, nx, nw = shape
    b = {w: rng.randint(1, 9) for w in _levels(nw)}
    c = {x: rng.randint(1, 9) for x in _levels(nx)}
    counts = {}
    for x in _levels(nx):
        for w in _levels(nw):
            col = _composition(rng, y_total, ny)
            for y, amount in zip(_levels(ny), col):
                counts[(y, x, w)] = amount * b[w] * c[x]
    return _build(counts)


def homogeneous_shift_table(rng, n_y: int = 3, n_w: int = 2) -> DiscreteJoint:
    """Binary-X table whose dependence is homogeneous over W by construction.

    Per W level a random base CDF is drawn at the first X level; the second
    X level applies one common shift profile to every W level.  The shift is
    scaled so all CDFs stay strictly monotone, and the X|W weights are drawn
    freely, so the table is generally neither collapsible nor averaged-
    collapsible -- it exercises the homogeneous-only region of the lattice.
    """
    rng = _rng(rng)

    def random_cdf() -> list[Fraction]:
        raw = [rng.randint(1, 9) for _ in range(n_y)]
        tot = sum(raw)
        acc = 0
        out = []
        for v in raw:
            acc += v
            out.append(Fraction(acc, tot))
        return out  # ends at 1

    base = {w: random_cdf() for w in _levels(n_w)}
    profile = [Fraction(rng.randint(-3, 3), 1) for _ in range(n_y - 1)] + [Fraction(0)]
    # scale the shift so every shifted CDF stays valid and strictly monotone
    min_gap = Fraction(1)
    for w in _levels(n_w):
        cdf = base[w]
        prev = Fraction(0)
        for v in cdf:
            min_gap = min(min_gap, v - prev)
            prev = v
    biggest = max((abs(p) for p in profile), default=Fraction(0))
    step_spread = max((abs(profile[k + 1] - profile[k]) for k in range(n_y - 1)),
                      default=Fraction(0))
    scale_bound = max(biggest * 4, step_spread * 4, Fraction(1))
    eps = min_gap / (2 * scale_bound)
    shift = [p * eps for p in profile]

    weights = {(x, w): Fraction(rng.randint(1, 9)) for x in (1, 2) for w in _levels(n_w)}
    counts = {}
    for w in _levels(n_w):
        for x in (1, 2):
            cdf = base[w] if x == 1 else [v + s for v, s in zip(base[w], shift)]
            prev = Fraction(0)
            for y, v in zip(_levels(n_y), cdf):
                counts[(y, x, w)] = (v - prev) * weights[(x, w)]
                prev = v
    return _build(counts)


def random_pd_covariance(rng) -> np.ndarray:
    """Random symmetric positive-definite 3x3 covariance (moderately scaled)."""
    rng = _rng(rng)
    a = np.array([[rng.gauss(0, 1) for _ in range(3)] for _ in range(4)])
    cov = a.T @ a / 4 + 0.05 * np.eye(3)
    scale = np.diag([rng.uniform(0.5, 2.0) for _ in range(3)])
    return scale @ cov @ scale


# ---------------------------------------------------------------------------
# continuous model draws


def random_ci_yw_model(rng) -> ContinuousModel:
    rng = _rng(rng)
    return ci_yw(intercept=rng.uniform(-1, 1),
                 coef_x=rng.uniform(0.5, 1.5) * rng.choice((-1, 1)),
                 noise_sd=rng.uniform(0.6, 1.5),
                 w_intercept=rng.uniform(-1, 1),
                 w_slope=rng.uniform(0.3, 1.2),
                 w_sd=rng.uniform(0.6, 1.5),
                 support_x=(-3.0, 3.0))


def random_indep_xw_model(rng) -> ContinuousModel:
    rng = _rng(rng)
    return indep_xw(coef_x=rng.uniform(0.5, 1.5),
                    coef_w=rng.uniform(-1.2, 1.2),
                    coef_xw=rng.uniform(-0.8, 0.8),
                    noise_sd=rng.uniform(0.6, 1.5),
                    w_mean=rng.uniform(-1, 1),
                    w_sd=rng.uniform(0.6, 1.5),
                    support_x=(-3.0, 3.0))


def random_linear_interaction_model(rng) -> ContinuousModel:
    rng = _rng(rng)
    return linear_interaction(coef_x=rng.uniform(0.5, 1.5),
                              coef_w=rng.uniform(-1.2, 1.2),
                              coef_xw=rng.uniform(0.2, 0.8) * rng.choice((-1, 1)),
                              noise_sd=rng.uniform(0.6, 1.5),
                              w_intercept=rng.uniform(-0.5, 0.5),
                              w_slope=rng.uniform(0.3, 1.2),
                              w_sd=rng.uniform(0.6, 1.5),
                              support_x=(-3.0, 3.0))


def random_uniform_shift_model(rng) -> ContinuousModel:
    return uniform_shift(support_x=(0.25, 4.0))


def random_uniform_quadratic_model(rng) -> ContinuousModel:
    return uniform_quadratic(support_x=(0.1, 2.0))


MODEL_DRAWS = {
    "uniform-quadratic": random_uniform_quadratic_model,
    "uniform-shift": random_uniform_shift_model,
    "linear-interaction": random_linear_interaction_model,
    "ci-yw": random_ci_yw_model,
    "indep-xw": random_indep_xw_model,
}


def sample_interior_points(model: ContinuousModel, rng, n: int,
                           y_band: tuple[float, float] = (0.15, 0.85)) -> list[tuple]:
    """(y, x, w) triples strictly inside all supports with healthy densities.

    x is uniform over the middle 80% of the x support; w over the central
    half of the background's truncated support (so Gaussian densities stay
    far above the floor); y sits in the central band of the conditional
    response support.
    """
    rng = _rng(rng)
    lo_x, hi_x = model.support_x
    pad_x = 0.1 * (hi_x - lo_x)
    pts = []
    while len(pts) < n:
        x = rng.uniform(lo_x + pad_x, hi_x - pad_x)
        w_lo, w_hi = model.support_w(x)
        mid = 0.5 * (w_lo + w_hi)
        half = 0.25 * (w_hi - w_lo)
        w = rng.uniform(mid - half, mid + half)
        y_lo, y_hi = model.support_y(x, w)
        u = rng.uniform(*y_band)
        y = y_lo + u * (y_hi - y_lo)
        if model.pdf_y_given_xw(y, x, w) > 1e-9:
            pts.append((y, x, w))
    return pts


# ---------------------------------------------------------------------------
# reversal search


def find_reversal_table(rng, max_cell: int = 100, max_trials: int = 200_000) -> tuple[DiscreteJoint, int]:
    """Random-search a 2x2x2 integer table showing association reversal.

    Both conditional adjacent differences share a (weak) sign with at least
    one strict, while the marginal difference lands strictly on the other
    side -- all verified in exact arithmetic.  Returns (table, trial index).
    """
    rng = _rng(rng)
    for trial in range(max_trials):
        cells = {(y, x, w): rng.randint(1, max_cell)
                 for y in (1, 2) for x in (1, 2) for w in (1, 2)}

        def cdf1(x, w=None):
            if w is None:
                num = cells[(1, x, 1)] + cells[(1, x, 2)]
                den = num + cells[(2, x, 1)] + cells[(2, x, 2)]
            else:
                num = cells[(1, x, w)]
                den = num + cells[(2, x, w)]
            return Fraction(num, den)

        d1 = cdf1(2, 1) - cdf1(1, 1)
        d2 = cdf1(2, 2) - cdf1(1, 2)
        dm = cdf1(2) - cdf1(1)
        if ((d1 <= 0 and d2 <= 0 and (d1 < 0 or d2 < 0) and dm > 0)
                or (d1 >= 0 and d2 >= 0 and (d1 > 0 or d2 > 0) and dm < 0)):
            return _build(cells), trial
    raise GeneratorBudgetError(
        f"no reversal table found in {max_trials} trials (max cell {max_cell})")
