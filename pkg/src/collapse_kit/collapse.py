"""Verdict engine: homogeneity, collapsibility (plain/uniform/averaged),
independence checks, class membership, and Yule-Simpson reversal detection.

Discrete inputs are judged with exact rational arithmetic (tolerance 0 means
*identically zero* violation); continuous inputs are judged on an evaluation
grid at tolerances matched to the numerical error each family can achieve.
Every verdict records the violation magnitude, the witness point attaining
it when the property fails, and the tolerance used, so a "holds" is always
interpretable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .dependence import (
    averaged_density_dep,
    averaged_dist_dep,
    background_shift_rate,
    dist_dep_continuous,
    dist_dep_discrete,
    marginal_density_dep,
    marginal_dist_dep,
)
from .errors import InputError, TableError, ZeroMassError
from .models import ContinuousModel, EvalGrid, auto_grid
from .numerics import QuadratureSpec, integrate
from .tables import DiscreteJoint

# pinned default tolerances: discrete checks are exact; continuous checks are
# quadrature-limited unless the family clamps its support (kinked CDFs), in
# which case finite differences near the clamp dominate the error budget
TOL_EXACT = 0.0
TOL_SMOOTH = 1e-6
TOL_CLAMPED = 1e-3
TOL_REVERSAL = 1e-9


@dataclass
class Verdict:
    """Outcome of a single checked property.

    ``holds`` is equivalent to ``max_violation <= tolerance``; ``witness`` is
    the grid point attaining the violation and is present only on failure.
    """

    property: str
    holds: bool
    max_violation: float
    witness: dict | None
    tolerance: float
    notes: dict = field(default_factory=dict)

    @staticmethod
    def from_items(prop: str, items: Iterable[tuple], tolerance, notes=None) -> "Verdict":
        """Build from (violation, witness) pairs; violations may be Fractions."""
        worst = None
        worst_witness = None
        count = 0
        for violation, witness in items:
            count += 1
            mag = abs(violation)
            if worst is None or mag > worst:
                worst = mag
                worst_witness = witness
        if worst is None:
            raise InputError(f"{prop}: no evaluable points")
        holds = worst <= tolerance
        out_notes = dict(notes or {})
        out_notes.setdefault("points_evaluated", count)
        return Verdict(prop, holds, float(worst), None if holds else worst_witness,
                       float(tolerance), out_notes)

    def to_json(self) -> dict:
        return {"property": self.property, "holds": self.holds,
                "max_violation": self.max_violation, "witness": self.witness,
                "tolerance": self.tolerance, "notes": self.notes}


@dataclass
class ClassMembership:
    """Which dependence classes a model falls into, plus the two
    independence conditions that imply averaged collapsibility."""

    homogeneous: bool
    collapsible: bool
    a_collapsible: bool
    ci_y_w_given_x: bool  # condition (i)
    indep_x_w: bool  # condition (ii)

    def to_json(self) -> dict:
        return {"homogeneous": self.homogeneous, "collapsible": self.collapsible,
                "a_collapsible": self.a_collapsible,
                "ci_y_w_given_x": self.ci_y_w_given_x, "indep_x_w": self.indep_x_w}


@dataclass
class MembershipReport:
    membership: ClassMembership
    verdicts: dict
    flags: list

    def to_json(self) -> dict:
        return {"membership": self.membership.to_json(),
                "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
                "flags": list(self.flags)}


def _default_tol(source, tol):
    if tol is not None:
        return tol
    if isinstance(source, DiscreteJoint):
        return TOL_EXACT
    return TOL_CLAMPED if source.clamped_support else TOL_SMOOTH


def _need_grid(model: ContinuousModel, grid: EvalGrid | None) -> EvalGrid:
    return grid if grid is not None else auto_grid(model)


def _x_steps(joint: DiscreteJoint):
    return [(i, joint.levels_x[i - 1], joint.levels_x[i]) for i in range(1, joint.n_x)]


# ---------------------------------------------------------------------------
# homogeneity


def check_homogeneity(source, grid: EvalGrid | None = None, tol: float | None = None,
                      quad: QuadratureSpec | None = None) -> Verdict:
    """Does the conditional dependence take one value across W at each (y, x)?"""
    tol = _default_tol(source, tol)
    if isinstance(source, DiscreteJoint):
        joint = source
        if joint.n_w < 2:
            raise TableError("homogeneity undefined: W has a single level")

        def items():
            for y in joint.levels_y:
                for i, x_lo, x_hi in _x_steps(joint):
                    deps = [(w, dist_dep_discrete(joint, y, i, w)) for w in joint.levels_w]
                    for a in range(len(deps)):
                        for b in range(a + 1, len(deps)):
                            w_a, d_a = deps[a]
                            w_b, d_b = deps[b]
                            yield d_a - d_b, {"y": str(y), "x_step": [str(x_lo), str(x_hi)],
                                              "w": str(w_a), "w_prime": str(w_b),
                                              "values": [float(d_a), float(d_b)]}

        return Verdict.from_items("homogeneity", items(), tol, {"mode": "exact-rational"})

    model = source
    grid = _need_grid(model, grid)
    if len(grid.ws) < 2:
        raise InputError("homogeneity undefined: need at least 2 w grid points")

    def items():
        for y in grid.ys:
            for x in grid.xs:
                deps = [(w, dist_dep_continuous(model, y, x, w, quad)) for w in grid.ws]
                vals = [d for _, d in deps]
                lo = min(range(len(vals)), key=vals.__getitem__)
                hi = max(range(len(vals)), key=vals.__getitem__)
                yield vals[hi] - vals[lo], {"y": y, "x": x, "w": deps[hi][0],
                                            "w_prime": deps[lo][0],
                                            "values": [vals[hi], vals[lo]]}

    return Verdict.from_items("homogeneity", items(), tol, {"mode": "grid"})


# ---------------------------------------------------------------------------
# collapsibility


def check_collapsibility(source, grid: EvalGrid | None = None, tol: float | None = None,
                         quad: QuadratureSpec | None = None) -> Verdict:
    """Does the conditional dependence equal the marginal dependence everywhere?"""
    tol = _default_tol(source, tol)
    if isinstance(source, DiscreteJoint):
        joint = source

        def items():
            for y in joint.levels_y:
                for i, x_lo, x_hi in _x_steps(joint):
                    marg = dist_dep_discrete(joint, y, i, "marginal")
                    for w in joint.levels_w:
                        cond = dist_dep_discrete(joint, y, i, w)
                        yield cond - marg, {"y": str(y), "x_step": [str(x_lo), str(x_hi)],
                                            "w": str(w), "conditional": float(cond),
                                            "marginal": float(marg)}

        return Verdict.from_items("collapsibility", items(), tol, {"mode": "exact-rational"})

    model = source
    grid = _need_grid(model, grid)

    def items():
        for y in grid.ys:
            for x in grid.xs:
                marg = marginal_dist_dep(model, y, x, quad)
                for w in grid.ws:
                    cond = dist_dep_continuous(model, y, x, w, quad)
                    yield cond - marg, {"y": y, "x": x, "w": w,
                                        "conditional": cond, "marginal": marg}

    return Verdict.from_items("collapsibility", items(), tol, {"mode": "grid"})


def _contiguous_w_sets(levels_w: tuple):
    n = len(levels_w)
    for a in range(n):
        for b in range(a, n):
            yield levels_w[a:b + 1]


def check_uniform_collapsibility(joint: DiscreteJoint, tol: float | None = None) -> Verdict:
    """Collapsibility after conditioning on every contiguous W interval.

    Discrete ordinal W only.  Interval sets with a zero-mass (x, W in A) cell
    are skipped and listed in the verdict notes.
    """
    if not isinstance(joint, DiscreteJoint):
        raise InputError("uniform collapsibility requires a discrete table with ordinal W")
    if joint.n_w < 2:
        raise TableError("uniform collapsibility undefined: W has a single level")
    tol = TOL_EXACT if tol is None else tol
    skipped = []

    def items():
        for subset in _contiguous_w_sets(joint.levels_w):
            for y in joint.levels_y:
                for i, x_lo, x_hi in _x_steps(joint):
                    marg = dist_dep_discrete(joint, y, i, "marginal")
                    try:
                        cond = dist_dep_discrete(joint, y, i, set(subset))
                    except ZeroMassError as exc:
                        skipped.append({"w_set": [str(w) for w in subset], "reason": str(exc)})
                        continue
                    yield cond - marg, {"y": str(y), "x_step": [str(x_lo), str(x_hi)],
                                        "w_set": [str(w) for w in subset],
                                        "conditional": float(cond), "marginal": float(marg)}

    verdict = Verdict.from_items("uniform-collapsibility", items(), tol,
                                 {"mode": "exact-rational"})
    if skipped:
        verdict.notes["skipped_w_sets"] = skipped
    return verdict


# ---------------------------------------------------------------------------
# averaged (A-) collapsibility


def check_a_collapsibility(source, grid: EvalGrid | None = None, tol: float | None = None,
                           quad: QuadratureSpec | None = None) -> Verdict:
    """Does the conditional dependence, averaged over W given X, match the
    marginal dependence?

    Discrete tables average under W | X = lower level of each step (the
    convention that makes the worked 2x2x2 example exact); continuous models
    integrate the conditional derivative against f(w|x).
    """
    tol = _default_tol(source, tol)
    if isinstance(source, DiscreteJoint):
        joint = source

        def items():
            for i, x_lo, x_hi in _x_steps(joint):
                weights = [(w, joint.p_w_given_x(w, x_lo)) for w in joint.levels_w]
                for y in joint.levels_y:
                    marg = dist_dep_discrete(joint, y, i, "marginal")
                    avg = Fraction(0)
                    for w, p in weights:
                        if p == 0:
                            continue
                        avg += dist_dep_discrete(joint, y, i, w) * p
                    yield avg - marg, {"y": str(y), "x_step": [str(x_lo), str(x_hi)],
                                       "averaged": float(avg), "marginal": float(marg)}

        return Verdict.from_items("a-collapsibility", items(), tol,
                                  {"mode": "exact-rational",
                                   "averaging": "W given lower x level"})

    model = source
    grid = _need_grid(model, grid)

    def items():
        for y in grid.ys:
            for x in grid.xs:
                avg = averaged_dist_dep(model, y, x, quad)
                marg = marginal_dist_dep(model, y, x, quad)
                yield avg - marg, {"y": y, "x": x, "averaged": avg, "marginal": marg}

    return Verdict.from_items("a-collapsibility", items(), tol, {"mode": "grid"})


def residual_integral(model: ContinuousModel, y: float, x: float,
                      quad: QuadratureSpec | None = None) -> float:
    """integral of F(y|x,w) * df(w|x)/dx dw.

    Averaged collapsibility of the distribution dependence holds on a region
    exactly when this vanishes at every (y, x) in it.
    """
    quad = quad or QuadratureSpec()
    lo, hi = model.support_w(x)
    return integrate(lambda w: model.cdf_y_given_xw(y, x, w) * background_shift_rate(model, w, x),
                     lo, hi, quad, breakpoints=model.w_kinks(y, x)).value


def check_density_a_collapsibility(model: ContinuousModel, grid: EvalGrid | None = None,
                                   tol: float | None = None,
                                   quad: QuadratureSpec | None = None) -> Verdict:
    """Necessary condition: averaged df(y|x,W)/dx must match df(y|x)/dx.

    If this fails, averaged collapsibility of the distribution dependence
    must fail as well; it acts as a cheap filter.
    """
    if not isinstance(model, ContinuousModel):
        raise InputError("density dependence checks require a continuous model")
    tol = TOL_CLAMPED if tol is None else tol
    grid = _need_grid(model, grid)

    def items():
        for y in grid.ys:
            for x in grid.xs:
                avg = averaged_density_dep(model, y, x, quad)
                marg = marginal_density_dep(model, y, x, quad)
                yield avg - marg, {"y": y, "x": x, "averaged": avg, "marginal": marg}

    return Verdict.from_items("density-a-collapsibility", items(), tol, {"mode": "grid"})


# ---------------------------------------------------------------------------
# independence checks


def check_independence(source, which: str, grid: EvalGrid | None = None,
                       tol: float | None = None,
                       quad: QuadratureSpec | None = None) -> Verdict:
    """Check Y independent of W given X ("y_w_given_x") or X of W ("x_w")."""
    if which not in ("y_w_given_x", "x_w"):
        raise InputError(f'which must be "y_w_given_x" or "x_w", got {which!r}')
    tol = _default_tol(source, tol)
    if isinstance(source, DiscreteJoint):
        joint = source
        if which == "y_w_given_x":
            def items():
                for x in joint.levels_x:
                    for y in joint.levels_y:
                        marg = joint.cdf_y(y, x)
                        for w in joint.levels_w:
                            cond = joint.cdf_y(y, x, w)
                            yield cond - marg, {"y": str(y), "x": str(x), "w": str(w),
                                                "conditional": float(cond),
                                                "marginal": float(marg)}

            return Verdict.from_items("independence-y-w-given-x", items(), tol,
                                      {"mode": "exact-rational"})

        def items():
            for w in joint.levels_w:
                overall = joint.p_w(w)
                for x in joint.levels_x:
                    cond = joint.p_w_given_x(w, x)
                    yield cond - overall, {"w": str(w), "x": str(x),
                                           "conditional": float(cond),
                                           "marginal": float(overall)}

        return Verdict.from_items("independence-x-w", items(), tol,
                                  {"mode": "exact-rational"})

    model = source
    grid = _need_grid(model, grid)
    if which == "y_w_given_x":
        def items():
            for y in grid.ys:
                for x in grid.xs:
                    if model.cdf_y_given_x is not None:
                        marg = model.cdf_y_given_x(y, x)
                    else:
                        from .models import marginal_cdf_y_given_x
                        marg = marginal_cdf_y_given_x(model, y, x, quad)
                    for w in grid.ws:
                        cond = model.cdf_y_given_xw(y, x, w)
                        yield cond - marg, {"y": y, "x": x, "w": w,
                                            "conditional": cond, "marginal": marg}

        return Verdict.from_items("independence-y-w-given-x", items(), tol, {"mode": "grid"})

    # no law for X is declared, so compare f(w|x) against its average over the
    # x grid; zero spread on the grid is the checkable content of W indep X
    def items():
        for w in grid.ws:
            vals = [model.pdf_w_given_x(w, x) for x in grid.xs]
            ref = sum(vals) / len(vals)
            for x, v in zip(grid.xs, vals):
                yield v - ref, {"w": w, "x": x, "density": v, "reference_mean": ref}

    return Verdict.from_items("independence-x-w", items(), tol,
                              {"mode": "grid", "reference": "mean over x grid"})


# ---------------------------------------------------------------------------
# class membership, sufficiency/necessity consistency


def classify(source, grid: EvalGrid | None = None, tol: float | None = None,
             quad: QuadratureSpec | None = None) -> MembershipReport:
    """Run the full battery and report class membership plus logical flags.

    Flags report *internal inconsistencies*: an independence condition holding
    while averaged collapsibility fails would contradict sufficiency; for a
    binary background, averaged collapsibility without either condition
    contradicts the converse.  For non-binary W the converse does not apply
    and is flagged as such instead.
    """
    verdicts = {
        "homogeneity": check_homogeneity(source, grid, tol, quad),
        "collapsibility": check_collapsibility(source, grid, tol, quad),
        "a_collapsibility": check_a_collapsibility(source, grid, tol, quad),
        "independence_y_w_given_x": check_independence(source, "y_w_given_x", grid, tol, quad),
        "independence_x_w": check_independence(source, "x_w", grid, tol, quad),
    }
    membership = ClassMembership(
        homogeneous=verdicts["homogeneity"].holds,
        collapsible=verdicts["collapsibility"].holds,
        a_collapsible=verdicts["a_collapsibility"].holds,
        ci_y_w_given_x=verdicts["independence_y_w_given_x"].holds,
        indep_x_w=verdicts["independence_x_w"].holds,
    )
    flags = []
    either = membership.ci_y_w_given_x or membership.indep_x_w
    if either and not membership.a_collapsible:
        flags.append("inconsistency: an independence condition holds but averaged "
                     "collapsibility fails (sufficiency violated)")
    binary_w = isinstance(source, DiscreteJoint) and source.binary_w
    if membership.a_collapsible and not either:
        if binary_w:
            flags.append("inconsistency: averaged collapsibility holds for binary W "
                         "but neither independence condition does (necessity violated)")
        else:
            flags.append("necessity does not apply: W is not binary")
    if membership.collapsible and not (membership.homogeneous and membership.a_collapsible):
        flags.append("inconsistency: collapsible but outside homogeneous/averaged classes")
    return MembershipReport(membership, verdicts, flags)


@dataclass
class LatticeRow:
    name: str
    membership: ClassMembership
    binary_w: bool


@dataclass
class LatticeResult:
    rows: list
    violations: list

    def to_json(self) -> dict:
        return {"rows": [{"name": r.name, "binary_w": r.binary_w,
                          **r.membership.to_json()} for r in self.rows],
                "violations": list(self.violations)}


def class_lattice(entries: Sequence[tuple], grid: EvalGrid | None = None,
                  tol: float | None = None) -> LatticeResult:
    """Tabulate memberships for a batch and assert the containments.

    ``entries`` is a sequence of (name, source) pairs.  Checked per model:
    collapsible implies homogeneous and averaged-collapsible; for binary W,
    homogeneous plus averaged-collapsible implies collapsible.
    """
    rows = []
    violations = []
    for name, source in entries:
        report = classify(source, grid, tol)
        m = report.membership
        binary_w = isinstance(source, DiscreteJoint) and source.binary_w
        rows.append(LatticeRow(name, m, binary_w))
        if m.collapsible and not (m.homogeneous and m.a_collapsible):
            violations.append(f"{name}: collapsible but not homogeneous+averaged")
        if binary_w and m.homogeneous and m.a_collapsible and not m.collapsible:
            violations.append(f"{name}: binary W, homogeneous and averaged, yet not collapsible")
    return LatticeResult(rows, violations)


# ---------------------------------------------------------------------------
# Yule-Simpson reversal


def detect_reversal(source, grid: EvalGrid | None = None, tol: float | None = None,
                    quad: QuadratureSpec | None = None) -> Verdict:
    """Flag association reversal between conditional and marginalized models.

    Reversal means the conditional dependence keeps one (weak) sign across the
    whole grid, strictly on at least one point, while the marginal dependence
    crosses to the other side somewhere.  The verdict's property is
    "no-reversal": ``holds`` is True when no reversal is present;
    ``max_violation`` is the largest marginal excursion against the common
    conditional direction.  When the conditional dependence has no uniform
    direction, reversal is not defined and the verdict notes say so.
    """
    if isinstance(source, DiscreteJoint):
        joint = source
        tol_v = Fraction(0) if tol is None else Fraction(str(tol))
        cond = []
        marg = []
        for y in joint.levels_y:
            for i, x_lo, x_hi in _x_steps(joint):
                marg.append((dist_dep_discrete(joint, y, i, "marginal"),
                             {"y": str(y), "x_step": [str(x_lo), str(x_hi)]}))
                for w in joint.levels_w:
                    cond.append(dist_dep_discrete(joint, y, i, w))
        notes = {"mode": "exact-rational"}
    else:
        model = source
        grid = _need_grid(model, grid)
        tol_v = TOL_REVERSAL if tol is None else tol
        cond = [dist_dep_continuous(model, y, x, w, quad)
                for y in grid.ys for x in grid.xs for w in grid.ws]
        marg = [(marginal_dist_dep(model, y, x, quad), {"y": y, "x": x})
                for y in grid.ys for x in grid.xs]
        notes = {"mode": "grid"}

    all_nonpos = all(v <= tol_v for v in cond)
    all_nonneg = all(v >= -tol_v for v in cond)
    some_neg = any(v < -tol_v for v in cond)
    some_pos = any(v > tol_v for v in cond)

    if all_nonpos and some_neg:
        direction = "nonpositive"
        excursions = [(v, wit) for v, wit in marg]
    elif all_nonneg and some_pos:
        direction = "nonnegative"
        excursions = [(-v, wit) for v, wit in marg]
    else:
        notes["status"] = "no-uniform-conditional-direction"
        return Verdict("no-reversal", True, 0.0, None, float(tol_v), notes)

    worst, witness = max(excursions, key=lambda t: t[0])
    reversed_ = worst > tol_v
    notes["status"] = "reversal" if reversed_ else "no-reversal"
    notes["conditional_direction"] = direction
    if reversed_:
        witness = dict(witness)
        witness["marginal_excursion"] = float(worst)
    return Verdict("no-reversal", not reversed_, float(max(worst, 0)),
                   witness if reversed_ else None, float(tol_v), notes)
