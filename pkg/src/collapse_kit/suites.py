"""Seeded property-suite batches: the quantified claims about classes of
models, run as deterministic bulk jobs.

Each suite returns a :class:`SuiteResult` with pass/fail counts, the first
counterexample (if any), and coverage counters showing how often the
interesting antecedents actually fired -- a vacuously true implication is
reported as low coverage, never as a silent pass.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .collapse import (
    check_a_collapsibility,
    check_collapsibility,
    check_homogeneity,
    check_independence,
    check_uniform_collapsibility,
    classify,
    detect_reversal,
)
from .errors import GeneratorBudgetError
from .generators import (
    ci_yw_table,
    find_reversal_table,
    homogeneous_shift_table,
    indep_xw_table,
    random_ci_yw_model,
    random_indep_xw_model,
    random_table,
)
from .models import EvalGrid, auto_grid
from .tables import DiscreteJoint


@dataclass
class SuiteResult:
    suite: str
    seed: int
    count: int
    passes: int
    failures: list = field(default_factory=list)
    coverage: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    duration_s: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "count": self.count,
                "passes": self.passes, "failures": self.failures,
                "coverage": self.coverage, "notes": self.notes,
                "duration_s": self.duration_s}


def _small_grid(model) -> EvalGrid:
    return auto_grid(model, n_y=4, n_x=4, n_w=5)


def suite_sufficiency(seed: int, count: int = 100) -> SuiteResult:
    """Models built inside either independence class must be averaged-collapsible.

    Half the batch is discrete (exact verdicts), half continuous (grid
    verdicts); within each half the two conditions alternate.
    """
    t0 = time.perf_counter()
    rng = random.Random(seed)
    failures = []
    coverage = {"discrete_ci_yw": 0, "discrete_indep_xw": 0,
                "continuous_ci_yw": 0, "continuous_indep_xw": 0}
    for i in range(count):
        continuous = i % 2 == 1
        use_ci = (i // 2) % 2 == 0
        if continuous:
            model = random_ci_yw_model(rng) if use_ci else random_indep_xw_model(rng)
            coverage["continuous_ci_yw" if use_ci else "continuous_indep_xw"] += 1
            verdict = check_a_collapsibility(model, _small_grid(model))
        else:
            table = ci_yw_table(rng) if use_ci else indep_xw_table(rng)
            coverage["discrete_ci_yw" if use_ci else "discrete_indep_xw"] += 1
            verdict = check_a_collapsibility(table)
        if not verdict.holds:
            failures.append({"index": i, "kind": "continuous" if continuous else "discrete",
                             "condition": "ci-yw" if use_ci else "indep-xw",
                             "violation": verdict.max_violation,
                             "witness": verdict.witness})
    return SuiteResult("sufficiency", seed, count, count - len(failures), failures,
                       coverage, duration_s=time.perf_counter() - t0)


def _exact_ci_yw(joint: DiscreteJoint) -> bool:
    return check_independence(joint, "y_w_given_x").holds


def _exact_indep_xw(joint: DiscreteJoint) -> bool:
    return check_independence(joint, "x_w").holds


def suite_necessity(seed: int, count: int = 200) -> SuiteResult:
    """Binary-W tables: exact averaged collapsibility must come with one of
    the independence conditions.

    Random tables almost never satisfy the antecedent, so constructed members
    of both independence classes are mixed in; coverage reports how many
    antecedent-true tables the implication was exercised on.
    """
    t0 = time.perf_counter()
    rng = random.Random(seed)
    failures = []
    coverage = {"a_collapsible": 0, "random": 0, "constructed": 0}
    for i in range(count):
        kind = i % 5
        if kind < 2:
            joint = random_table(rng, binary_w=True)
            coverage["random"] += 1
        elif kind < 4:
            shape = rng.choice(((2, 2, 2), (3, 2, 2), (3, 3, 2), (4, 2, 2)))
            joint = ci_yw_table(rng, shape=shape)
            coverage["constructed"] += 1
        else:
            shape = rng.choice(((2, 2, 2), (3, 2, 2), (3, 3, 2)))
            joint = indep_xw_table(rng, shape=shape)
            coverage["constructed"] += 1
        if not check_a_collapsibility(joint).holds:
            continue
        coverage["a_collapsible"] += 1
        if not (_exact_ci_yw(joint) or _exact_indep_xw(joint)):
            failures.append({"index": i, "kind": "binary-w-necessity",
                             "detail": "averaged-collapsible table outside both classes",
                             "dimensions": joint.dimensions()})
    result = SuiteResult("necessity", seed, count, count - len(failures), failures,
                         coverage, duration_s=time.perf_counter() - t0)
    if coverage["a_collapsible"] < count // 4:
        result.notes["coverage_shortfall"] = (
            f"only {coverage['a_collapsible']} antecedent-true tables in {count}")
    return result


def suite_lattice(seed: int, count: int = 200) -> SuiteResult:
    """Containments between the dependence classes over a mixed batch.

    Per table: collapsible implies homogeneous and averaged-collapsible; for
    binary W, homogeneous plus averaged-collapsible implies collapsible.
    """
    t0 = time.perf_counter()
    rng = random.Random(seed)
    failures = []
    coverage = {"collapsible": 0, "homogeneous": 0, "a_collapsible": 0,
                "homog_and_avg": 0}
    for i in range(count):
        kind = i % 4
        if kind == 0:
            joint = ci_yw_table(rng)
        elif kind == 1:
            joint = indep_xw_table(rng)
        elif kind == 2:
            joint = homogeneous_shift_table(rng)
        else:
            joint = random_table(rng)
        report = classify(joint)
        m = report.membership
        coverage["collapsible"] += m.collapsible
        coverage["homogeneous"] += m.homogeneous
        coverage["a_collapsible"] += m.a_collapsible
        coverage["homog_and_avg"] += (m.homogeneous and m.a_collapsible)
        if m.collapsible and not (m.homogeneous and m.a_collapsible):
            failures.append({"index": i, "kind": "containment",
                             "detail": "collapsible outside homogeneous/averaged",
                             "membership": m.to_json()})
        if joint.binary_w and m.homogeneous and m.a_collapsible and not m.collapsible:
            failures.append({"index": i, "kind": "binary-equality",
                             "detail": "homogeneous+averaged but not collapsible",
                             "membership": m.to_json()})
    result = SuiteResult("lattice", seed, count, count - len(failures), failures,
                         coverage, duration_s=time.perf_counter() - t0)
    if coverage["collapsible"] < count // 8:
        result.notes["coverage_shortfall"] = (
            f"only {coverage['collapsible']} collapsible tables in {count}")
    return result


def suite_chain(seed: int, count: int = 200) -> SuiteResult:
    """Definitional chain on tables: uniform implies plain implies homogeneous."""
    t0 = time.perf_counter()
    rng = random.Random(seed)
    failures = []
    coverage = {"uniform": 0, "collapsible": 0, "homogeneous": 0}
    for i in range(count):
        joint = ci_yw_table(rng) if i % 3 == 0 else random_table(rng)
        uniform = check_uniform_collapsibility(joint).holds
        plain = check_collapsibility(joint).holds
        homog = check_homogeneity(joint).holds
        coverage["uniform"] += uniform
        coverage["collapsible"] += plain
        coverage["homogeneous"] += homog
        if uniform and not plain:
            failures.append({"index": i, "kind": "chain",
                             "detail": "uniformly collapsible but not collapsible"})
        if plain and not homog:
            failures.append({"index": i, "kind": "chain",
                             "detail": "collapsible but not homogeneous"})
    result = SuiteResult("chain", seed, count, count - len(failures), failures,
                         coverage, duration_s=time.perf_counter() - t0)
    if coverage["collapsible"] < count // 8:
        result.notes["coverage_shortfall"] = (
            f"only {coverage['collapsible']} collapsible tables in {count}")
    return result


def suite_reversal(seed: int, count: int = 1, max_cell: int = 100) -> SuiteResult:
    """Find reversal tables by brute force and re-verify the detector on them.

    The witness is re-checked by recomputing every conditional from raw
    counts, independently of the dependence machinery.
    """
    t0 = time.perf_counter()
    rng = random.Random(seed)
    failures = []
    found = []
    for i in range(count):
        try:
            joint, trial = find_reversal_table(rng, max_cell=max_cell)
        except GeneratorBudgetError as exc:
            failures.append({"index": i, "kind": "budget", "detail": str(exc)})
            continue
        verdict = detect_reversal(joint)
        if verdict.holds or verdict.notes.get("status") != "reversal":
            failures.append({"index": i, "kind": "detector",
                             "detail": "search hit not flagged as reversal",
                             "dimensions": joint.dimensions()})
            continue
        if not _reversal_witness_valid(joint, verdict.witness):
            failures.append({"index": i, "kind": "witness",
                             "detail": "witness failed direct recomputation",
                             "witness": verdict.witness})
            continue
        found.append({"trial": trial, "counts": {str(k): float(v)
                                                 for k, v in joint.counts.items()}})
    result = SuiteResult("reversal", seed, count, count - len(failures), failures,
                         {"found": len(found)}, {"tables": found},
                         duration_s=time.perf_counter() - t0)
    return result


def _reversal_witness_valid(joint: DiscreteJoint, witness: dict) -> bool:
    """Re-derive the reversal claim from raw counts only.

    Recomputes *every* conditional difference directly, confirms they share a
    weak sign with at least one strict, and checks that the witnessed marginal
    difference crosses strictly to the other side.
    """
    if witness is None:
        return False

    def level(levels, label):
        for lvl in levels:
            if str(lvl) == label:
                return lvl
        return None

    y_lvl = level(joint.levels_y, witness["y"])
    lo_lvl = level(joint.levels_x, witness["x_step"][0])
    hi_lvl = level(joint.levels_x, witness["x_step"][1])
    if None in (y_lvl, lo_lvl, hi_lvl):
        return False

    def cdf(y, x, w=None):
        k = joint.levels_y.index(y)
        head = joint.levels_y[: k + 1]
        ws = joint.levels_w if w is None else (w,)
        num = sum(joint.counts[(yy, x, ww)] for yy in head for ww in ws)
        den = sum(joint.counts[(yy, x, ww)] for yy in joint.levels_y for ww in ws)
        return Fraction(num, den)

    all_cond = [cdf(y, joint.levels_x[i], w) - cdf(y, joint.levels_x[i - 1], w)
                for y in joint.levels_y for i in range(1, joint.n_x)
                for w in joint.levels_w]
    marginal = cdf(y_lvl, hi_lvl) - cdf(y_lvl, lo_lvl)
    if all(c <= 0 for c in all_cond) and any(c < 0 for c in all_cond):
        return marginal > 0
    if all(c >= 0 for c in all_cond) and any(c > 0 for c in all_cond):
        return marginal < 0
    return False


SUITES = {
    "sufficiency": (suite_sufficiency, 100),
    "necessity": (suite_necessity, 200),
    "lattice": (suite_lattice, 200),
    "chain": (suite_chain, 200),
    "reversal": (suite_reversal, 1),
}


def run_suite(name: str, seed: int, count: int | None = None) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    fn, default_count = SUITES[name]
    return fn(seed, count if count is not None else default_count)
