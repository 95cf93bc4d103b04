"""Three-way contingency tables with exact rational conditional probabilities.

All probabilities derived from a :class:`DiscreteJoint` are ``Fraction``
instances, so identities that hold for a table hold *exactly* -- verdicts on
discrete inputs never depend on a tuned tolerance.  Conversion to float
happens only at the reporting boundary.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import TableError, ZeroMassError

Level = object  # hashable level label; ordering is fixed by the level tuples

CSV_COLUMNS = ("y", "x", "w", "count")


def _to_fraction(value, where: str = "") -> Fraction:
    try:
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(value)
            return Fraction(value)
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise TableError(f"invalid count {value!r}{where}") from None


def numeric_lex_key(label):
    """Sort key: numeric labels numerically, the rest lexicographically."""
    try:
        return (0, float(str(label)), str(label))
    except ValueError:
        return (1, 0.0, str(label))


def order_levels(observed: Sequence, how="first") -> tuple:
    """Order level labels: "first" (appearance), "numeric", or an explicit list."""
    if how == "first":
        return tuple(observed)
    if how == "numeric":
        return tuple(sorted(observed, key=numeric_lex_key))
    explicit = tuple(how)
    missing = [lvl for lvl in observed if lvl not in explicit]
    if missing:
        raise TableError(f"explicit level order {explicit!r} does not cover {missing!r}")
    return tuple(lvl for lvl in explicit if lvl in set(observed))


@dataclass(frozen=True)
class DiscreteJoint:
    """A normalized nonnegative table over (Y, X, W) level boxes."""

    levels_y: tuple
    levels_x: tuple
    levels_w: tuple
    counts: dict  # (y, x, w) -> Fraction; complete over the level box
    total: Fraction

    # -- level bookkeeping -------------------------------------------------

    @property
    def n_y(self) -> int:
        return len(self.levels_y)

    @property
    def n_x(self) -> int:
        return len(self.levels_x)

    @property
    def n_w(self) -> int:
        return len(self.levels_w)

    @property
    def binary_w(self) -> bool:
        return self.n_w == 2

    def _index(self, levels: tuple, label, axis: str) -> int:
        try:
            return levels.index(label)
        except ValueError:
            raise TableError(f"unknown {axis} level {label!r}") from None

    def y_index(self, label) -> int:
        return self._index(self.levels_y, label, "Y")

    def x_index(self, label) -> int:
        return self._index(self.levels_x, label, "X")

    def w_index(self, label) -> int:
        return self._index(self.levels_w, label, "W")

    # -- masses ------------------------------------------------------------

    def _w_set(self, w) -> tuple:
        if w is None:
            return self.levels_w
        if isinstance(w, (set, frozenset, list, tuple)):
            for lvl in w:
                self.w_index(lvl)
            return tuple(lvl for lvl in self.levels_w if lvl in set(w))
        self.w_index(w)
        return (w,)

    def mass(self, ys=None, x=None, ws=None) -> Fraction:
        """Total count over cells with Y in ys, X == x, W in ws (None = all)."""
        ys = self.levels_y if ys is None else tuple(ys)
        xs = self.levels_x if x is None else (x,)
        ws = self.levels_w if ws is None else tuple(ws)
        yset, wset = set(ys), set(ws)
        out = Fraction(0)
        for xl in xs:
            for yl in yset:
                for wl in wset:
                    out += self.counts[(yl, xl, wl)]
        return out

    def prob(self, y, x, w) -> Fraction:
        return self.counts[(y, x, w)] / self.total

    def p_x(self, x) -> Fraction:
        self.x_index(x)
        return self.mass(x=x) / self.total

    def p_w(self, w) -> Fraction:
        ws = self._w_set(w)
        return self.mass(ws=ws) / self.total

    def p_w_given_x(self, w, x) -> Fraction:
        self.x_index(x)
        den = self.mass(x=x)
        if den == 0:
            raise ZeroMassError(f"X={x!r}")
        return self.mass(x=x, ws=self._w_set(w)) / den

    # -- conditionals ------------------------------------------------------

    def prob_y_in(self, event: Iterable, x, w=None) -> Fraction:
        """P(Y in event | X=x, W in w); w may be a level, a set, or None."""
        for lvl in event:
            self.y_index(lvl)
        self.x_index(x)
        ws = self._w_set(w)
        den = self.mass(x=x, ws=ws)
        if den == 0:
            cond = f"X={x!r}" if w is None else f"X={x!r}, W in {list(ws)!r}"
            raise ZeroMassError(cond)
        return self.mass(ys=tuple(event), x=x, ws=ws) / den

    def cdf_y(self, y, x, w=None) -> Fraction:
        """P(Y <= y | X=x[, W in w]) with Y ordered by ``levels_y``."""
        k = self.y_index(y)
        return self.prob_y_in(self.levels_y[: k + 1], x, w)

    # -- misc ----------------------------------------------------------------

    def dimensions(self) -> dict:
        return {"y_levels": list(map(str, self.levels_y)),
                "x_levels": list(map(str, self.levels_x)),
                "w_levels": list(map(str, self.levels_w)),
                "total": float(self.total)}


def build_discrete_joint(rows: Iterable[tuple], *, order_y="first", order_x="first",
                         order_w="first") -> DiscreteJoint:
    """Assemble a :class:`DiscreteJoint` from (y, x, w, count) rows.

    Duplicate (y, x, w) keys are summed.  Counts must be nonnegative and must
    not all be zero; X needs at least two levels so adjacent differencing is
    defined.  Level order defaults to first appearance; pass ``"numeric"`` or
    an explicit sequence per axis to override.
    """
    counts: dict = {}
    seen_y: list = []
    seen_x: list = []
    seen_w: list = []
    n = 0
    for idx, row in enumerate(rows):
        n += 1
        try:
            y, x, w, c = row
        except (TypeError, ValueError):
            raise TableError(f"row {idx}: expected (y, x, w, count), got {row!r}") from None
        frac = _to_fraction(c, where=f" in row {idx}")
        if frac < 0:
            raise TableError(f"row {idx}: negative count {c!r} at (y={y!r}, x={x!r}, w={w!r})")
        key = (y, x, w)
        counts[key] = counts.get(key, Fraction(0)) + frac
        if y not in seen_y:
            seen_y.append(y)
        if x not in seen_x:
            seen_x.append(x)
        if w not in seen_w:
            seen_w.append(w)
    if n == 0:
        raise TableError("no rows")

    levels_y = order_levels(seen_y, order_y)
    levels_x = order_levels(seen_x, order_x)
    levels_w = order_levels(seen_w, order_w)
    if len(levels_x) < 2:
        raise TableError("X needs at least 2 levels (adjacent differencing is undefined)")

    total = sum(counts.values(), Fraction(0))
    if total == 0:
        raise TableError("table has zero total mass")

    full = {(y, x, w): counts.get((y, x, w), Fraction(0))
            for y in levels_y for x in levels_x for w in levels_w}
    return DiscreteJoint(levels_y, levels_x, levels_w, full, total)


def conditional_prob(joint: DiscreteJoint, event: Iterable, x, w=None) -> Fraction:
    """P(Y in event | X=x[, W in w]) as an exact rational."""
    return joint.prob_y_in(event, x, w)


def read_table_rows(source) -> list[tuple]:
    """Parse contingency-table CSV (columns y, x, w, count) into raw rows.

    ``source`` is a path or an open text stream.  Errors carry 1-based line
    numbers.  Counts are kept as strings so exact forms like ``"3/4"`` survive
    until :func:`build_discrete_joint` converts them.
    """
    if hasattr(source, "read"):
        return _parse_csv(source)
    with open(source, newline="", encoding="utf-8") as fh:
        return _parse_csv(fh)


def _parse_csv(fh) -> list[tuple]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise TableError("empty CSV: missing header") from None
    names = [h.strip().lower() for h in header]
    try:
        cols = [names.index(c) for c in CSV_COLUMNS]
    except ValueError:
        raise TableError(
            f"line 1: header must contain columns {CSV_COLUMNS}, got {header!r}") from None
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not cell.strip() for cell in rec):
            continue
        if max(cols) >= len(rec):
            raise TableError(f"line {lineno}: expected {len(names)} fields, got {len(rec)}")
        y, x, w, c = (rec[i].strip() for i in cols)
        if not c:
            raise TableError(f"line {lineno}: empty count")
        rows.append((y, x, w, c))
    if not rows:
        raise TableError("CSV has a header but no data rows")
    return rows


def joint_from_csv(source, *, order_y="numeric", order_x="numeric",
                   order_w="numeric") -> DiscreteJoint:
    """Read a contingency CSV and build the joint (numeric-aware level order)."""
    return build_discrete_joint(read_table_rows(source), order_y=order_y,
                                order_x=order_x, order_w=order_w)


def csv_text_from_counts(counts: dict) -> str:
    """Render {(y, x, w): count} as contingency CSV text (test/demo helper)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for (y, x, w), c in counts.items():
        writer.writerow([y, x, w, c])
    return buf.getvalue()
