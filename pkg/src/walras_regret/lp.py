"""Exact rational linear programming.

A two-phase primal simplex on a dense tableau with Bland's anti-cycling
rule. Internally the tableau holds ``gmpy2.mpq`` rationals; every value
crossing the public API is a ``fractions.Fraction``.

Dual multipliers follow the Lagrangian sign convention of the stated
sense: for a maximization a ``<=`` row has a nonnegative multiplier and a
``>=`` row a nonpositive one; for a minimization the signs flip. Equality
rows are kept as equalities, so their multipliers are free.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .core import as_fraction
from .errors import CapExceededError

LE, EQ, GE = "<=", "=", ">="
RELATIONS = (LE, EQ, GE)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

KAPPA_CELL_CAP = 64


class LPFormatError(ValueError):
    """Malformed linear program (dimension or relation mismatch)."""


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction
    label: str = ""


@dataclass(frozen=True)
class LinearProgram:
    """``sense`` c^T x subject to labelled rows and per-variable bounds.

    ``lower[j] is None`` means minus infinity, ``upper[j] is None`` plus
    infinity.
    """

    sense: str
    objective: tuple[Fraction, ...]
    rows: tuple[Constraint, ...]
    lower: tuple[Fraction | None, ...]
    upper: tuple[Fraction | None, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        nvar = len(self.objective)
        if self.sense not in ("max", "min"):
            raise LPFormatError(f"unknown sense {self.sense!r}")
        if not (len(self.lower) == len(self.upper) == len(self.labels) == nvar):
            raise LPFormatError("bounds and labels must match the objective length")
        for r, row in enumerate(self.rows):
            if len(row.coeffs) != nvar:
                raise LPFormatError(f"row {row.label or r} has {len(row.coeffs)} coefficients, expected {nvar}")
            if row.relation not in RELATIONS:
                raise LPFormatError(f"row {row.label or r}: unknown relation {row.relation!r}")

    @classmethod
    def build(cls, sense, objective, rows, lower=None, upper=None, labels=None) -> "LinearProgram":
        """Convenience constructor.

        ``rows`` holds ``(coeffs, relation, rhs)`` or ``(coeffs, relation, rhs,
        label)`` tuples. Variables default to ``x >= 0``.
        """
        objective = tuple(as_fraction(c) for c in objective)
        nvar = len(objective)
        built = []
        for r, row in enumerate(rows):
            coeffs, relation, rhs, *rest = row
            label = rest[0] if rest else f"r{r}"
            built.append(Constraint(tuple(as_fraction(a) for a in coeffs), relation, as_fraction(rhs), label))
        lower = (Fraction(0),) * nvar if lower is None else tuple(None if v is None else as_fraction(v) for v in lower)
        upper = (None,) * nvar if upper is None else tuple(None if v is None else as_fraction(v) for v in upper)
        labels = tuple(f"x{j}" for j in range(nvar)) if labels is None else tuple(labels)
        return cls(sense, objective, tuple(built), lower, upper, labels)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def matrix(self) -> list[list[Fraction]]:
        return [list(row.coeffs) for row in self.rows]


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Fraction | None
    primal: tuple[Fraction, ...]
    dual: tuple[Fraction, ...]
    reduced_costs: tuple[Fraction, ...]
    basis: tuple[str, ...]
    farkas: tuple[Fraction, ...] | None = None
    ray: tuple[Fraction, ...] | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _q(x: Fraction) -> mpq:
    return mpq(x.numerator, x.denominator)


def _f(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class _StandardForm:
    """min c^T p subject to A p = b, p >= 0, b >= 0 with an identity start basis."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        sign = -1 if lp.sense == "max" else 1
        # (original variable, +1/-1) per structural column; x_j = shift_j + sum(sign * p)
        self.columns: list[tuple[int, int]] = []
        self.col_labels: list[str] = []
        self.shift: list[Fraction] = []
        bound_rows: list[tuple[int, Fraction, str]] = []
        for j in range(lp.num_vars):
            lo, hi, name = lp.lower[j], lp.upper[j], lp.labels[j]
            if lo is not None:
                self.shift.append(lo)
                self.columns.append((j, 1))
                self.col_labels.append(name)
                if hi is not None:
                    bound_rows.append((len(self.columns) - 1, hi - lo, f"ub:{name}"))
            elif hi is not None:
                self.shift.append(hi)
                self.columns.append((j, -1))
                self.col_labels.append(f"-{name}")
            else:
                self.shift.append(Fraction(0))
                self.columns.append((j, 1))
                self.col_labels.append(f"{name}+")
                self.columns.append((j, -1))
                self.col_labels.append(f"{name}-")
        nstruct = len(self.columns)

        rows: list[tuple[list[Fraction], str, Fraction, str]] = []
        for row in lp.rows:
            coeffs = [row.coeffs[j] * s for j, s in self.columns]
            rhs = row.rhs - sum((a * self.shift[j] for j, a in enumerate(row.coeffs) if a), Fraction(0))
            rows.append((coeffs, row.relation, rhs, row.label))
        for col, width, label in bound_rows:
            coeffs = [Fraction(0)] * nstruct
            coeffs[col] = Fraction(1)
            rows.append((coeffs, LE, width, label))
        self.num_orig_rows = len(lp.rows)

        nslack = sum(1 for r in rows if r[1] != EQ)
        self.flip: list[int] = []
        self.slack_col: list[int | None] = []
        tableau: list[list[mpq]] = []
        slack_at = nstruct
        for coeffs, relation, rhs, label in rows:
            line = [_q(a) for a in coeffs] + [mpq(0)] * nslack
            col = None
            if relation != EQ:
                col = slack_at
                line[col] = mpq(1 if relation == LE else -1)
                self.col_labels.append(f"s:{label}")
                slack_at += 1
            s = -1 if rhs < 0 else 1
            if s < 0:
                line = [-v for v in line]
            line.append(_q(rhs * s))
            self.flip.append(s)
            self.slack_col.append(col)
            tableau.append(line)

        # artificial columns where no +1 slack can start the basis
        self.first_artificial = nstruct + nslack
        self.init_basis: list[int] = []
        artificial_rows = []
        for r, line in enumerate(tableau):
            col = self.slack_col[r]
            if col is not None and line[col] == 1:
                self.init_basis.append(col)
            else:
                artificial_rows.append(r)
                self.init_basis.append(-1)
        nart = len(artificial_rows)
        for r, line in enumerate(tableau):
            rhs = line.pop()
            line.extend([mpq(0)] * nart)
            line.append(rhs)
        for a, r in enumerate(artificial_rows):
            col = self.first_artificial + a
            tableau[r][col] = mpq(1)
            self.init_basis[r] = col
            self.col_labels.append(f"a:{rows[r][3]}")
        self.ncols = self.first_artificial + nart
        self.tableau = tableau
        self.rows = rows

        cost = [mpq(0)] * (self.ncols + 1)
        for c, (j, s) in enumerate(self.columns):
            cost[c] = _q(lp.objective[j] * s * sign)
        self.cost2 = cost
        cost1 = [mpq(0)] * (self.ncols + 1)
        for c in range(self.first_artificial, self.ncols):
            cost1[c] = mpq(1)
        self.cost1 = cost1


class _Simplex:
    def __init__(self, sf: _StandardForm):
        self.sf = sf
        self.T = sf.tableau
        self.basis = list(sf.init_basis)
        self.iterations = 0
        # reduced-cost rows; last entry holds minus the objective value
        self.z1 = list(sf.cost1)
        self.z2 = list(sf.cost2)
        for r, col in enumerate(self.basis):
            for z in (self.z1, self.z2):
                f = z[col]
                if f:
                    line = self.T[r]
                    for j, v in enumerate(line):
                        if v:
                            z[j] -= f * v

    def pivot(self, r: int, s: int):
        T = self.T
        line = T[r]
        piv = line[s]
        if piv != 1:
            line = [v / piv for v in line]
            T[r] = line
        nz = [j for j, v in enumerate(line) if v]
        for i, other in enumerate(T):
            if i != r:
                f = other[s]
                if f:
                    for j in nz:
                        other[j] -= f * line[j]
        for z in (self.z1, self.z2):
            f = z[s]
            if f:
                for j in nz:
                    z[j] -= f * line[j]
        self.basis[r] = s
        self.iterations += 1

    def run(self, z: list, limit: int) -> int | None:
        """Bland's rule on columns below ``limit``. Returns an unbounded column or None."""
        T = self.T
        basis = self.basis
        while True:
            s = next((j for j in range(limit) if z[j] < 0), None)
            if s is None:
                return None
            best = None
            for i, line in enumerate(T):
                a = line[s]
                if a > 0:
                    ratio = line[-1] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return s
            self.pivot(best[1], s)

    def drive_out_artificials(self):
        first = self.sf.first_artificial
        for r, col in enumerate(self.basis):
            if col >= first:
                line = self.T[r]
                s = next((j for j in range(first) if line[j] != 0), None)
                if s is not None:
                    self.pivot(r, s)

    def row_duals(self, z: list, cost: list) -> list[mpq]:
        """y_r = c_init - reduced cost of the row's initial identity column."""
        return [cost[col] - z[col] for col in self.sf.init_basis]


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly; returns an optimal solution with duals or a certificate."""
    sf = _StandardForm(lp)
    sx = _Simplex(sf)
    first = sf.first_artificial
    sx.run(sx.z1, first)
    nrow_orig = sf.num_orig_rows
    if -sx.z1[-1] > 0:
        y = sx.row_duals(sx.z1, sf.cost1)
        farkas = tuple(_f(y[r] * sf.flip[r]) for r in range(nrow_orig))
        return LpSolution(INFEASIBLE, None, (), (), (), _basis_labels(sf, sx), farkas=farkas, iterations=sx.iterations)
    sx.drive_out_artificials()
    unbounded_col = sx.run(sx.z2, first)
    if unbounded_col is not None:
        direction = [mpq(0)] * sf.ncols
        direction[unbounded_col] = mpq(1)
        for r, col in enumerate(sx.basis):
            direction[col] -= sx.T[r][unbounded_col]
        ray = [Fraction(0)] * lp.num_vars
        for c, (j, s) in enumerate(sf.columns):
            if direction[c]:
                ray[j] += s * _f(direction[c])
        return LpSolution(UNBOUNDED, None, (), (), (), _basis_labels(sf, sx), ray=tuple(ray), iterations=sx.iterations)

    values = [mpq(0)] * sf.ncols
    for r, col in enumerate(sx.basis):
        values[col] = sx.T[r][-1]
    primal = list(sf.shift)
    for c, (j, s) in enumerate(sf.columns):
        if values[c]:
            primal[j] += s * _f(values[c])
    value = sum((c * x for c, x in zip(lp.objective, primal) if c), Fraction(0))

    y = sx.row_duals(sx.z2, sf.cost2)
    out_sign = -1 if lp.sense == "max" else 1
    dual = tuple(_f(y[r]) * sf.flip[r] * out_sign for r in range(nrow_orig))
    reduced = []
    for j in range(lp.num_vars):
        acc = lp.objective[j]
        for row, d in zip(lp.rows, dual):
            if d and row.coeffs[j]:
                acc -= d * row.coeffs[j]
        reduced.append(acc)
    return LpSolution(
        OPTIMAL,
        value,
        tuple(primal),
        dual,
        tuple(reduced),
        _basis_labels(sf, sx),
        iterations=sx.iterations,
    )


def _basis_labels(sf: _StandardForm, sx: _Simplex) -> tuple[str, ...]:
    return tuple(sf.col_labels[col] for col in sx.basis)


def dual_value(lp: LinearProgram, sol: LpSolution) -> Fraction:
    """Objective of the dual solution: b^T y plus the active bound terms."""
    total = sum((row.rhs * d for row, d in zip(lp.rows, sol.dual) if d), Fraction(0))
    for j, r in enumerate(sol.reduced_costs):
        if r:
            total += r * _active_bound(lp, j, r)
    return total


def _active_bound(lp: LinearProgram, j: int, r: Fraction) -> Fraction:
    # for max, a negative reduced cost is supported by the lower bound
    at_lower = (r < 0) if lp.sense == "max" else (r > 0)
    bound = lp.lower[j] if at_lower else lp.upper[j]
    if bound is None:
        raise ValueError(f"reduced cost of {lp.labels[j]} has no supporting bound")
    return bound


def row_activity(row: Constraint, x: Sequence[Fraction]) -> Fraction:
    return sum((a * v for a, v in zip(row.coeffs, x) if a), Fraction(0))


def certificate_issues(lp: LinearProgram, sol: LpSolution) -> list[str]:
    """Independent check of an optimal solution; empty list means certified.

    Covers primal feasibility, dual sign feasibility, complementary
    slackness on rows and bounds, and strong duality.
    """
    issues = []
    x = sol.primal
    maximize = lp.sense == "max"
    for r, (row, d) in enumerate(zip(lp.rows, sol.dual)):
        act = row_activity(row, x)
        name = row.label or f"r{r}"
        if row.relation == LE and act > row.rhs or row.relation == GE and act < row.rhs:
            issues.append(f"row {name} violated")
        if row.relation == EQ and act != row.rhs:
            issues.append(f"row {name} violated")
        # a <= row in a max problem carries a nonnegative multiplier
        if row.relation != EQ:
            nonneg = (row.relation == LE) == maximize
            if (nonneg and d < 0) or (not nonneg and d > 0):
                issues.append(f"row {name} multiplier has the wrong sign")
        if d * (row.rhs - act) != 0:
            issues.append(f"row {name} complementary slackness")
    for j, (v, r) in enumerate(zip(x, sol.reduced_costs)):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None and v < lo or hi is not None and v > hi:
            issues.append(f"variable {lp.labels[j]} out of bounds")
        if r:
            try:
                bound = _active_bound(lp, j, r)
            except ValueError:
                issues.append(f"variable {lp.labels[j]} reduced cost unsupported")
                continue
            if v != bound:
                issues.append(f"variable {lp.labels[j]} complementary slackness")
    if not issues and dual_value(lp, sol) != sol.value:
        issues.append("strong duality")
    return issues


def dual_lp(lp: LinearProgram) -> LinearProgram:
    """The explicit LP dual, one variable per row.

    Finite bounds other than a zero lower bound are first moved into rows
    labelled ``lb:<var>`` / ``ub:<var>``; their dual variables follow the
    original rows. Dual variables use the same sign convention as
    ``LpSolution.dual``.
    """
    rows = list(lp.rows)
    nonneg = []
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        unit = tuple(Fraction(int(i == j)) for i in range(lp.num_vars))
        if lo is not None and lo != 0:
            rows.append(Constraint(unit, GE, lo, f"lb:{lp.labels[j]}"))
        if hi is not None:
            rows.append(Constraint(unit, LE, hi, f"ub:{lp.labels[j]}"))
        # only x >= 0 keeps a sign; every other variable is free once its bounds are rows
        nonneg.append(lo is not None and lo == 0)
    maximize = lp.sense == "max"
    lower, upper = [], []
    for row in rows:
        if row.relation == EQ:
            lower.append(None)
            upper.append(None)
        elif (row.relation == LE) == maximize:
            lower.append(Fraction(0))
            upper.append(None)
        else:
            lower.append(None)
            upper.append(Fraction(0))
    dual_rows = []
    for j in range(lp.num_vars):
        coeffs = tuple(row.coeffs[j] for row in rows)
        if nonneg[j]:
            relation = GE if maximize else LE
        else:
            relation = EQ
        dual_rows.append(Constraint(coeffs, relation, lp.objective[j], f"col:{lp.labels[j]}"))
    return LinearProgram(
        "min" if maximize else "max",
        tuple(row.rhs for row in rows),
        tuple(dual_rows),
        tuple(lower),
        tuple(upper),
        tuple(f"y:{row.label or r}" for r, row in enumerate(rows)),
    )


def format_lp(lp: LinearProgram) -> str:
    """Human-readable dump; not an interchange format."""

    def term_list(coeffs):
        terms = [f"{'+' if c >= 0 else '-'} {abs(c)} {lp.labels[j]}" for j, c in enumerate(coeffs) if c]
        return " ".join(terms) if terms else "0"

    def bound(v, default):
        return default if v is None else str(v)

    out = [f"{lp.sense} {term_list(lp.objective)}", "subject to"]
    for r, row in enumerate(lp.rows):
        out.append(f"  {row.label or f'r{r}'}: {term_list(row.coeffs)} {row.relation} {row.rhs}")
    out.append("bounds")
    for j, name in enumerate(lp.labels):
        out.append(f"  {bound(lp.lower[j], '-inf')} <= {name} <= {bound(lp.upper[j], '+inf')}")
    return "\n".join(out)


def determinant(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant by Gaussian elimination."""
    a = [[_q(as_fraction(v)) for v in row] for row in matrix]
    size = len(a)
    det = mpq(1)
    for c in range(size):
        p = next((r for r in range(c, size) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        piv = a[c][c]
        det *= piv
        for r in range(c + 1, size):
            f = a[r][c]
            if f:
                f = f / piv
                row, prow = a[r], a[c]
                for k in range(c, size):
                    row[k] -= f * prow[k]
    return _f(det)


def kappa(matrix: Sequence[Sequence], cell_cap: int = KAPPA_CELL_CAP) -> Fraction:
    """Largest absolute determinant over all square submatrices (brute force)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if rows * cols > cell_cap:
        raise CapExceededError(f"{rows}x{cols} matrix is too large for brute force (cap {cell_cap} cells)")
    a = [[as_fraction(v) for v in row] for row in matrix]
    best = Fraction(0)
    for size in range(1, min(rows, cols) + 1):
        for rsel in itertools.combinations(range(rows), size):
            for csel in itertools.combinations(range(cols), size):
                d = abs(determinant([[a[r][c] for c in csel] for r in rsel]))
                if d > best:
                    best = d
    return best
