"""Exact sparse linear algebra over the rationals.

Rows are scanned in index order and reduced against the pivot rows found so
far, in the order those pivots were created.  Each stored pivot row is free of
the pivot columns created before it, so one sweep in creation order clears a
row completely whatever rule picks the pivot column.  Everything is
deterministic for a fixed input ordering.

Elimination runs on ``gmpy2.mpq`` internally; results come back as
``fractions.Fraction``.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from gmpy2 import mpq

Vector = Dict[int, Fraction]

PIVOT_RULES = ("first", "markowitz")


class LinalgError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if type(x) is type(_ZERO):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


_ZERO = mpq(0)
_ONE = mpq(1)


def _q(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _fvec(v: Mapping[int, object]) -> Vector:
    return {k: _frac(x) for k, x in sorted(v.items())}


class SparseMatrix:
    """Immutable sparse matrix with exact entries and no stored zeros."""

    __slots__ = ("rows", "cols", "_rows")

    def __init__(self, rows: int, cols: int, entries: Mapping[Tuple[int, int], object] = ()):
        if rows < 0 or cols < 0:
            raise LinalgError("negative dimension")
        self.rows = rows
        self.cols = cols
        data: List[Vector] = [dict() for _ in range(rows)]
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (r, c), v in items:
            if not (0 <= r < rows and 0 <= c < cols):
                raise LinalgError(f"entry ({r}, {c}) outside {rows}x{cols}")
            v = _frac(v)
            if v:
                data[r][c] = data[r].get(c, 0) + v
                if not data[r][c]:
                    del data[r][c]
        self._rows = tuple(dict(sorted(d.items())) for d in data)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, object]], cols: int) -> "SparseMatrix":
        m = cls(0, cols)
        m.rows = len(rows)
        out = []
        for r, row in enumerate(rows):
            d = {}
            for c, v in row.items():
                if not 0 <= c < cols:
                    raise LinalgError(f"entry ({r}, {c}) outside {len(rows)}x{cols}")
                v = _frac(v)
                if v:
                    d[c] = v
            out.append(dict(sorted(d.items())))
        m._rows = tuple(out)
        return m

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[object]]) -> "SparseMatrix":
        cols = len(dense[0]) if dense else 0
        return cls.from_rows([{c: v for c, v in enumerate(row) if v} for row in dense], cols)

    def row(self, r: int) -> Vector:
        return self._rows[r]

    @property
    def entries(self) -> Dict[Tuple[int, int], Fraction]:
        return {(r, c): v for r, row in enumerate(self._rows) for c, v in row.items()}

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def matvec(self, x: Mapping[int, object]) -> Vector:
        out: Vector = {}
        for r, row in enumerate(self._rows):
            s = sum((v * x[c] for c, v in row.items() if c in x), Fraction(0))
            if s:
                out[r] = s
        return out

    def rmatvec(self, y: Mapping[int, object]) -> Vector:
        """``y^T A`` as a sparse vector over columns."""
        out: Vector = {}
        for r, yr in y.items():
            if not yr:
                continue
            for c, v in self._rows[r].items():
                out[c] = out.get(c, 0) + yr * v
        return {c: v for c, v in sorted(out.items()) if v}

    def to_dense(self) -> List[List[Fraction]]:
        return [[row.get(c, Fraction(0)) for c in range(self.cols)] for row in self._rows]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self._rows == other._rows)

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass
class SolveOutcome:
    status: str
    particular: Optional[Vector] = None
    kernel_basis: List[Vector] = field(default_factory=list)
    certificate: Optional[Vector] = None
    rank: int = 0
    pivots: List[int] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.status == "Consistent"


def _column_counts(matrix: SparseMatrix) -> List[int]:
    counts = [0] * matrix.cols
    for r in range(matrix.rows):
        for c in matrix.row(r):
            counts[c] += 1
    return counts


class _Echelon:
    """Incremental row echelon form with optional row provenance."""

    def __init__(self, pivot_rule: str, col_counts: Optional[List[int]], track: bool):
        if pivot_rule not in PIVOT_RULES:
            raise LinalgError(f"unknown pivot rule {pivot_rule!r}")
        self.rule = pivot_rule
        self.col_counts = col_counts
        self.track = track
        self.pivot_of: Dict[int, int] = {}  # column -> creation index
        self.rows: List[Vector] = []
        self.rhs: List[Fraction] = []
        self.cols: List[int] = []
        self.prov: List[Vector] = []

    def reduce(self, row: Vector, b: Fraction, prov: Optional[Vector]):
        row = dict(row)
        heap = [self.pivot_of[c] for c in row if c in self.pivot_of]
        heapq.heapify(heap)
        done = set()
        while heap:
            k = heapq.heappop(heap)
            if k in done:
                continue
            done.add(k)
            p = self.cols[k]
            f = row.get(p)
            if not f:
                continue
            prow = self.rows[k]
            f = f / prow[p]
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    if c not in row:
                        j = self.pivot_of.get(c)
                        if j is not None and j > k:
                            heapq.heappush(heap, j)
                    row[c] = nv
                else:
                    row.pop(c, None)
            b = b - f * self.rhs[k]
            if prov is not None:
                for r, v in self.prov[k].items():
                    nv = prov.get(r, 0) - f * v
                    if nv:
                        prov[r] = nv
                    else:
                        prov.pop(r, None)
        return row, b, prov

    def choose(self, row: Vector) -> int:
        if self.rule == "first":
            return min(row)
        counts = self.col_counts
        return min(row, key=lambda c: (counts[c], c))

    def push(self, row: Vector, b: Fraction, prov: Optional[Vector]) -> None:
        p = self.choose(row)
        self.pivot_of[p] = len(self.cols)
        self.cols.append(p)
        self.rows.append(row)
        self.rhs.append(b)
        if prov is not None:
            self.prov.append(prov)


def _forward(matrix: SparseMatrix, rhs: Vector, pivot_rule: str, track: bool):
    counts = _column_counts(matrix) if pivot_rule == "markowitz" else None
    ech = _Echelon(pivot_rule, counts, track)
    for r in range(matrix.rows):
        prov = {r: _ONE} if track else None
        row = {c: _q(v) for c, v in matrix.row(r).items()}
        row, b, prov = ech.reduce(row, _q(rhs.get(r, 0)), prov)
        if row:
            ech.push(row, b, prov)
        elif b:
            return ech, True, prov
    return ech, False, None


def _back_reduce(ech: _Echelon) -> List[Tuple[int, Vector, Fraction]]:
    """Fully reduce the pivot rows; each comes back monic with only free columns besides its pivot."""
    n = len(ech.cols)
    reduced: List[Optional[Tuple[Vector, Fraction]]] = [None] * n
    for k in range(n - 1, -1, -1):
        row = dict(ech.rows[k])
        b = ech.rhs[k]
        p = ech.cols[k]
        for c in sorted(row):
            if c == p or c not in row:
                continue
            j = ech.pivot_of.get(c)
            if j is None:
                continue
            f = row.pop(c)
            rj, bj = reduced[j]
            for cc, v in rj.items():
                if cc == c:
                    continue
                nv = row.get(cc, 0) - f * v
                if nv:
                    row[cc] = nv
                else:
                    row.pop(cc, None)
            b = b - f * bj
        lead = row[p]
        if lead != 1:
            row = {c: v / lead for c, v in row.items()}
            b = b / lead
        reduced[k] = (row, b)
    return [(ech.cols[k], reduced[k][0], reduced[k][1]) for k in range(n)]


def solve(matrix: SparseMatrix, rhs: Mapping[int, object], pivot_rule: str = "first",
          rhs_length: Optional[int] = None, kernel: bool = True) -> SolveOutcome:
    """Solve ``matrix x = rhs`` exactly.

    ``rhs`` is a sparse vector over row indices; ``rhs_length`` (when given)
    must equal the row count.  Returns a particular solution with every free
    variable set to zero plus the kernel basis indexed by the free columns in
    increasing order, or an inconsistency certificate ``y`` with ``y^T A = 0``
    and ``y^T rhs != 0``.
    """
    if rhs_length is not None and rhs_length != matrix.rows:
        raise LinalgError(f"rhs has length {rhs_length}, matrix has {matrix.rows} rows")
    if isinstance(rhs, (list, tuple)):
        if len(rhs) != matrix.rows:
            raise LinalgError(f"rhs has length {len(rhs)}, matrix has {matrix.rows} rows")
        rhs = {i: v for i, v in enumerate(rhs) if v}
    for r in rhs:
        if not 0 <= r < matrix.rows:
            raise LinalgError(f"rhs index {r} outside {matrix.rows} rows")
    rhs = {r: _frac(v) for r, v in rhs.items() if v}
    ech, bad, _ = _forward(matrix, rhs, pivot_rule, track=False)
    if bad:
        # rerun with row provenance to produce the certificate
        ech2, _, cert = _forward(matrix, rhs, pivot_rule, track=True)
        cert = {r: _frac(v) for r, v in sorted(cert.items()) if v}
        return SolveOutcome("Inconsistent", certificate=cert, rank=len(ech2.cols), pivots=list(ech2.cols))
    rows = _back_reduce(ech)
    particular = {p: _frac(b) for p, _, b in rows if b}
    pivots = sorted(p for p, _, _ in rows)
    kernel_basis: List[Vector] = []
    if kernel:
        pivot_set = set(pivots)
        free = [c for c in range(matrix.cols) if c not in pivot_set]
        by_free: Dict[int, Dict] = {f: {f: _ONE} for f in free}
        for p, row, _ in rows:
            for c, v in row.items():
                if c != p:
                    by_free[c][p] = -v
        kernel_basis = [_fvec(by_free[f]) for f in free]
    rank_ = len(pivots)
    if kernel and rank_ + len(kernel_basis) != matrix.cols:
        raise AssertionError("rank-nullity violated")
    return SolveOutcome("Consistent", particular=dict(sorted(particular.items())),
                        kernel_basis=kernel_basis, rank=rank_, pivots=pivots)


def rank(matrix: SparseMatrix, pivot_rule: str = "first") -> int:
    ech, _, _ = _forward(matrix, {}, pivot_rule, track=False)
    return len(ech.cols)


def check_certificate(matrix: SparseMatrix, rhs: Mapping[int, object], y: Mapping[int, object]) -> bool:
    """True iff ``y^T A = 0`` and ``y^T rhs != 0``."""
    if matrix.rmatvec(y):
        return False
    return sum((_frac(v) * _frac(rhs.get(r, 0)) for r, v in y.items()), Fraction(0)) != 0


def residual(matrix: SparseMatrix, x: Mapping[int, object], rhs: Mapping[int, object]) -> Vector:
    """``A x - rhs`` as a sparse vector (empty when ``x`` solves the system)."""
    out = matrix.matvec(x)
    for r, v in rhs.items():
        nv = out.get(r, 0) - _frac(v)
        if nv:
            out[r] = nv
        else:
            out.pop(r, None)
    return out


def support_reduce(x: Mapping[int, Fraction], kernel_basis: Iterable[Vector]) -> Vector:
    """Greedy first-improvement pass: subtract kernel multiples that shrink the support.

    For each kernel vector in order, try cancelling each coordinate of the
    current solution that the vector touches; keep the first change that
    strictly lowers the number of nonzeros.
    """
    cur = {c: _q(v) for c, v in x.items() if v}
    for k in kernel_basis:
        kq = {c: _q(v) for c, v in k.items() if v}
        for c in sorted(kq):
            if c not in cur:
                continue
            t = cur[c] / kq[c]
            change = 0
            for cc, v in kq.items():
                old = cur.get(cc, 0)
                new = old - t * v
                change += (new != 0) - (old != 0)
            if change < 0:
                for cc, v in kq.items():
                    nv = cur.get(cc, 0) - t * v
                    if nv:
                        cur[cc] = nv
                    else:
                        cur.pop(cc, None)
                break
    cur = {c: _frac(v) for c, v in cur.items()}
    return dict(sorted(cur.items()))
