"""Seeding, verifying and extending Maurer-Cartan sprouts in Conv(Ger^v, Br).

An order-n sprout has components in arities 2..n+1.  Extending it to order
n+1 keeps arities <= n, and solves for new components ``x`` (arity n+1) and
``y`` (arity n+2), both of degree 1, from

    d x = -(lower . lower)            in arity n+1
    d y + [a_2, x] = -(lower . lower) in arity n+2

where ``lower`` is the kept part and ``a_2`` its arity-2 component.  The
system is linear in ``(x, y)``.  With ``keep_top`` the current arity-(n+1)
component is kept and only ``y`` is solved for, which asks whether the input
is a truncation of a higher sprout.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, List, Sequence

from . import brace, ger
from . import convolution as cv
from .convolution import ConvElement, Term
from .exact_linalg import SolveOutcome, SparseMatrix, solve, support_reduce

DEFAULT_COHOMOLOGY_BOUND = 4
DEFAULT_ARITY_BOUND = 6


class SproutError(ValueError):
    """Precondition failure (not a sprout, diagram does not commute, ...)."""


class ResourceError(RuntimeError):
    pass


class ConventionError(AssertionError):
    pass


# -- cohomology of Br --------------------------------------------------------------

@dataclass
class CohomologyBlock:
    arity: int
    degree: int
    basis: List[brace.BraceTree]
    cocycles: List[Dict[int, Fraction]]
    coboundaries: List[Dict[int, Fraction]]
    representatives: List[Dict[int, Fraction]]

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def to_element(self, v: Dict[int, Fraction]) -> brace.BrElement:
        return {self.basis[i]: c for i, c in v.items()}

    def project(self, x: brace.BrElement) -> List[Fraction]:
        """Coordinates of the class of a cocycle on the chosen representatives."""
        index = {t: i for i, t in enumerate(self.basis)}
        rhs = {}
        for t, c in x.items():
            if t not in index:
                raise SproutError(f"tree {brace.format_tree(t)} not in block ({self.arity}, {self.degree})")
            rhs[index[t]] = Fraction(c)
        cols = self.coboundaries + self.representatives
        entries = {(r, j): v for j, col in enumerate(cols) for r, v in col.items()}
        out = solve(SparseMatrix(len(self.basis), len(cols), entries), rhs, kernel=False)
        if not out.consistent:
            raise SproutError("element is not a cocycle")
        nb = len(self.coboundaries)
        # coboundary columns are independent, so the representative part is unique
        return [out.particular.get(nb + j, Fraction(0)) for j in range(self.dim)]


def _differential_columns(src: Sequence[brace.BraceTree], dst: Sequence[brace.BraceTree]) -> List[Dict[int, Fraction]]:
    index = {t: i for i, t in enumerate(dst)}
    cols = []
    for t in src:
        cols.append({index[t2]: Fraction(c) for t2, c in brace.differential({t: 1}).items()})
    return cols


def _independent(vectors: Sequence[Dict[int, Fraction]], nrows: int, start: Sequence[Dict[int, Fraction]] = ()) -> List[int]:
    """Indices of vectors independent of ``start`` and of the earlier ones."""
    from .exact_linalg import _Echelon
    ech = _Echelon("first", None, False)
    for v in start:
        row, _, _ = ech.reduce(v, Fraction(0), None)
        if row:
            ech.push(row, Fraction(0), None)
    keep = []
    for i, v in enumerate(vectors):
        row, _, _ = ech.reduce(v, Fraction(0), None)
        if row:
            ech.push(row, Fraction(0), None)
            keep.append(i)
    return keep


def size_estimate(arity: int) -> int:
    """Number of brace trees of arity ``arity`` over all degrees."""
    total = 0
    for nu in range(arity):
        total += len(brace.standard_trees(arity, nu))
    for k in range(2, arity + 1):
        total *= k
    return total


@lru_cache(maxsize=None)
def _cohomology(n: int, d: int) -> CohomologyBlock:
    here = brace.enumerate_basis(n, d)
    below = brace.enumerate_basis(n, d - 1)
    above = brace.enumerate_basis(n, d + 1)
    dcols = _differential_columns(here, above)
    # cocycles: kernel of d restricted to this degree
    entries = {(r, j): v for j, col in enumerate(dcols) for r, v in col.items()}
    out = solve(SparseMatrix(len(above), len(here), entries), {})
    cocycles = out.kernel_basis
    bcols = _differential_columns(below, here)
    coboundaries = [bcols[i] for i in _independent(bcols, len(here))]
    reps = [cocycles[i] for i in _independent(cocycles, len(here), coboundaries)]
    return CohomologyBlock(n, d, here, cocycles, coboundaries, reps)


def cohomology(arity: int, degree: int, bound: int = DEFAULT_COHOMOLOGY_BOUND) -> CohomologyBlock:
    if arity < 1:
        raise SproutError("arity must be at least 1")
    if arity > bound:
        raise ResourceError(f"cohomology of arity {arity} exceeds the bound {bound} "
                            f"(about {size_estimate(arity)} trees)")
    return _cohomology(arity, degree)


def ger_graded_dims(n: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for w in ger.enumerate_ger_basis(n):
        d = ger.ger_degree(w)
        out[d] = out.get(d, 0) + 1
    return out


# -- projection to cohomology on arity 2 --------------------------------------------

PRODUCT = (1, 2)
BRACKET = ((1, 2),)


def arity2_map(x: ConvElement) -> Dict[ger.GerWord, brace.BrElement]:
    """The equivariant map Ger^v(2) -> Br(2) of the arity-2 component."""
    inv = cv.orbit_sum(cv.component(x, 2))
    out: Dict[ger.GerWord, brace.BrElement] = {}
    for (tree, word), c in inv.items():
        out.setdefault(word, {})
        out[word][tree] = out[word].get(tree, 0) + c
    return {w: {t: c for t, c in v.items() if c} for w, v in out.items()}


def project_arity2(x: ConvElement) -> Dict[str, List[Fraction]]:
    """pi_H of the arity-2 component, keyed by the dual generator.

    Each value lists coordinates on the chosen cohomology representatives of
    the degree the dual generator lands in (bracket class for ``b1 b2``,
    product class for ``{b1,b2}``).
    """
    m = arity2_map(x)
    out = {}
    for word in (PRODUCT, BRACKET):
        # a degree-1 map sends b1 b2 (shifted degree 2) to degree -1 and {b1,b2} to degree 0
        d = 1 - ger.shifted_degree(word)
        z = m.get(word, {})
        out[ger.format_word(word)] = cohomology(2, d).project(z) if z else [Fraction(0)] * cohomology(2, d).dim
    return out


def alpha_h() -> Dict[str, List[Fraction]]:
    """Projection of the reference MC element: each dual generator hits its class once."""
    return {ger.format_word(PRODUCT): [Fraction(1)], ger.format_word(BRACKET): [Fraction(1)]}


def diagram_commutes(x: ConvElement, exact: bool = False) -> bool:
    """Whether the arity-2 projection matches the reference, up to nonzero scalings.

    Rescaling product and bracket independently is an automorphism of Ger, so
    any nonzero multiples still generate; ``exact`` demands coefficient 1.
    """
    got = project_arity2(x)
    ref = alpha_h()
    if exact:
        return got == ref
    for key, vec in got.items():
        r = ref[key]
        nz = [i for i, v in enumerate(r) if v]
        if not vec[nz[0]]:
            return False
        ratio = vec[nz[0]] / r[nz[0]]
        if any(v != ratio * rv for v, rv in zip(vec, r)):
            return False
    return True


# -- seeds -------------------------------------------------------------------------

def _seed_terms():
    P = brace.parse_tree
    W = ger.parse_word
    F = Fraction
    return [
        (F(1), P("r(1(2))"), W("b1 b2")),
        (F(1, 2), P("r(•(1,2))"), W("{b1,b2}")),
        (F(1, 2), P("r(1(2,3))"), W("b1{b2,b3}")),
        (F(-1, 3), P("r(•(1,2,3))"), W("{b1,{b2,b3}}")),
        (F(-1, 6), P("r(•(1,2,3))"), W("{b2,{b1,b3}}")),
        (F(-1, 6), P("r(1(•(2,3)))"), W("{b2,{b1,b3}}")),
        (F(-1, 12), P("r(1(•(2,3)))"), W("{b1,{b2,b3}}")),
    ]


def seed_raw_terms():
    """The seven hand-written terms of the known second-order sprout."""
    return list(_seed_terms())


def seed_paper(check: bool = True) -> ConvElement:
    x = cv.av_normalize(_seed_terms())
    if check:
        ok, res = cv.is_sprout(x, 2)
        if not ok:
            raise ConventionError(f"seed is not a second-order sprout: {res[:3]}")
    return x


def _equivariant_lift(word: ger.GerWord) -> brace.BrElement:
    """Invariant cocycle in Br(2) representing the class paired with ``word``."""
    d = 1 - ger.shifted_degree(word)
    block = cohomology(2, d)
    rep = block.to_element(block.representatives[0])
    out: Dict = {}
    perms = list(permutations((1, 2)))
    for p in perms:
        for t, c in rep.items():
            t2 = brace.act(p, t)
            out[t2] = out.get(t2, 0) + Fraction(c, len(perms))
    return {t: c for t, c in out.items() if c}


def lift_alpha_h() -> ConvElement:
    """The arity-2 element s o alpha_H, built from equivariant cohomology lifts."""
    raw = []
    for word in (PRODUCT, BRACKET):
        for t, c in _equivariant_lift(word).items():
            raw.append((c, t, word))
    # an invariant X is the orbit sum of X / |S_2|
    return cv.scale(Fraction(1, 2), cv.av_normalize(raw))


def seed_construct(pivot_rule: str = "markowitz") -> ConvElement:
    """Second-order sprout from the cohomology lift plus one linear solve in arity 3."""
    a1 = lift_alpha_h()
    target = cv.pre_lie(a1, a1, (3, 3))
    cols = cv.basis(3, 1)
    rows = cv.basis(3, 2)
    rindex = {t: i for i, t in enumerate(rows)}
    entries = {}
    for j, t in enumerate(cols):
        for t2, c in cv.differential({t: Fraction(1)}).items():
            entries[(rindex[t2], j)] = c
    A = SparseMatrix(len(rows), len(cols), entries)
    b = {rindex[t]: -c for t, c in target.items()}
    out = solve(A, b, pivot_rule)
    if not out.consistent:
        raise ConventionError("arity-3 lift equation is inconsistent")
    y = support_reduce(out.particular, out.kernel_basis)
    x = cv.add(a1, {cols[j]: c for j, c in y.items()})
    ok, res = cv.is_sprout(x, 2)
    if not ok:
        raise ConventionError(f"constructed seed is not a sprout: {res[:3]}")
    if not diagram_commutes(x, exact=True):
        raise ConventionError("constructed seed does not project to alpha_H")
    return x


# -- extension ---------------------------------------------------------------------

@dataclass
class ExtensionProblem:
    order: int
    keep_top: bool
    lower: ConvElement
    columns: List[Term]
    rows: List[Term]
    matrix: SparseMatrix
    rhs: Dict[int, Fraction]
    column_split: int = 0
    row_split: int = 0

    @property
    def unknowns(self) -> int:
        return len(self.columns)

    def assignment(self, x: Dict[int, Fraction]) -> ConvElement:
        return cv.clean({self.columns[j]: c for j, c in x.items() if c})


@dataclass
class NotExtendable:
    problem: ExtensionProblem
    certificate: Dict[int, Fraction]
    outcome: SolveOutcome

    def verify(self) -> bool:
        from .exact_linalg import check_certificate
        return check_certificate(self.problem.matrix, self.problem.rhs, self.certificate)


@dataclass
class ExtensionReport:
    order_in: int
    order_out: int
    keep_top: bool
    rows: int
    cols: int
    nnz: int
    rank: int
    kernel_dim: int
    status: str
    terms_per_arity: Dict[int, int] = field(default_factory=dict)
    total_terms: int = 0
    seconds: Dict[str, float] = field(default_factory=dict)

    def as_dict(self, timings: bool = False) -> Dict:
        d = {
            "order_in": self.order_in,
            "order_out": self.order_out,
            "keep_top": self.keep_top,
            "status": self.status,
            "rows": self.rows,
            "cols": self.cols,
            "nnz": self.nnz,
            "rank": self.rank,
            "kernel_dim": self.kernel_dim,
            "terms_per_arity": {str(k): v for k, v in sorted(self.terms_per_arity.items())},
            "total_terms": self.total_terms,
        }
        if timings:
            d["seconds"] = {k: round(v, 3) for k, v in self.seconds.items()}
        return d


def _column_block(args):
    kind, terms, a1, n_target = args
    out = []
    for t in terms:
        e = {t: Fraction(1)}
        col = dict(cv.differential(e))
        if kind == "x" and a1:
            col.update({k: col.get(k, 0) + v for k, v in cv.bracket(a1, e, (n_target, n_target)).items()})
        out.append({k: v for k, v in col.items() if v})
    return out


def _columns(kind, terms, a1, n_target, workers):
    if workers <= 1 or len(terms) < 64:
        return _column_block((kind, terms, a1, n_target))
    size = -(-len(terms) // (workers * 4))
    chunks = [terms[i:i + size] for i in range(0, len(terms), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_column_block, [(kind, c, a1, n_target) for c in chunks]))
    return [col for part in parts for col in part]


def check_preconditions(alpha: ConvElement, order: int, check_diagram: bool = True) -> None:
    if order < 1:
        raise SproutError("order must be at least 1")
    d = cv.homogeneous_degree(alpha)
    if d not in (None, 1):
        raise SproutError(f"sprouts have degree 1, got {d}")
    if any(a > order + 1 for a in cv.arities(alpha)):
        raise SproutError(f"element has components above arity {order + 1}")
    ok, res = cv.is_sprout(alpha, order)
    if not ok:
        lines = "; ".join(f"arity {a} degree {dg}: {c} {cv.format_term(t)}" for a, dg, t, c in res[:3])
        raise SproutError(f"not a sprout of order {order}: {lines}")
    if check_diagram and not diagram_commutes(alpha):
        raise SproutError("arity-2 component does not project onto the Ger generators")


def assemble(alpha: ConvElement, order: int, keep_top: bool = False, workers: int = 1,
             check: bool = True, check_diagram: bool = True,
             arity_bound: int = DEFAULT_ARITY_BOUND) -> ExtensionProblem:
    if check:
        check_preconditions(alpha, order, check_diagram)
    n = order
    if n + 2 > arity_bound:
        raise ResourceError(f"extension to order {n + 1} needs arity {n + 2}, above the bound {arity_bound}")
    a1 = cv.component(alpha, 2)
    if keep_top:
        lower = cv.truncate(alpha, n)
        xcols: List[Term] = []
        xrows: List[Term] = []
    else:
        lower = cv.truncate(alpha, n - 1) if n > 1 else {}
        xcols = cv.basis(n + 1, 1)
        xrows = cv.basis(n + 1, 2)
    ycols = cv.basis(n + 2, 1)
    yrows = cv.basis(n + 2, 2)
    rows = xrows + yrows
    cols = xcols + ycols
    rindex = {t: i for i, t in enumerate(rows)}
    entries = {}
    xc = _columns("x", xcols, a1, n + 2, workers)
    yc = _columns("y", ycols, a1, n + 2, workers)
    for j, col in enumerate(xc + yc):
        for t, c in col.items():
            entries[(rindex[t], j)] = c
    lo = n + 2 if keep_top else n + 1
    source = cv.pre_lie(lower, lower, (lo, n + 2))
    rhs = {rindex[t]: -c for t, c in source.items()}
    A = SparseMatrix(len(rows), len(cols), entries)
    return ExtensionProblem(order=n, keep_top=keep_top, lower=lower, columns=cols, rows=rows,
                            matrix=A, rhs=dict(sorted(rhs.items())),
                            column_split=len(xcols), row_split=len(xrows))


def solution_select(problem: ExtensionProblem, outcome: SolveOutcome) -> Dict[int, Fraction]:
    """Particular solution from the fixed pivot rule, greedily thinned by kernel vectors."""
    if not outcome.consistent:
        raise SproutError("no solution to select from an inconsistent outcome")
    return support_reduce(outcome.particular, outcome.kernel_basis)


def extend(alpha: ConvElement, order: int, keep_top: bool = False, workers: int = 1,
           pivot_rule: str = "markowitz", check_diagram: bool = True,
           arity_bound: int = DEFAULT_ARITY_BOUND):
    """Extend an order-``order`` sprout by one order.

    Returns ``(result, report)`` where ``result`` is the new sprout or a
    :class:`NotExtendable` carrying the certificate.
    """
    clock = {}
    t0 = time.perf_counter()
    problem = assemble(alpha, order, keep_top=keep_top, workers=workers,
                       check_diagram=check_diagram, arity_bound=arity_bound)
    clock["assemble"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    outcome = solve(problem.matrix, problem.rhs, pivot_rule)
    clock["solve"] = time.perf_counter() - t0
    report = ExtensionReport(order_in=order, order_out=order + 1, keep_top=keep_top,
                             rows=problem.matrix.rows, cols=problem.matrix.cols,
                             nnz=problem.matrix.nnz, rank=outcome.rank,
                             kernel_dim=len(outcome.kernel_basis), status=outcome.status,
                             seconds=clock)
    if not outcome.consistent:
        cert = NotExtendable(problem, outcome.certificate, outcome)
        if not cert.verify():
            raise AssertionError("inconsistency certificate failed to verify")
        return cert, report
    t0 = time.perf_counter()
    x = solution_select(problem, outcome)
    result = cv.add(problem.lower, problem.assignment(x))
    clock["select"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    ok, res = cv.is_sprout(result, order + 1)
    clock["verify"] = time.perf_counter() - t0
    if not ok:
        raise AssertionError(f"extension is not a sprout of order {order + 1}: {res[:3]}")
    report.terms_per_arity = {a: len(cv.component(result, a)) for a in cv.arities(result)}
    report.total_terms = len(result)
    return result, report


def element_stats(x: ConvElement) -> Dict:
    per = {}
    for a in cv.arities(x):
        comp = cv.component(x, a)
        per[str(a)] = {
            "terms": len(comp),
            "trees": len({t for t, _ in comp}),
            "neutral": {str(k): v for k, v in sorted(_count_by(comp, lambda t: brace.neutral_count(t[0])).items())},
        }
    return {"total_terms": len(x), "arities": per}


def _count_by(x, key):
    out: Dict = {}
    for t in x:
        k = key(t)
        out[k] = out.get(k, 0) + 1
    return out
