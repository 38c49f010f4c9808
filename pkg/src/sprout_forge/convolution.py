"""The convolution dg Lie algebra Conv(Ger^v, Br) on coinvariants.

Elements are finite sums of terms ``T (x) w`` with ``T`` a brace tree and
``w`` a normal Ger word of the same arity, taken modulo the diagonal S_n
action.  S_n acts freely on labelled planar trees, so every orbit has exactly
one representative whose tree is standard (labels 1..n in preorder); the
word is carried along and renormalized.  Relabelling never reorders tree
edges and the Lambda^{-2} twist is even, so the only signs come from
renormalizing the word.

Summing a coinvariant over its orbit gives the equivariant map
Ger^v(n) -> Br(n); under this identification the pre-Lie product becomes
``[f] . [g] = [sum_i f o_i g]`` in the Hadamard product operad
Br (x) Lambda^{-2}Ger.
"""
from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
from fractions import Fraction
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import brace, ger
from .brace import BraceTree
from .ger import GerWord

Term = Tuple[BraceTree, GerWord]
ConvElement = Dict[Term, Fraction]


class ConvError(ValueError):
    pass


# -- term bookkeeping -------------------------------------------------------------

def term_arity(term: Term) -> int:
    return ger.word_arity(term[1])


def term_degree(term: Term) -> int:
    tree, word = term
    return brace.degree(tree) + ger.shifted_degree(word)


@lru_cache(maxsize=500000)
def term_key(term: Term):
    """Total order on canonical terms: arity, neutral count, tree encoding, word."""
    tree, word = term
    return (ger.word_arity(word), brace.neutral_count(tree), tree, ger.word_key(word))


def _add(out: Dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _q(c):
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    return mpq(c)


def _fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    return Fraction(int(c.numerator), int(c.denominator))


def clean(x: Dict) -> ConvElement:
    """Drop zeros, coerce to Fraction and sort by the canonical term order."""
    return {k: _fraction(x[k]) for k in sorted(x, key=term_key) if x[k]}


def add(*xs: ConvElement) -> ConvElement:
    out: Dict = {}
    for x in xs:
        for k, c in x.items():
            _add(out, k, _q(c))
    return clean(out)


def scale(c, x: ConvElement) -> ConvElement:
    c = _q(c)
    return clean({k: c * _q(v) for k, v in x.items()}) if c else {}


def sub(x: ConvElement, y: ConvElement) -> ConvElement:
    return add(x, scale(-1, y))


def arities(x: ConvElement) -> List[int]:
    return sorted({term_arity(t) for t in x})


def component(x: ConvElement, n: int) -> ConvElement:
    return {t: c for t, c in x.items() if term_arity(t) == n}


def degrees(x: ConvElement) -> List[int]:
    return sorted({term_degree(t) for t in x})


def homogeneous_degree(x: ConvElement) -> Optional[int]:
    """The common degree of all terms; None for zero; error if mixed."""
    ds = degrees(x)
    if not ds:
        return None
    if len(ds) > 1:
        raise ConvError(f"element is not homogeneous: degrees {ds}")
    return ds[0]


# -- coinvariants -----------------------------------------------------------------

def normalize_term(tree: BraceTree, word: GerWord) -> Dict[Term, int]:
    """Canonical coinvariant representative of a single (tree, word) pair."""
    return dict(_normalize_term(tree, word))


@lru_cache(maxsize=500000)
def _normalize_term(tree: BraceTree, word: GerWord) -> Tuple[Tuple[Term, int], ...]:
    if brace.arity(tree) != ger.word_arity(word):
        raise ConvError("tree and word arities differ")
    std, sigma = brace.standardize(tree)
    return tuple(((std, w), c) for w, c in ger.act_word(sigma, word))


def av_normalize(raw: Iterable[Tuple[object, BraceTree, GerWord]]) -> ConvElement:
    """Fold raw ``(coefficient, tree, word)`` triples to canonical form and merge."""
    out: Dict = {}
    for c, tree, word in raw:
        c = _q(c)
        if not c:
            continue
        for key, s in _normalize_term(tree, word):
            _add(out, key, s * c)
    return clean(out)


def renormalize(x: Dict) -> ConvElement:
    """Canonicalize a dict whose keys may be non-canonical representatives."""
    return av_normalize((c, t, w) for (t, w), c in x.items())


def act(perm: Sequence[int], x: ConvElement) -> Dict[Term, Fraction]:
    """Simultaneous relabelling of trees and words (not renormalized)."""
    out: Dict = {}
    for (tree, word), c in x.items():
        t2 = brace.act(perm, tree)
        for w2, s in ger.act_word(perm, word):
            _add(out, (t2, w2), s * c)
    return out


def orbit_sum(x: ConvElement) -> Dict[Term, Fraction]:
    """Sum over the S_n orbit: the equivariant map represented by ``x``."""
    out: Dict = {}
    for (tree, word), c in x.items():
        n = brace.arity(tree)
        for perm in permutations(range(1, n + 1)):
            t2 = brace.act(perm, tree)
            for w2, s in ger.act_word(perm, word):
                _add(out, (t2, w2), s * c)
    return out


def basis(n: int, d: int) -> List[Term]:
    """Canonical coinvariant basis of total degree ``d`` in arity ``n``."""
    out = []
    words = ger.enumerate_ger_basis(n)
    for nu in range(0, n):
        trees = brace.standard_trees(n, nu)
        if not trees:
            continue
        tdeg = nu - n + 1
        for w in words:
            if tdeg + ger.shifted_degree(w) == d:
                out.extend((t, w) for t in trees)
    return sorted(out, key=term_key)


# -- operations -------------------------------------------------------------------

@lru_cache(maxsize=500000)
def _hadamard_compose(a: Term, slot: int, b: Term) -> Tuple[Tuple[Term, int], ...]:
    ta, wa = a
    tb, wb = b
    trees = brace.compose_trees(ta, slot, tb)
    if not trees:
        return ()
    words = ger._compose_words(wa, slot, wb)
    if not words:
        return ()
    # moving the word of ``a`` past the tree of ``b``
    sign = -1 if (ger.brackets(wa) * brace.edge_count(tb)) % 2 else 1
    out: Dict = {}
    for st, t in trees:
        for w, cw in words:
            _add(out, (t, w), sign * st * cw)
    return tuple(out.items())


def _arity_filter(arity_range):
    if arity_range is None:
        return lambda n: True
    lo, hi = arity_range
    return lambda n: lo <= n <= hi


def pre_lie(f: ConvElement, g: ConvElement, arity_range: Optional[Tuple[int, int]] = None) -> ConvElement:
    """``f . g = sum_i f o_i g`` on representatives, then renormalized.

    ``arity_range`` restricts the computation to output arities in
    ``[lo, hi]``; terms that cannot land there are skipped.
    """
    keep = _arity_filter(arity_range)
    raw: Dict = defaultdict(mpq)
    gq = [(b, _q(cb), term_arity(b)) for b, cb in g.items()]
    for a, ca in f.items():
        na = term_arity(a)
        ca = _q(ca)
        for b, cb, nb in gq:
            if not keep(na + nb - 1):
                continue
            c = ca * cb
            for slot in range(1, na + 1):
                for key, s in _hadamard_compose(a, slot, b):
                    raw[key] += s * c
    return renormalize(raw)


def bracket(f: ConvElement, g: ConvElement, arity_range: Optional[Tuple[int, int]] = None) -> ConvElement:
    """Graded commutator of the pre-Lie product; bilinear in homogeneous parts."""
    out: Dict = {}
    for df, fp in _by_degree(f).items():
        for dg, gp in _by_degree(g).items():
            sign = -1 if (df * dg) % 2 else 1
            for k, v in pre_lie(fp, gp, arity_range).items():
                _add(out, k, v)
            for k, v in pre_lie(gp, fp, arity_range).items():
                _add(out, k, -sign * v)
    return clean(out)


def _by_degree(x: ConvElement) -> Dict[int, ConvElement]:
    out: Dict[int, ConvElement] = defaultdict(dict)
    for t, c in x.items():
        out[term_degree(t)][t] = c
    return dict(out)


def differential(f: ConvElement) -> ConvElement:
    """Apply the Br differential to every tree; words are untouched."""
    raw: Dict = defaultdict(mpq)
    for (tree, word), c in f.items():
        c = _q(c)
        for s, t in brace.differential_tree(tree):
            raw[(t, word)] += s * c
    return renormalize(raw)


def curvature(f: ConvElement, max_arity: Optional[int] = None) -> ConvElement:
    """``d f + 1/2 [f, f]`` for ``f`` of degree 1, optionally up to an arity."""
    d = homogeneous_degree(f)
    if d not in (None, 1):
        raise ConvError(f"curvature needs a degree 1 element, got degree {d}")
    rng = None if max_arity is None else (2, max_arity)
    df = differential(f)
    if max_arity is not None:
        df = {t: c for t, c in df.items() if term_arity(t) <= max_arity}
    # for odd f, 1/2 [f, f] = f . f
    return add(df, pre_lie(f, f, rng))


def truncate(f: ConvElement, order: int) -> ConvElement:
    """Keep the components of arity at most ``order + 1``."""
    if order < 1:
        raise ConvError("order must be at least 1")
    return {t: c for t, c in f.items() if term_arity(t) <= order + 1}


def is_sprout(f: ConvElement, order: int, limit: int = 10) -> Tuple[bool, List[Tuple[int, int, Term, Fraction]]]:
    """Whether the curvature vanishes in arities ``2..order+1``.

    Returns ``(ok, residue)`` where ``residue`` lists up to ``limit`` nonzero
    curvature terms as ``(arity, degree, term, coefficient)``.
    """
    if order < 1:
        raise ConvError("order must be at least 1")
    curv = curvature(f, max_arity=order + 1)
    residue = [(term_arity(t), term_degree(t), t, c) for t, c in curv.items()]
    return not residue, residue[:limit]


def format_term(term: Term) -> str:
    tree, word = term
    return f"{brace.format_tree(tree)} (x) {ger.format_word(word)}"
