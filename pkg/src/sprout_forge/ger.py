"""The Gerstenhaber operad on monomial normal forms.

Generators ``b_i`` are even; the product has degree 0 and the bracket degree
-1.  A Lie word is an ``int`` (a generator) or a pair ``(u, v)`` meaning
``{u, v}``.  Normal Lie words are right-nested and end in their largest
generator: ``{b_s1, {b_s2, ..., {b_sk-1, b_max}}}``; they form a basis of the
multilinear Lie part, (k-1)! words on k letters.  A Ger word is a tuple of
normal Lie words sorted by smallest generator; odd factors (an odd number of
brackets) pick up Koszul signs when reordered.

An operad element is identified with its formula evaluated on even
variables.  Composition evaluates the host formula on an odd argument, which
costs a sign computed by ``_slot_sign_exponent``.

The Lambda^{-2} suspension shifts arity-n components by ``2(n-1)``.  The
shift is even, so it never changes a sign; only degrees are tracked.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

LieWord = Union[int, tuple]
GerWord = Tuple[LieWord, ...]
GerElement = Dict[GerWord, Fraction]


class GerError(ValueError):
    pass


# -- Lie words ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _letters(u: LieWord) -> Tuple[int, ...]:
    if isinstance(u, int):
        return (u,)
    return _letters(u[0]) + _letters(u[1])


def letters(u: LieWord) -> List[int]:
    return list(_letters(u))


@lru_cache(maxsize=None)
def lie_min(u: LieWord) -> int:
    return u if isinstance(u, int) else min(lie_min(u[0]), lie_min(u[1]))


@lru_cache(maxsize=None)
def lie_size(u: LieWord) -> int:
    return 1 if isinstance(u, int) else lie_size(u[0]) + lie_size(u[1])


def right_nested(seq: Sequence[int]) -> LieWord:
    w: LieWord = seq[-1]
    for s in reversed(seq[:-1]):
        w = (s, w)
    return w


def is_normal_lie(u: LieWord) -> bool:
    seq = letters(u)
    return right_nested(seq) == u and seq[-1] == max(seq)


def _relabel_lie(u: LieWord, mapping) -> LieWord:
    if isinstance(u, int):
        return mapping[u]
    return (_relabel_lie(u[0], mapping), _relabel_lie(u[1], mapping))


def _assoc(u: LieWord) -> Dict[Tuple[int, ...], int]:
    """Expansion in the free associative algebra on odd letters.

    With the bracket of degree -1 the generators have odd shifted degree and
    ``{u, v} = uv - (-1)^{|u||v|} vu``, lengths standing in for parities.
    """
    if isinstance(u, int):
        return {(u,): 1}
    a = _assoc(u[0])
    b = _assoc(u[1])
    la = lie_size(u[0])
    lb = lie_size(u[1])
    s = 1 if (la * lb) % 2 else -1
    out: Dict[Tuple[int, ...], int] = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            out[wa + wb] = out.get(wa + wb, 0) + ca * cb
            out[wb + wa] = out.get(wb + wa, 0) + s * ca * cb
    return out


@lru_cache(maxsize=None)
def _normalize_std(u: LieWord) -> Tuple[Tuple[LieWord, int], ...]:
    top = lie_size(u)
    out = []
    for word, c in sorted(_assoc(u).items()):
        if c and word[-1] == top:
            out.append((right_nested(word), c))
    return tuple(out)


def lie_normalize(u: LieWord) -> Dict[LieWord, int]:
    """Expand any bracketing of distinct generators in the normal basis."""
    seq = letters(u)
    if len(set(seq)) != len(seq):
        raise GerError("repeated generator in Lie word")
    order = sorted(seq)
    down = {g: i + 1 for i, g in enumerate(order)}
    up = {i + 1: g for i, g in enumerate(order)}
    return {_relabel_lie(w, up): c for w, c in _normalize_std(_relabel_lie(u, down))}


def lie_words(gens: Sequence[int]) -> List[LieWord]:
    """Normal Lie words on the given generators."""
    gens = sorted(gens)
    top = gens[-1]
    return [right_nested(list(p) + [top]) for p in permutations(gens[:-1])]


# -- Ger words ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def word_arity(w: GerWord) -> int:
    return sum(lie_size(f) for f in w)


@lru_cache(maxsize=None)
def brackets(w: GerWord) -> int:
    return sum(lie_size(f) - 1 for f in w)


def ger_degree(w: GerWord) -> int:
    return -brackets(w)


def shifted_degree(w: GerWord) -> int:
    """Degree in Lambda^{-2} Ger(n)."""
    return ger_degree(w) + 2 * (word_arity(w) - 1)


def _sort_factors(factors: Sequence[LieWord]) -> Tuple[int, GerWord]:
    """Sort factors by smallest generator; return (Koszul sign, sorted word)."""
    items = list(factors)
    sign = 1
    # insertion sort keeps the sign bookkeeping obvious
    for i in range(1, len(items)):
        j = i
        while j > 0 and lie_min(items[j - 1]) > lie_min(items[j]):
            if (lie_size(items[j - 1]) - 1) % 2 and (lie_size(items[j]) - 1) % 2:
                sign = -sign
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    return sign, tuple(items)


def is_normal_word(w: GerWord) -> bool:
    return all(is_normal_lie(f) for f in w) and _sort_factors(w) == (1, tuple(w))


def _add(out: Dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def normalize_factors(factors: Sequence[LieWord]) -> GerElement:
    """Expand a product of arbitrary Lie bracketings in the normal basis."""
    expanded: List[List[Tuple[LieWord, int]]] = []
    for f in factors:
        expanded.append(list(lie_normalize(f).items()))
    out: GerElement = {}

    def rec(i, acc, coeff):
        if i == len(expanded):
            sign, w = _sort_factors(acc)
            _add(out, w, sign * coeff)
            return
        for f, c in expanded[i]:
            acc.append(f)
            rec(i + 1, acc, coeff * c)
            acc.pop()

    rec(0, [], 1)
    return out


def product(a: GerElement, b: GerElement) -> GerElement:
    out: GerElement = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            sign, w = _sort_factors(wa + wb)
            _add(out, w, sign * ca * cb)
    return out


def _factor_parity(f: LieWord) -> int:
    return (lie_size(f) - 1) % 2


def _word_parity(w: GerWord) -> int:
    return brackets(w) % 2


def bracket(a: GerElement, b: GerElement) -> GerElement:
    """Gerstenhaber bracket of degree -1, expanded by the Leibniz rule."""
    out: GerElement = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            for w, c in _bracket_words(wa, wb).items():
                _add(out, w, c * ca * cb)
    return out


@lru_cache(maxsize=None)
def _bracket_words_cached(wa: GerWord, wb: GerWord) -> Tuple[Tuple[GerWord, int], ...]:
    # {a_1..a_p, c_1..c_q} = sum_ij (-1)^{(|A|-1)|c_<j| + |a_>i|(|c_j|-1)}
    #                          c_<j a_<i {a_i, c_j} a_>i c_>j
    out: GerElement = {}
    pa = _word_parity(wa)
    for j, cj in enumerate(wb):
        before_j = sum(_factor_parity(x) for x in wb[:j]) % 2
        pc = _factor_parity(cj)
        for i, ai in enumerate(wa):
            after_i = sum(_factor_parity(x) for x in wa[i + 1:]) % 2
            e = ((pa + 1) * before_j + after_i * (pc + 1)) % 2
            factors = list(wb[:j]) + list(wa[:i]) + [(ai, cj)] + list(wa[i + 1:]) + list(wb[j + 1:])
            for w, c in normalize_factors(factors).items():
                _add(out, w, -c if e else c)
    return tuple(sorted(out.items(), key=lambda kv: word_key(kv[0])))


def _bracket_words(wa: GerWord, wb: GerWord) -> GerElement:
    return dict(_bracket_words_cached(wa, wb))


def generator(i: int) -> GerElement:
    return {(i,): 1}


# -- operad structure ---------------------------------------------------------------

def _relabel_word(w: GerWord, mapping) -> GerWord:
    return tuple(_relabel_lie(f, mapping) for f in w)


def _slot_sign_exponent(w: GerWord, slot: int) -> int:
    """Exponent ``e`` such that plugging ``g`` into ``b_slot`` costs ``(-1)^{|g| e}``.

    Counts the brackets that open to the right of ``b_slot`` (Koszul sign of
    the odd operation passing the argument) plus one when ``b_slot`` is the
    left argument of a bracket (the degree -1 operation is
    ``(a, b) -> (-1)^{|a|} {a, b}``).
    """
    seen = False
    count = 0

    def walk(u, is_left):
        nonlocal seen, count
        if isinstance(u, int):
            if u == slot:
                seen = True
                if is_left:
                    count += 1
            return
        if seen:
            count += 1
        walk(u[0], True)
        walk(u[1], False)

    for f in w:
        walk(f, False)
    return count


def _evaluate(u: LieWord, env: Dict[int, GerElement]) -> GerElement:
    if isinstance(u, int):
        return env[u]
    return bracket(_evaluate(u[0], env), _evaluate(u[1], env))


@lru_cache(maxsize=None)
def _compose_words(host: GerWord, slot: int, guest: GerWord) -> Tuple[Tuple[GerWord, int], ...]:
    n = word_arity(host)
    m = word_arity(guest)
    shift_host = {j: (j + m - 1 if j > slot else j) for j in range(1, n + 1)}
    shift_guest = {j: j + slot - 1 for j in range(1, m + 1)}
    g = {_relabel_word(guest, shift_guest): 1}
    sign = -1 if (_word_parity(guest) * _slot_sign_exponent(host, slot)) % 2 else 1
    env = {j: generator(shift_host[j]) for j in range(1, n + 1) if j != slot}
    env[slot] = g
    result: GerElement = {(): 1}
    for f in host:
        result = product(result, _evaluate(f, env))
    return tuple(sorted(((w, sign * c) for w, c in result.items() if c), key=lambda kv: word_key(kv[0])))


def ger_compose(host: GerElement, slot: int, guest: GerElement) -> GerElement:
    """Operadic composition ``host o_slot guest`` expanded to normal form."""
    out: GerElement = {}
    for wh, ch in host.items():
        n = word_arity(wh)
        if not 1 <= slot <= n:
            raise GerError(f"slot {slot} out of range for arity {n}")
        for wg, cg in guest.items():
            for w, c in _compose_words(wh, slot, wg):
                _add(out, w, c * ch * cg)
    return out


@lru_cache(maxsize=None)
def _act_word(perm: Tuple[int, ...], w: GerWord) -> Tuple[Tuple[GerWord, int], ...]:
    mapping = {i + 1: p for i, p in enumerate(perm)}
    res = normalize_factors([_relabel_lie(f, mapping) for f in w])
    return tuple(res.items())


def act(perm: Sequence[int], x: GerElement) -> GerElement:
    """Left S_n action relabelling ``b_i`` to ``b_perm[i-1]``."""
    perm = tuple(perm)
    out: GerElement = {}
    for w, c in x.items():
        if len(perm) != word_arity(w):
            raise GerError("permutation size does not match arity")
        for w2, c2 in _act_word(perm, w):
            _add(out, w2, c * c2)
    return out


def act_word(perm: Sequence[int], w: GerWord) -> Tuple[Tuple[GerWord, int], ...]:
    return _act_word(tuple(perm), w)


# -- bases --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def word_key(w: GerWord):
    return (brackets(w), tuple(_letters(f) for f in w))


def _set_partitions(items: List[int]) -> Iterable[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


@lru_cache(maxsize=None)
def _basis(n: int) -> Tuple[GerWord, ...]:
    out = []
    for blocks in _set_partitions(list(range(1, n + 1))):
        choices = [lie_words(b) for b in blocks]

        def rec(i, acc):
            if i == len(choices):
                out.append(_sort_factors(acc)[1])
                return
            for f in choices[i]:
                acc.append(f)
                rec(i + 1, acc)
                acc.pop()

        rec(0, [])
    return tuple(sorted(set(out), key=word_key))


def enumerate_ger_basis(n: int, bracket_count: Optional[int] = None) -> List[GerWord]:
    """Normal Ger words of arity ``n`` (n! of them), optionally by bracket count."""
    if n < 1:
        raise GerError("arity must be at least 1")
    words = _basis(n)
    if bracket_count is None:
        return list(words)
    return [w for w in words if brackets(w) == bracket_count]


# -- dual cocomposition -------------------------------------------------------------

@lru_cache(maxsize=None)
def _cocompose_block(k: int, i: int, m: int) -> Dict[GerWord, Tuple[Tuple[int, GerWord, GerWord], ...]]:
    table: Dict[GerWord, list] = {}
    for u in _basis(k):
        for v in _basis(m):
            for w, c in _compose_words(u, i, v):
                table.setdefault(w, []).append((c, u, v))
    return {w: tuple(entries) for w, entries in table.items()}


def cocompose(word: GerWord, split: Tuple[int, int, int]) -> List[Tuple[Fraction, GerWord, GerWord]]:
    """Cocomposition of the dual basis vector of ``word`` for a split ``(k, i, m)``.

    Returns every ``(c, u, v)`` where ``c`` is the coefficient of ``word`` in
    ``u o_i v``: the transpose of :func:`ger_compose` on normal bases.
    """
    k, i, m = split
    n = word_arity(word)
    if k < 1 or m < 1 or not 1 <= i <= k or k + m - 1 != n:
        raise GerError(f"split {split} incompatible with arity {n}")
    return [(Fraction(c), u, v) for c, u, v in _cocompose_block(k, i, m).get(word, ())]


# -- text form ----------------------------------------------------------------------

def format_lie(u: LieWord) -> str:
    if isinstance(u, int):
        return f"b{u}"
    return "{" + format_lie(u[0]) + "," + format_lie(u[1]) + "}"


def format_word(w: GerWord) -> str:
    out = ""
    for k, f in enumerate(w):
        if k and isinstance(f, int) and isinstance(w[k - 1], int):
            out += " "
        out += format_lie(f)
    return out


def parse_word(text: str) -> GerWord:
    """Parse ``b1 b2``, ``{b1,{b2,b3}}``, ``b1{b2,b3}``.

    Lie factors must already be normal; factors are sorted unless that would
    flip the sign.
    """
    s = text.strip()
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def lie():
        nonlocal pos
        skip()
        if pos < len(s) and s[pos] == "{":
            pos += 1
            a = lie()
            skip()
            if pos >= len(s) or s[pos] != ",":
                raise GerError(f"expected ',' in {text!r}")
            pos += 1
            b = lie()
            skip()
            if pos >= len(s) or s[pos] != "}":
                raise GerError(f"expected '}}' in {text!r}")
            pos += 1
            return (a, b)
        if pos < len(s) and s[pos] == "b":
            pos += 1
            start = pos
            while pos < len(s) and s[pos].isdigit():
                pos += 1
            if start == pos:
                raise GerError(f"generator without index in {text!r}")
            return int(s[start:pos])
        raise GerError(f"unexpected input at {pos} in {text!r}")

    factors = []
    skip()
    while pos < len(s):
        factors.append(lie())
        skip()
    if not factors:
        raise GerError("empty word")
    w = tuple(factors)
    gens = sorted(g for f in w for g in letters(f))
    if gens != list(range(1, len(gens) + 1)):
        raise GerError(f"generators must be b1..bn exactly once: {text!r}")
    if not all(is_normal_lie(f) for f in w):
        raise GerError(f"word is not in normal form: {text!r}")
    # factors may be written in any order as long as reordering costs no sign
    sign, w = _sort_factors(w)
    if sign < 0:
        raise GerError(f"factor order introduces a sign, write {format_word(w)!r}: {text!r}")
    return w
