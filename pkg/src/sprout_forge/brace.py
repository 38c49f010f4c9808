"""The braces operad Br on planar brace trees.

A tree is stored as its preorder encoding: a tuple of ``(tag, child_count)``
pairs, where ``tag`` is a label ``1..n`` or ``NEUTRAL`` (0).  Equal trees have
equal encodings, so encodings are used directly as dictionary keys.

Orientation: every non-root edge has degree -1 and neutral vertices degree 2.
A tree stands for the wedge of its edges taken in preorder of their lower
endpoint; every operation reports the Koszul sign of the edge permutation it
induces.  The root stub is not an edge.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations
from typing import Dict, Iterator, List, Sequence, Tuple

NEUTRAL = 0

BraceTree = Tuple[Tuple[int, int], ...]
BrElement = Dict[BraceTree, Fraction]


class TreeError(ValueError):
    pass


# -- structure helpers -------------------------------------------------------

def _kids(tree: BraceTree) -> List[List[int]]:
    """Children lists (by preorder index) of every vertex."""
    kids: List[List[int]] = [[] for _ in tree]
    stack: List[int] = []
    for pos, (_, count) in enumerate(tree):
        if stack:
            parent = stack[-1]
            kids[parent].append(pos)
            if len(kids[parent]) == tree[parent][1]:
                stack.pop()
        if count:
            stack.append(pos)
    return kids


def _emit(tags: Dict, kids: Dict, root) -> Tuple[BraceTree, Dict]:
    """Preorder encoding of a tree given by id-keyed tags/children, plus id -> position."""
    out = []
    where = {}
    stack = [root]
    while stack:
        v = stack.pop()
        where[v] = len(out)
        out.append((tags[v], len(kids[v])))
        stack.extend(reversed(kids[v]))
    return tuple(out), where


def _parity(seq: Sequence[int]) -> int:
    inv = 0
    n = len(seq)
    for a in range(n):
        sa = seq[a]
        for b in range(a + 1, n):
            if seq[b] < sa:
                inv += 1
    return inv & 1


def arity(tree: BraceTree) -> int:
    return sum(1 for tag, _ in tree if tag != NEUTRAL)


def neutral_count(tree: BraceTree) -> int:
    return sum(1 for tag, _ in tree if tag == NEUTRAL)


def edge_count(tree: BraceTree) -> int:
    return len(tree) - 1


def degree(tree: BraceTree) -> int:
    """2 * (neutral vertices) - (edges), i.e. neutral - arity + 1."""
    return 2 * neutral_count(tree) - edge_count(tree)


def is_valid(tree: BraceTree) -> bool:
    if not tree:
        return False
    depth = 1
    for tag, count in tree:
        if depth == 0 or count < 0:
            return False
        depth += count - 1
        if tag == NEUTRAL and count < 2:
            return False
    if depth != 0:
        return False
    labels = sorted(tag for tag, _ in tree if tag != NEUTRAL)
    return labels == list(range(1, len(labels) + 1)) and bool(labels)


def labels_in_preorder(tree: BraceTree) -> Tuple[int, ...]:
    return tuple(tag for tag, _ in tree if tag != NEUTRAL)


def is_standard(tree: BraceTree) -> bool:
    """Labels read 1, 2, ..., n in preorder."""
    return labels_in_preorder(tree) == tuple(range(1, arity(tree) + 1))


def relabel(tree: BraceTree, mapping) -> BraceTree:
    return tuple((mapping[tag] if tag != NEUTRAL else NEUTRAL, c) for tag, c in tree)


def standardize(tree: BraceTree) -> Tuple[BraceTree, Tuple[int, ...]]:
    """Return the standard relabeling of ``tree`` and the permutation used.

    The permutation is given as a tuple ``sigma`` with ``sigma[i-1]`` the new
    label of old label ``i``.  Relabeling never reorders edges, so no sign.
    """
    order = labels_in_preorder(tree)
    sigma = [0] * len(order)
    for new, old in enumerate(order, 1):
        sigma[old - 1] = new
    sigma = tuple(sigma)
    return relabel(tree, {i + 1: s for i, s in enumerate(sigma)}), sigma


def act(perm: Sequence[int], tree: BraceTree) -> BraceTree:
    """Left action of S_n: label ``i`` becomes ``perm[i-1]``."""
    if len(perm) != arity(tree):
        raise TreeError(f"permutation of size {len(perm)} on a tree of arity {arity(tree)}")
    return relabel(tree, {i + 1: p for i, p in enumerate(perm)})


# -- enumeration ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _planar_shapes(size: int) -> Tuple[Tuple[int, ...], ...]:
    """Child-count sequences (preorder) of all planar rooted trees with ``size`` vertices."""
    out = []

    def grow(seq, open_slots, left):
        if left == 0:
            if open_slots == 0:
                out.append(tuple(seq))
            return
        if open_slots == 0:
            return
        for c in range(0, left):
            # after placing this vertex: open = open_slots - 1 + c, vertices left = left - 1
            if open_slots - 1 + c <= left - 1:
                seq.append(c)
                grow(seq, open_slots - 1 + c, left - 1)
                seq.pop()

    grow([], 1, size)
    return tuple(out)


@lru_cache(maxsize=None)
def standard_trees(n: int, nu: int) -> Tuple[BraceTree, ...]:
    """All valid standard-labelled trees with ``n`` labels and ``nu`` neutral vertices."""
    if n < 1 or nu < 0:
        return ()
    out = []
    size = n + nu
    for shape in _planar_shapes(size):
        eligible = [p for p, c in enumerate(shape) if c >= 2]
        if len(eligible) < nu:
            continue
        for chosen in combinations(eligible, nu):
            marked = set(chosen)
            lab = 0
            tree = []
            for p, c in enumerate(shape):
                if p in marked:
                    tree.append((NEUTRAL, c))
                else:
                    lab += 1
                    tree.append((lab, c))
            out.append(tuple(tree))
    return tuple(sorted(out))


def enumerate_basis(n: int, d: int) -> List[BraceTree]:
    """All valid brace trees of arity ``n`` and degree ``d`` (sorted)."""
    if n < 1:
        raise TreeError("arity must be at least 1")
    nu = d + n - 1
    if nu < 0:
        return []
    out = []
    for std in standard_trees(n, nu):
        for perm in permutations(range(1, n + 1)):
            out.append(act(perm, std))
    return sorted(out)


# -- operadic insertion -------------------------------------------------------------

def _gaps(kids: List[List[int]], root: int) -> List[Tuple[int, int]]:
    """Insertion points (vertex, position) in contour order."""
    out = []

    def walk(v):
        ch = kids[v]
        for p, c in enumerate(ch):
            out.append((v, p))
            walk(c)
        out.append((v, len(ch)))

    walk(root)
    return out


@lru_cache(maxsize=200000)
def compose_trees(host: BraceTree, slot: int, guest: BraceTree) -> Tuple[Tuple[int, BraceTree], ...]:
    """``host o_slot guest`` as a tuple of ``(sign, tree)``.

    The children of the host vertex ``slot`` are spread over the guest's
    insertion points in every order-preserving way.
    """
    n = arity(host)
    m = arity(guest)
    if not 1 <= slot <= n:
        raise TreeError(f"slot {slot} out of range for arity {n}")
    hk = _kids(host)
    gk = _kids(guest)
    v = next(p for p, (tag, _) in enumerate(host) if tag == slot)
    parent = None
    for p, ch in enumerate(hk):
        if v in ch:
            parent = p
            break

    def hl(tag):
        if tag == NEUTRAL:
            return NEUTRAL
        return tag + m - 1 if tag > slot else tag

    tags = {}
    for p, (tag, _) in enumerate(host):
        if p != v:
            tags[("h", p)] = hl(tag)
    for p, (tag, _) in enumerate(guest):
        tags[("g", p)] = NEUTRAL if tag == NEUTRAL else tag + slot - 1

    gaps = _gaps(gk, 0)
    moving = [("h", c) for c in hk[v]]
    root = ("h", 0) if parent is not None else ("g", 0)
    results = []
    for choice in combinations_with_replacement(range(len(gaps)), len(moving)):
        kids = {}
        for p, ch in enumerate(hk):
            if p == v:
                continue
            kids[("h", p)] = [("g", 0) if c == v else ("h", c) for c in ch]
        placed: Dict[Tuple[int, int], list] = {}
        for item, g in zip(moving, choice):
            placed.setdefault(gaps[g], []).append(item)
        for p, ch in enumerate(gk):
            new = []
            for q, c in enumerate(ch):
                new.extend(placed.get((p, q), ()))
                new.append(("g", c))
            new.extend(placed.get((p, len(ch)), ()))
            kids[("g", p)] = new
        tree, where = _emit(tags, kids, root)
        # wedge order: host edges then guest edges, each in own preorder
        seq = []
        for p in range(1, len(host)):
            seq.append(where[("g", 0)] if p == v else where[("h", p)])
        for p in range(1, len(guest)):
            seq.append(where[("g", p)])
        results.append((-1 if _parity(seq) else 1, tree))
    return tuple(results)


def insert(host: BrElement, slot: int, guest: BrElement) -> BrElement:
    out: BrElement = {}
    for t1, c1 in host.items():
        for t2, c2 in guest.items():
            for sign, t in compose_trees(t1, slot, t2):
                out[t] = out.get(t, 0) + sign * c1 * c2
    return {t: c for t, c in out.items() if c}


def unit() -> BraceTree:
    return ((1, 0),)


# -- differential -------------------------------------------------------------------

@lru_cache(maxsize=200000)
def differential_tree(tree: BraceTree) -> Tuple[Tuple[int, BraceTree], ...]:
    """Vertex splittings of ``tree`` that create a valid neutral vertex.

    Each term is ``-(new edge) ^ (old edges)``.  The overall minus sign is a
    normalization: both signs square to zero and give the same cohomology,
    but only this one makes the standard second-order sprout close up.
    """
    kids = _kids(tree)
    tags = {p: tag for p, (tag, _) in enumerate(tree)}
    new = len(tree)
    tags_new = dict(tags)
    tags_new[new] = NEUTRAL
    out = []
    for v, (tag, k) in enumerate(tree):
        ch = kids[v]
        for a in range(k + 1):
            for b in range(a, k + 1):
                outer = a + (k - b)
                inner = b - a
                shapes = []
                if tag != NEUTRAL and outer >= 1:
                    shapes.append("above")
                if inner >= 2 and (tag != NEUTRAL or outer >= 1):
                    shapes.append("below")
                for shape in shapes:
                    kd = {p: list(c) for p, c in enumerate(kids)}
                    if shape == "above":
                        # the new neutral vertex takes v's place, v hangs under it
                        kd[new] = ch[:a] + [v] + ch[b:]
                        kd[v] = ch[a:b]
                        root = 0
                        if v == 0:
                            root = new
                        else:
                            for p, c in enumerate(kids):
                                if v in c:
                                    kd[p] = [new if x == v else x for x in c]
                                    break
                        tree2, where = _emit(tags_new, kd, root)
                        # old edge into v now enters the new vertex; the new edge enters v
                        seq = [where[v]]
                        for p in range(1, len(tree)):
                            seq.append(where[new] if p == v else where[p])
                    else:
                        kd[v] = ch[:a] + [new] + ch[b:]
                        kd[new] = ch[a:b]
                        tree2, where = _emit(tags_new, kd, 0)
                        seq = [where[new]] + [where[p] for p in range(1, len(tree))]
                    out.append((1 if _parity(seq) else -1, tree2))
    return tuple(out)


def differential(x: BrElement) -> BrElement:
    out: BrElement = {}
    for t, c in x.items():
        for sign, t2 in differential_tree(t):
            out[t2] = out.get(t2, 0) + sign * c
    return {t: c for t, c in out.items() if c}


# -- text form ----------------------------------------------------------------------

def format_tree(tree: BraceTree) -> str:
    """Nested notation: ``r(1(2))`` for T_12, ``r(•(1,2))`` for the cup product."""
    pos = 0

    def node():
        nonlocal pos
        tag, count = tree[pos]
        pos += 1
        head = "•" if tag == NEUTRAL else str(tag)
        if not count:
            return head
        return head + "(" + ",".join(node() for _ in range(count)) + ")"

    return "r(" + node() + ")"


def parse_tree(text: str) -> BraceTree:
    s = text.replace(" ", "")
    if not (s.startswith("r(") and s.endswith(")")):
        raise TreeError(f"tree must look like r(...): {text!r}")
    s = s[2:-1]
    pos = 0
    out = []

    def node():
        nonlocal pos
        if pos >= len(s):
            raise TreeError(f"unexpected end of tree: {text!r}")
        if s[pos] in "•*":
            tag = NEUTRAL
            pos += 1
        else:
            start = pos
            while pos < len(s) and s[pos].isdigit():
                pos += 1
            if start == pos:
                raise TreeError(f"bad vertex at {start} in {text!r}")
            tag = int(s[start:pos])
            if tag < 1:
                raise TreeError(f"labels start at 1: {text!r}")
        idx = len(out)
        out.append([tag, 0])
        if pos < len(s) and s[pos] == "(":
            pos += 1
            while True:
                node()
                out[idx][1] += 1
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    continue
                if pos < len(s) and s[pos] == ")":
                    pos += 1
                    break
                raise TreeError(f"bad child list in {text!r}")

    node()
    if pos != len(s):
        raise TreeError(f"trailing characters in {text!r}")
    tree = tuple((t, c) for t, c in out)
    if not is_valid(tree):
        raise TreeError(f"not a valid brace tree: {text!r}")
    return tree


def iter_vertices(tree: BraceTree) -> Iterator[Tuple[int, int, List[int]]]:
    """Yield ``(position, tag, children)`` for every vertex."""
    kids = _kids(tree)
    for p, (tag, _) in enumerate(tree):
        yield p, tag, kids[p]
