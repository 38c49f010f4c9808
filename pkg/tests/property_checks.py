"""Algebraic property checks shared by the property suite and the acceptance run.

Each check returns a list of failure descriptions; an empty list means it held.
Small cases are exhaustive (arity <= 3, at most 2 neutral vertices); arity 4 is
sampled with a fixed seed.
"""
import random
from fractions import Fraction
from itertools import permutations

from sprout_forge import brace, convolution as cv, ger

SEED = 20240611
SAMPLES = 40


def _trees(max_arity=3, max_nu=2):
    return [t for n in range(1, max_arity + 1) for nu in range(min(max_nu, n - 1) + 1)
            for t in brace.enumerate_basis(n, nu - n + 1)]


def _std_trees(max_arity=3, max_nu=2):
    return [t for n in range(1, max_arity + 1) for nu in range(min(max_nu, n - 1) + 1)
            for t in brace.standard_trees(n, nu)]


def _arity4_trees():
    return [t for nu in range(4) for t in brace.enumerate_basis(4, nu - 3)]


def _words(max_arity=3):
    return [w for n in range(1, max_arity + 1) for w in ger.enumerate_ger_basis(n)]


def _terms(max_arity=3, max_nu=2):
    return [t for n in range(2, max_arity + 1) for d in range(-1, 6) for t in cv.basis(n, d)
            if brace.neutral_count(t[0]) <= max_nu]


def _sub(x, y, c=1):
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, 0) - c * v
    return {k: v for k, v in out.items() if v}


def _sign(e):
    return -1 if e % 2 else 1


def _act_br(perm, x):
    out = {}
    for t, c in x.items():
        s = brace.act(perm, t)
        out[s] = out.get(s, 0) + c
    return {k: v for k, v in out.items() if v}


def _host_block(perm, slot, m):
    """Relabelling of ``a o_slot b`` induced by permuting the inputs of ``a``."""
    target = perm[slot - 1]
    out = []
    for j in range(1, len(perm) + 1):
        if j == slot:
            out.extend(target + k for k in range(m))
        else:
            s = perm[j - 1]
            out.append(s if s < target else s + m - 1)
    return tuple(out)


def _guest_block(n, slot, perm):
    m = len(perm)
    return tuple(list(range(1, slot)) + [slot + p - 1 for p in perm] + list(range(slot + m, n + m)))


# -- differential -------------------------------------------------------------------

def d_squared():
    bad = []
    rng = random.Random(SEED)
    for t in _trees() + rng.sample(_arity4_trees(), SAMPLES):
        if brace.differential(brace.differential({t: 1})):
            bad.append(("br", t))
    terms = _terms() + rng.sample(_terms(4, 3), SAMPLES)
    for t in terms:
        if cv.differential(cv.differential({t: Fraction(1)})):
            bad.append(("conv", t))
    return bad


def _derivation_failure(a, i, b):
    lhs = brace.differential(brace.insert({a: 1}, i, {b: 1}))
    r1 = brace.insert(brace.differential({a: 1}), i, {b: 1})
    r2 = brace.insert({a: 1}, i, brace.differential({b: 1}))
    return bool(_sub(_sub(lhs, r1), r2, _sign(brace.degree(a))))


def insertion_derivation():
    bad = []
    trees = _std_trees()
    for a in trees:
        for b in trees:
            for i in range(1, brace.arity(a) + 1):
                if _derivation_failure(a, i, b):
                    bad.append((a, i, b))
    rng = random.Random(SEED)
    pool = _arity4_trees()
    for _ in range(SAMPLES):
        a, b = rng.choice(pool), rng.choice(trees)
        if rng.random() < 0.5:
            a, b = b, a
        i = rng.randint(1, brace.arity(a))
        if _derivation_failure(a, i, b):
            bad.append((a, i, b))
    return bad


def _bracket_derivation_failure(f, g):
    df = cv.homogeneous_degree(f)
    lhs = cv.differential(cv.bracket(f, g))
    rhs = cv.add(cv.bracket(cv.differential(f), g),
                 cv.scale(_sign(df), cv.bracket(f, cv.differential(g))))
    return cv.sub(lhs, rhs) != {}


def bracket_derivation():
    bad = []
    terms = _terms()
    for f in terms:
        for g in terms:
            if _bracket_derivation_failure({f: Fraction(1)}, {g: Fraction(1)}):
                bad.append((f, g))
    rng = random.Random(SEED)
    big = _terms(4, 3)
    for _ in range(SAMPLES):
        f, g = {rng.choice(big): Fraction(1)}, {rng.choice(terms): Fraction(rng.choice((-1, 2)))}
        if _bracket_derivation_failure(f, g) or _bracket_derivation_failure(g, f):
            bad.append((f, g))
    return bad


# -- convolution bracket ----------------------------------------------------------

def _antisymmetry_failure(f, g):
    df, dg = cv.homogeneous_degree(f), cv.homogeneous_degree(g)
    return cv.add(cv.bracket(f, g), cv.scale(_sign(df * dg), cv.bracket(g, f))) != {}


def _jacobi_failure(f, g, h):
    df, dg, dh = (cv.homogeneous_degree(x) for x in (f, g, h))
    total = cv.add(cv.scale(_sign(df * dh), cv.bracket(f, cv.bracket(g, h))),
                   cv.scale(_sign(dg * df), cv.bracket(g, cv.bracket(h, f))),
                   cv.scale(_sign(dh * dg), cv.bracket(h, cv.bracket(f, g))))
    return total != {}


def antisymmetry_and_jacobi():
    bad = []
    terms = [{t: Fraction(1)} for t in _terms()]
    for f in terms:
        for g in terms:
            if _antisymmetry_failure(f, g):
                bad.append(("antisymmetry", f, g))
    two = [{t: Fraction(1)} for d in range(3) for t in cv.basis(2, d)]
    for f in two:
        for g in two:
            for h in terms:
                if _jacobi_failure(f, g, h):
                    bad.append(("jacobi", f, g, h))
    rng = random.Random(SEED)
    big = _terms(4, 3)
    for _ in range(SAMPLES // 2):
        f = {rng.choice(big): Fraction(1)}
        g, h = rng.sample(two, 2)
        if _antisymmetry_failure(f, g) or _jacobi_failure(f, g, h):
            bad.append(("random", f, g, h))
    return bad


def pre_lie_identity():
    """Right-symmetric associator: (f.g).h - f.(g.h) is graded symmetric in g, h."""
    bad = []
    rng = random.Random(SEED)
    two = [{t: Fraction(1)} for d in range(3) for t in cv.basis(2, d)]
    three = [{t: Fraction(1)} for t in _terms()]
    for _ in range(SAMPLES):
        f, g, h = rng.choice(three), rng.choice(two), rng.choice(two + three[:10])
        dg, dh = cv.homogeneous_degree(g), cv.homogeneous_degree(h)
        a1 = cv.sub(cv.pre_lie(cv.pre_lie(f, g), h), cv.pre_lie(f, cv.pre_lie(g, h)))
        a2 = cv.sub(cv.pre_lie(cv.pre_lie(f, h), g), cv.pre_lie(f, cv.pre_lie(h, g)))
        if cv.sub(a1, cv.scale(_sign(dg * dh), a2)):
            bad.append((f, g, h))
    return bad


# -- operad axioms -------------------------------------------------------------------

def _br_assoc_failures(a, b, c):
    bad = []
    n, m = brace.arity(a), brace.arity(b)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            lhs = brace.insert(brace.insert({a: 1}, i, {b: 1}), i + j - 1, {c: 1})
            rhs = brace.insert({a: 1}, i, brace.insert({b: 1}, j, {c: 1}))
            if lhs != rhs:
                bad.append(("sequential", a, i, b, j, c))
        for k in range(i + 1, n + 1):
            lhs = brace.insert(brace.insert({a: 1}, i, {b: 1}), k + m - 1, {c: 1})
            rhs = brace.insert(brace.insert({a: 1}, k, {c: 1}), i, {b: 1})
            if lhs != {t: _sign(brace.degree(b) * brace.degree(c)) * v for t, v in rhs.items()}:
                bad.append(("parallel", a, i, b, k, c))
    return bad


def br_associativity():
    bad = []
    trees = _std_trees()
    small = _std_trees(2, 1)
    for a in trees:
        for b in trees:
            for c in small if brace.arity(a) + brace.arity(b) > 5 else trees:
                bad.extend(_br_assoc_failures(a, b, c))
    rng = random.Random(SEED)
    pool = _arity4_trees()
    for _ in range(SAMPLES):
        a, b, c = rng.choice(pool), rng.choice(small), rng.choice(small)
        bad.extend(_br_assoc_failures(a, b, c))
    return bad


def _br_equivariance_failures(a, i, b, host_perms, guest_perms):
    bad = []
    n, m = brace.arity(a), brace.arity(b)
    base = brace.insert({a: 1}, i, {b: 1})
    for s in host_perms:
        if brace.insert({brace.act(s, a): 1}, s[i - 1], {b: 1}) != _act_br(_host_block(s, i, m), base):
            bad.append(("host", a, i, b, s))
    for s in guest_perms:
        if brace.insert({a: 1}, i, {brace.act(s, b): 1}) != _act_br(_guest_block(n, i, s), base):
            bad.append(("guest", a, i, b, s))
    return bad


def br_equivariance():
    bad = []
    trees = _std_trees()
    for a in trees:
        for b in trees:
            hp = list(permutations(range(1, brace.arity(a) + 1)))
            gp = list(permutations(range(1, brace.arity(b) + 1)))
            for i in range(1, brace.arity(a) + 1):
                bad.extend(_br_equivariance_failures(a, i, b, hp, gp))
    for t in _trees():
        n = brace.arity(t)
        d = brace.differential({t: 1})
        for s in permutations(range(1, n + 1)):
            if brace.differential({brace.act(s, t): 1}) != _act_br(s, d):
                bad.append(("differential", t, s))
    rng = random.Random(SEED)
    pool = _arity4_trees()
    perms4 = list(permutations(range(1, 5)))
    for _ in range(SAMPLES):
        a, b = rng.choice(pool), rng.choice(trees)
        i = rng.randint(1, 4)
        gp = list(permutations(range(1, brace.arity(b) + 1)))
        bad.extend(_br_equivariance_failures(a, i, b, [rng.choice(perms4)], gp))
    return bad


def _ger_assoc_failures(a, b, c):
    bad = []
    n, m = ger.word_arity(a), ger.word_arity(b)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            lhs = ger.ger_compose(ger.ger_compose({a: 1}, i, {b: 1}), i + j - 1, {c: 1})
            rhs = ger.ger_compose({a: 1}, i, ger.ger_compose({b: 1}, j, {c: 1}))
            if lhs != rhs:
                bad.append(("sequential", a, i, b, j, c))
        for k in range(i + 1, n + 1):
            lhs = ger.ger_compose(ger.ger_compose({a: 1}, i, {b: 1}), k + m - 1, {c: 1})
            rhs = ger.ger_compose(ger.ger_compose({a: 1}, k, {c: 1}), i, {b: 1})
            s = _sign(ger.ger_degree(b) * ger.ger_degree(c))
            if lhs != {w: s * v for w, v in rhs.items()}:
                bad.append(("parallel", a, i, b, k, c))
    return bad


def _ger_equivariance_failures(a, i, b, host_perms, guest_perms):
    bad = []
    n, m = ger.word_arity(a), ger.word_arity(b)
    base = ger.ger_compose({a: 1}, i, {b: 1})
    for s in host_perms:
        if ger.ger_compose(ger.act(s, {a: 1}), s[i - 1], {b: 1}) != ger.act(_host_block(s, i, m), base):
            bad.append(("host", a, i, b, s))
    for s in guest_perms:
        if ger.ger_compose({a: 1}, i, ger.act(s, {b: 1})) != ger.act(_guest_block(n, i, s), base):
            bad.append(("guest", a, i, b, s))
    return bad


def ger_associativity():
    bad = []
    words = _words()
    for a in words:
        for b in words:
            for c in words:
                bad.extend(_ger_assoc_failures(a, b, c))
    rng = random.Random(SEED)
    four = ger.enumerate_ger_basis(4)
    for _ in range(SAMPLES):
        bad.extend(_ger_assoc_failures(rng.choice(four), rng.choice(words), rng.choice(words)))
    return bad


def ger_equivariance():
    bad = []
    words = _words()
    for a in words:
        for b in words:
            hp = list(permutations(range(1, ger.word_arity(a) + 1)))
            gp = list(permutations(range(1, ger.word_arity(b) + 1)))
            for i in range(1, ger.word_arity(a) + 1):
                bad.extend(_ger_equivariance_failures(a, i, b, hp, gp))
    rng = random.Random(SEED)
    four = ger.enumerate_ger_basis(4)
    perms4 = list(permutations(range(1, 5)))
    for _ in range(SAMPLES):
        a, b = rng.choice(four), rng.choice(words)
        gp = list(permutations(range(1, ger.word_arity(b) + 1)))
        bad.extend(_ger_equivariance_failures(a, rng.randint(1, 4), b, [rng.choice(perms4)], gp))
    return bad


def cocompose_transpose():
    bad = []
    for n in range(1, 5):
        for k in range(1, n + 1):
            m = n - k + 1
            for i in range(1, k + 1):
                brute = {}
                for u in ger.enumerate_ger_basis(k):
                    for v in ger.enumerate_ger_basis(m):
                        for w, c in ger.ger_compose({u: 1}, i, {v: 1}).items():
                            brute.setdefault(w, set()).add((Fraction(c), u, v))
                for w in ger.enumerate_ger_basis(n):
                    if set(ger.cocompose(w, (k, i, m))) != brute.get(w, set()):
                        bad.append((w, (k, i, m)))
    return bad


# -- coinvariants -----------------------------------------------------------------

def _raw_terms(n, max_nu=2):
    return [(t, w) for nu in range(min(n - 1, max_nu) + 1) for t in brace.enumerate_basis(n, nu - n + 1)
            for w in ger.enumerate_ger_basis(n)]


def _av_failures(tree, word, perms):
    x = {(tree, word): Fraction(1)}
    once = cv.renormalize(x)
    bad = []
    if cv.renormalize(once) != once:
        bad.append(("idempotent", tree, word))
    for p in perms:
        if cv.renormalize(cv.act(p, x)) != once:
            bad.append(("orbit", tree, word, p))
    return bad


def av_normalize_laws():
    bad = []
    for n in (1, 2, 3):
        perms = list(permutations(range(1, n + 1)))
        for tree, word in _raw_terms(n):
            bad.extend(_av_failures(tree, word, perms))
    rng = random.Random(SEED)
    perms4 = list(permutations(range(1, 5)))
    for tree, word in rng.sample(_raw_terms(4, 3), 4 * SAMPLES):
        bad.extend(_av_failures(tree, word, rng.sample(perms4, 3)))
    return bad


SUITES = [
    ("d_squared", d_squared),
    ("insertion_derivation", insertion_derivation),
    ("bracket_derivation", bracket_derivation),
    ("antisymmetry_and_jacobi", antisymmetry_and_jacobi),
    ("pre_lie_identity", pre_lie_identity),
    ("br_associativity", br_associativity),
    ("br_equivariance", br_equivariance),
    ("ger_associativity", ger_associativity),
    ("ger_equivariance", ger_equivariance),
    ("cocompose_transpose", cocompose_transpose),
    ("av_normalize_laws", av_normalize_laws),
]
