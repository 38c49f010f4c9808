from fractions import Fraction

import pytest

from sprout_forge import brace, convolution as cv, ger
from sprout_forge.convolution import ConvError

from conftest import random_conv

T12 = brace.parse_tree("r(1(2))")
T_CUP = brace.parse_tree("r(•(1,2))")
T_1_DOT_23 = brace.parse_tree("r(1(•(2,3)))")


def W(text):
    return ger.parse_word(text)


def test_av_normalize_empty():
    assert cv.av_normalize([]) == {}


def test_alpha_prime_arity_two(alpha_prime):
    assert cv.component(alpha_prime, 2) == {
        (T12, W("b1 b2")): Fraction(1),
        (T_CUP, W("{b1,b2}")): Fraction(1, 2),
    }
    assert alpha_prime[(T_1_DOT_23, W("{b1,{b2,b3}}"))] == Fraction(-1, 12)
    assert len(alpha_prime) == 7


def test_transposition_merges_with_orbit_sign():
    for tree in brace.enumerate_basis(2, -1) + brace.enumerate_basis(2, 0):
        for word in ger.enumerate_ger_basis(2):
            x = {(tree, word): Fraction(1)}
            moved = cv.act((2, 1), x)
            merged = cv.renormalize(cv.add(x, moved))
            single = cv.renormalize(x)
            assert merged == cv.scale(2, single)
            # brute force: half the explicit orbit sum, folded to representatives
            assert merged == cv.renormalize(cv.orbit_sum(x))


def test_av_normalize_rejects_mismatched_arity():
    with pytest.raises(ConvError):
        cv.av_normalize([(1, T12, W("b1 b2 b3"))])


def test_pre_lie_zero_and_degree(alpha_prime):
    assert cv.pre_lie(alpha_prime, {}) == {}
    assert cv.pre_lie({}, alpha_prime) == {}
    assert cv.degrees(cv.pre_lie(alpha_prime, alpha_prime)) == [2]


def test_pre_lie_degree_additive(rng):
    for _ in range(30):
        d1, d2 = rng.randint(0, 2), rng.randint(0, 2)
        f, g = random_conv(rng, 2, d1), random_conv(rng, rng.choice((2, 3)), d2)
        if not f or not g:
            continue
        assert set(cv.degrees(cv.pre_lie(f, g))) <= {d1 + d2}


def test_bracket_of_odd_element_is_twice_pre_lie(alpha_prime):
    assert cv.bracket(alpha_prime, alpha_prime) == cv.scale(2, cv.pre_lie(alpha_prime, alpha_prime))


def test_alpha_prime_curvature(alpha_prime):
    curv = cv.curvature(alpha_prime)
    assert cv.component(curv, 2) == {}
    assert cv.component(curv, 3) == {}
    assert cv.component(curv, 4) != {}


def test_curvature_of_zero_and_wrong_degree():
    assert cv.curvature({}) == {}
    with pytest.raises(ConvError):
        cv.curvature({cv.basis(2, 2)[0]: Fraction(1)})


def test_truncate(alpha_prime):
    assert cv.arities(cv.truncate(alpha_prime, 1)) == [2]
    assert cv.truncate(alpha_prime, 2) == alpha_prime
    with pytest.raises(ConvError):
        cv.truncate(alpha_prime, 0)


def test_truncate_composes(order3):
    x, _ = order3
    for m in range(1, 5):
        for n in range(1, 5):
            assert cv.truncate(cv.truncate(x, m), n) == cv.truncate(x, min(m, n))


def test_is_sprout_examples(alpha_prime):
    assert cv.is_sprout(alpha_prime, 2)[0]
    ok, residue = cv.is_sprout(alpha_prime, 3)
    assert not ok
    assert residue and all(arity == 4 and degree == 2 for arity, degree, _, _ in residue)
    for n in range(1, 6):
        assert cv.is_sprout({}, n) == (True, [])


def test_differential_squares_to_zero_on_basis():
    assert cv.differential({}) == {}
    for n in (2, 3, 4):
        for d in range(-1, 5):
            for term in cv.basis(n, d):
                once = cv.differential({term: Fraction(1)})
                assert set(cv.degrees(once)) <= {d + 1}
                assert cv.differential(once) == {}


def test_filtration_compatibility(rng):
    for _ in range(20):
        a, b = rng.choice((2, 3)), rng.choice((2, 3))
        f, g = random_conv(rng, a, 1), random_conv(rng, b, rng.randint(0, 2))
        out = cv.bracket(f, g)
        assert all(n >= a + b - 1 for n in cv.arities(out))


def test_format_term():
    assert cv.format_term((T12, W("b1 b2"))) == "r(1(2)) (x) b1 b2"
