import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import laurent_polys
from lgcluster.exactalg import LaurentPoly, PrimePoint, RatFunc, eval_mod_p, substitute
from lgcluster.lgseed import (
    LGSeed, NotLaurent, RepetitionRejected, SurfaceId, initial_seed, is_primitive, iterate,
    iterate_all, monomial_mutate, mutate_directions, mutate_potential, perp, point_pullback,
    scalar, seed_mutate, symplectic, tropical_mutate,
)

Z = lambda text: LaurentPoly.parse(text, 2, "z")  # noqa: E731

vectors = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
primitive = vectors.filter(is_primitive)


def test_pairings():
    assert perp((2, -3)) == (-3, -2)
    assert scalar((1, 2), (3, -1)) == 1
    assert symplectic((1, 0), (0, 1)) == 1
    assert symplectic((0, 1), (1, 0)) == -1


def test_tropical_mutate():
    # {w, v} = 1*1 - (-2)*1 = 3 > 0
    assert tropical_mutate((1, 1), (1, -2)) == (4, 1)
    # {w, v} < 0 leaves w alone
    assert tropical_mutate((1, -2), (1, 1)) == (1, 1)


def test_monomial_mutate():
    # (v, w) = 1 for v = (1, 0), w = (1, 0); v perp = (0, -1)
    got = monomial_mutate((1, 0), (1, 0))
    assert got == RatFunc(Z("z1"), Z("1 + z2^-1"))
    # w orthogonal to v is fixed
    assert monomial_mutate((1, 0), (0, 5)) == Z("z2^5")


def test_cp2_mutation_example():
    s = seed_mutate(initial_seed("CP2"), 0)
    assert s.potential == Z("z1^-1*z2^-1 + 2*z2^-2 + z2 + z1*z2^-3")
    assert s.directions == ((-1, -1), (-2, 1), (4, 1))
    assert s.distinct


def test_double_mutation_is_a_transvection():
    s = initial_seed("Bl1CP2")
    for i in range(s.n):
        v = s.directions[i]
        vp = perp(v)
        twice = seed_mutate(seed_mutate(s, i), i)
        shear = s.potential.map_exponents(
            lambda w, v=v, vp=vp: (w[0] - scalar(v, w) * vp[0], w[1] - scalar(v, w) * vp[1]))
        assert twice.potential == shear
        assert twice.directions[i] == v
        for j, w in enumerate(s.directions):
            k = symplectic(w, v)
            assert twice.directions[j] == (w[0] + k * v[0], w[1] + k * v[1])


def test_cp2_double_mutation_is_not_involutive():
    s0 = initial_seed("CP2")
    s = iterate(s0, [0, 0], allow_repeats=True)
    assert s.directions == ((1, 1), (-5, -2), (4, 1))
    assert s != s0


def test_mutate_potential_not_laurent():
    with pytest.raises(NotLaurent) as info:
        mutate_potential(Z("z1^2 + z2"), (1, 0))
    assert info.value.remainder is not None and not info.value.remainder.is_zero()


def test_mutate_potential_matches_substitution():
    W = initial_seed("Bl2CP2").potential
    v = (1, 1)
    images = [monomial_mutate(v, (1, 0)), monomial_mutate(v, (0, 1))]
    assert RatFunc(mutate_potential(W, v)) == substitute(W, images)


@given(primitive, vectors)
def test_transvection_law(v, w):
    # mu_{-v} mu_v (z^w) = z^{w - (v,w) v perp}: (1+t^-1)^k (1+t)^-k = t^-k
    first = monomial_mutate(v, w)
    back = substitute(first, [monomial_mutate((-v[0], -v[1]), (1, 0)),
                              monomial_mutate((-v[0], -v[1]), (0, 1))])
    k = scalar(v, w)
    vp = perp(v)
    assert back == LaurentPoly.monomial((w[0] - k * vp[0], w[1] - k * vp[1]))


@given(primitive, vectors)
def test_tropical_transvection(v, w):
    neg = (-v[0], -v[1])
    k = symplectic(w, v)
    assert tropical_mutate(neg, tropical_mutate(v, w)) == (w[0] + k * v[0], w[1] + k * v[1])


def test_symplectic_is_minus_perp_pairing():
    for v in [(1, 1), (-2, 1), (3, -5)]:
        for w in [(0, 1), (4, 7), (-1, -1)]:
            assert symplectic(v, w) == -scalar(perp(v), w)


@given(primitive, laurent_polys(2, max_terms=3),
       st.tuples(st.integers(1, 100), st.integers(1, 100)))
def test_point_pullback_evaluates_mutated_potential(v, W, z):
    # make W divisible: multiply by a high power of the binomial
    binom = LaurentPoly.one(2) + LaurentPoly.monomial(perp(v))
    W = W * binom ** 6
    try:
        mutated = mutate_potential(W, v)
    except NotLaurent:
        return
    p = 101
    try:
        pulled = point_pullback(v, z, p)
    except ArithmeticError:
        return
    assert eval_mod_p(mutated, PrimePoint(p, z)) == eval_mod_p(W, PrimePoint(p, pulled))


def test_mutate_directions():
    dirs = ((1, 1), (-2, 1), (1, -2))
    assert mutate_directions(dirs, 0) == ((-1, -1), (-2, 1), (4, 1))


@pytest.mark.parametrize("surface", list(SurfaceId))
def test_initial_seeds_are_valid(surface):
    s = initial_seed(surface)
    assert s.distinct
    assert all(is_primitive(v) for v in s.directions)
    assert s.n == {SurfaceId.CP2: 3, SurfaceId.CP1xCP1: 4, SurfaceId.Bl1CP2: 4,
                   SurfaceId.Bl2CP2: 5, SurfaceId.Bl3CP2: 6}[surface]


def test_surface_parsing():
    assert SurfaceId.parse("cp2") is SurfaceId.CP2
    assert SurfaceId.parse("BL3") is SurfaceId.Bl3CP2
    assert SurfaceId.parse("p1xp1") is SurfaceId.CP1xCP1
    with pytest.raises(ValueError):
        SurfaceId.parse("Bl4CP2")


def test_seed_validation():
    with pytest.raises(ValueError):
        LGSeed(Z("z1"), ((2, 0),))
    with pytest.raises(ValueError):
        LGSeed(LaurentPoly.parse("x1", 3), ((1, 0),))
    with pytest.raises(IndexError):
        seed_mutate(initial_seed("CP2"), 3)


def test_seed_json_round_trip():
    s = iterate(initial_seed("CP1xCP1"), [0, 2])
    assert LGSeed.from_json(s.to_json()) == s


def test_iterate_order_and_repetition():
    s0 = initial_seed("CP2")
    assert iterate(s0, [0, 1]) == seed_mutate(seed_mutate(s0, 0), 1)
    with pytest.raises(RepetitionRejected):
        iterate(s0, [0, 0])
    assert iterate(s0, [0, 0], allow_repeats=True) == seed_mutate(seed_mutate(s0, 0), 0)
    with pytest.raises(IndexError):
        iterate(s0, [5])


def test_iterate_all_lists_every_step():
    s0 = initial_seed("CP2")
    chain = iterate_all(s0, [2, 0, 1])
    assert len(chain) == 4 and chain[0] == s0
    assert chain[-1] == iterate(s0, [2, 0, 1])


def test_not_laurent_records_step():
    s = LGSeed(Z("z1^2 + z2"), ((0, 1), (1, 0)))
    with pytest.raises(NotLaurent) as info:
        iterate(s, [0, 1])
    assert info.value.step is not None and info.value.index is not None


def test_distinctness_lost_only_through_antipodal_pairs():
    # CP2 and Bl1 have no antipodal pair and keep distinct directions
    rng = random.Random(5)
    for name in ("CP2", "Bl1CP2"):
        s0 = initial_seed(name)
        for _ in range(10):
            seq = rng.sample(range(s0.n), s0.n)
            assert all(s.distinct for s in iterate_all(s0, seq))
    # CP1xCP1: v4 = -v1, so mutating at 1 duplicates a direction
    s = seed_mutate(initial_seed("CP1xCP1"), 0)
    assert not s.distinct
    assert s.directions[0] == s.directions[3] == (-1, -1)
