import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import laurent_polys, sym_vars, to_sympy
from lgcluster.clusterkit import (
    BMatrix, Quiver, SubstitutionChain, bmatrix_mutate, chain_apply, matrix_rank, point_mutate,
    quiver_from_b, quiver_mutate, x_mutate, x_mutation_images, y_exponents, y_mutate, y_variables,
)
from lgcluster.exactalg import LaurentPoly, PrimePoint, RatFunc, substitute
from lgcluster.repchar import QUIVER_B
from lgcluster.lgseed import SurfaceId

X = lambda text, n=3: LaurentPoly.parse(text, n)  # noqa: E731
CP2 = QUIVER_B[SurfaceId.CP2]


@st.composite
def skew_matrices(draw, n_min=2, n_max=5, bound=3):
    n = draw(st.integers(n_min, n_max))
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            b = draw(st.integers(-bound, bound))
            rows[i][j], rows[j][i] = b, -b
    return BMatrix(tuple(map(tuple, rows)))


def test_bmatrix_validation():
    with pytest.raises(ValueError):
        BMatrix(((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        BMatrix(((0, 1, 0), (-1, 0)))
    assert BMatrix.zero(3).rank() == 0


def test_cp2_mutation_example():
    assert bmatrix_mutate(CP2, 0).rows == ((0, -3, 3), (3, 0, -6), (-3, 6, 0))
    with pytest.raises(IndexError):
        bmatrix_mutate(CP2, 3)


@given(skew_matrices(), st.data())
def test_bmatrix_mutation_is_involutive(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    C = bmatrix_mutate(B, i)
    assert bmatrix_mutate(C, i) == B
    assert all(C[j, k] == -C[k, j] for j in range(B.n) for k in range(B.n))


@given(skew_matrices(), st.data())
def test_mutation_preserves_rank(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    assert bmatrix_mutate(B, i).rank() == B.rank()


def test_matrix_rank_against_sympy():
    rng = random.Random(1)
    for _ in range(30):
        rows = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(rng.randint(1, 5))]
        assert matrix_rank(rows) == sympy.Matrix(rows).rank()


@pytest.mark.parametrize("surface", list(SurfaceId))
def test_initial_matrices_have_rank_two(surface):
    assert QUIVER_B[surface].rank() == 2


def test_cp2_quiver_is_a_triple_triangle():
    Q = quiver_from_b(CP2)
    assert sorted(Q.arrows()) == [(0, 2, 3), (1, 0, 3), (2, 1, 3)]
    assert Q.to_bmatrix() == CP2


def test_bl3_quiver_has_twelve_single_arrows():
    Q = quiver_from_b(QUIVER_B[SurfaceId.Bl3CP2])
    assert Q.arrow_count() == 12
    assert all(m == 1 for _, _, m in Q.arrows())


def test_quiver_mutate_example():
    Q = quiver_mutate(quiver_from_b(CP2), 0)
    assert sorted(m for _, _, m in Q.arrows()) == [3, 3, 6]


def test_quiver_rejects_two_cycles_and_loops():
    with pytest.raises(ValueError):
        Quiver(((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Quiver(((1,),))


@given(skew_matrices(), st.data())
def test_functor_square(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    assert quiver_mutate(quiver_from_b(B), i) == quiver_from_b(bmatrix_mutate(B, i))
    assert quiver_from_b(B).to_bmatrix() == B


def test_quiver_dot():
    dot = quiver_from_b(CP2).to_dot("CP2")
    assert dot.startswith("digraph CP2 {") and dot.rstrip().endswith("}")
    assert "1 -> 3 [label=3];" in dot


def test_y_variables_cp2():
    ys = y_variables(CP2)
    assert ys == [X("x2^-3*x3^3"), X("x1^3*x3^-3"), X("x1^-3*x2^3")]


def test_y_variables_bl1():
    ys = y_variables(QUIVER_B[SurfaceId.Bl1CP2])
    assert ys[0] == X("x2^-3*x3*x4^2", 4)
    assert y_exponents(QUIVER_B[SurfaceId.Bl1CP2])[0] == (0, -3, 1, 2)


def test_x_mutation_images_cp2():
    imgs = x_mutation_images(CP2, 0)
    assert imgs[0] == RatFunc(X("x1^-1*x2^3 + x1^-1*x3^3"))
    assert imgs[0] == X("x1^-1*x2^3") * (1 + RatFunc(X("x2^-3*x3^3")))
    assert imgs[1] == X("x2") and imgs[2] == X("x3")


@given(skew_matrices(n_max=4), st.data())
def test_x_mutation_is_involutive(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    x = RatFunc(LaurentPoly.var(B.n, i))
    once = x_mutate(B, i, x)
    assert x_mutate(bmatrix_mutate(B, i), i, once) == x


@given(skew_matrices(n_max=3, bound=2), st.data())
def test_x_mutate_matches_substitution(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    f = data.draw(laurent_polys(B.n, max_terms=3, max_exp=2))
    got = x_mutate(B, i, f)
    want = substitute(f, x_mutation_images(B, i))
    assert RatFunc.coerce(got) == want


def test_x_mutate_against_sympy():
    xs = sym_vars(3)
    f = X("x1^-2*x2 + 3*x3 - x1*x2^-1")
    imgs = x_mutation_images(CP2, 0)
    expected = to_sympy(f, xs).subs(
        {x: to_sympy(g.num, xs) / to_sympy(g.den, xs) for x, g in zip(xs, imgs)},
        simultaneous=True)
    got = RatFunc.coerce(x_mutate(CP2, 0, f))
    assert sympy.simplify(to_sympy(got.num, xs) / to_sympy(got.den, xs) - expected) == 0


def test_x_mutate_with_isolated_vertex():
    B = BMatrix.zero(2)
    assert x_mutate(B, 0, X("x1", 2)) == RatFunc(X("2*x1^-1", 2))


def test_chain_along_records_matrices():
    chain = SubstitutionChain.along(CP2, [0, 1])
    assert len(chain) == 2
    assert chain.steps[0] == (0, CP2)
    assert chain.steps[1] == (1, bmatrix_mutate(CP2, 0))
    assert chain.final_matrix == bmatrix_mutate(bmatrix_mutate(CP2, 0), 1)


def test_chain_apply_exact_and_pointwise_agree():
    rng = random.Random(7)
    f = X("x1^-1*x2^2*x3^-1 + x1^2*x2^-1*x3^-1")
    for seq in ([0], [1, 2], [2, 0, 1]):
        chain = SubstitutionChain.along(CP2, seq)
        exact = RatFunc.coerce(chain_apply(chain, f))
        for _ in range(5):
            pt = PrimePoint.random(3, rng, 1_000_003)
            try:
                val = chain_apply(chain, f, pt)
            except ArithmeticError:
                continue
            assert val == exact.eval_mod_p(pt)


@given(skew_matrices(n_max=4), st.lists(st.integers(0, 3), min_size=1, max_size=4),
       st.integers(0, 10 ** 6))
def test_forward_push_inverts_chain(B, seq, seed):
    seq = [i % B.n for i in seq]
    chain = SubstitutionChain.along(B, seq)
    p = 1_000_003
    u = PrimePoint.random(B.n, random.Random(seed), p)
    f = LaurentPoly.var(B.n, 0) + LaurentPoly.var(B.n, B.n - 1) ** -2
    try:
        x = u.coords
        for i, C in chain.steps:
            x = point_mutate(C, i, x, p)
        val = chain_apply(chain, f, PrimePoint(p, x))
    except ArithmeticError:
        return
    assert val == f.eval_mod_p(u)


def test_point_mutate_formula():
    # x1' = (x2^3 + x3^3) / x1 for the CP2 matrix at vertex 1
    p = 101
    x = (2, 3, 5)
    assert point_mutate(CP2, 0, x, p) == ((27 + 125) * pow(2, -1, p) % p, 3, 5)


@given(skew_matrices(n_max=4), st.data())
def test_y_mutation_is_involutive(B, data):
    i = data.draw(st.integers(0, B.n - 1))
    ys = [RatFunc(LaurentPoly.var(B.n, j)) for j in range(B.n)]
    once = y_mutate(B, ys, i)
    twice = y_mutate(bmatrix_mutate(B, i), once, i)
    assert all(a == b for a, b in zip(twice, ys))


def test_y_mutate_example():
    ys = [RatFunc(LaurentPoly.var(3, j)) for j in range(3)]
    out = y_mutate(CP2, ys, 0)
    assert out[0] == X("x1^-1")
    # b_12 = 3 > 0: y2 -> y2 y1^3 (1 + y1)^-3
    assert out[1] == X("x2*x1^3") * RatFunc(X("1 + x1")) ** -3
    # b_13 = -3 < 0: y3 -> y3 (1 + y1)^3
    assert out[2] == X("x3") * RatFunc(X("1 + x1")) ** 3


def test_y_variables_mutate_like_y_seeds():
    # the y-variables of mu_i B are the y-mutation of those of B
    for B in QUIVER_B.values():
        for i in range(B.n):
            ys = [RatFunc(y) for y in y_variables(B)]
            mutated = y_mutate(B, ys, i)
            images = x_mutation_images(B, i)
            new = [substitute(y, images) for y in y_variables(bmatrix_mutate(B, i))]
            assert all(a == b for a, b in zip(new, mutated))
