"""Exchange matrices, quivers and the x/y-variable mutations of a cluster seed.

Conventions (0-based vertex indices):

* ``Q(B)`` has ``[-b_ij]_+`` arrows ``i -> j``;
* ``y_i = prod_j x_j^{b_ji}``;
* ``mu_i`` sends ``x_i`` to ``x_i^{-1} prod_j x_j^{[b_ij]_+} (1 + y_i)`` and fixes
  every other ``x_j``.

Matrix mutation flips the sign of row and column ``i``.  That is the rule
under which the exchange matrix of a mutated LG seed is the mutated
exchange matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exactalg import (
    DegeneratePoint,
    LaurentPoly,
    NotDivisible,
    PrimePoint,
    RatFunc,
    batch_inverse,
    binomial_twist,
    eval_mod_p,
    substitute,
)


def pos(a: int) -> int:
    return a if a > 0 else 0


@dataclass(frozen=True)
class BMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ValueError("B-matrix must be square")
            if r[i]:
                raise ValueError(f"nonzero diagonal entry at {i}")
            for j in range(i + 1, n):
                if r[j] != -rows[j][i]:
                    raise ValueError(f"not skew-symmetric at ({i}, {j})")

    @classmethod
    def zero(cls, n: int) -> "BMatrix":
        return cls(tuple((0,) * n for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def mutate(self, i: int) -> "BMatrix":
        return bmatrix_mutate(self, i)

    def rank(self) -> int:
        return matrix_rank(self.rows)

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __str__(self) -> str:
        w = max((len(str(x)) for r in self.rows for x in r), default=1)
        return "\n".join(" ".join(str(x).rjust(w) for x in r) for r in self.rows)


def matrix_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals by Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexError(f"vertex {i} out of range for {n} vertices")


def bmatrix_mutate(B: BMatrix, i: int) -> BMatrix:
    _check_index(i, B.n)
    b = B.rows
    rows = []
    for j in range(B.n):
        row = []
        for k in range(B.n):
            if j == i or k == i:
                row.append(-b[j][k])
            else:
                row.append(b[j][k] + pos(b[j][i]) * pos(b[i][k])
                           - pos(-b[j][i]) * pos(-b[i][k]))
        rows.append(tuple(row))
    return BMatrix(tuple(rows))


@dataclass(frozen=True)
class Quiver:
    """Arrow multiplicities ``m[i][j]`` = number of arrows ``i -> j``."""

    mult: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = tuple(tuple(int(x) for x in r) for r in self.mult)
        object.__setattr__(self, "mult", m)
        n = len(m)
        for i, r in enumerate(m):
            if len(r) != n:
                raise ValueError("multiplicity matrix must be square")
            if r[i]:
                raise ValueError(f"loop at vertex {i}")
            for j, x in enumerate(r):
                if x < 0:
                    raise ValueError("negative multiplicity")
                if x and m[j][i]:
                    raise ValueError(f"2-cycle between {i} and {j}")

    @property
    def n(self) -> int:
        return len(self.mult)

    def arrows(self) -> list[tuple[int, int, int]]:
        """``(source, target, multiplicity)`` for every arrow class."""
        return [(i, j, x) for i, r in enumerate(self.mult) for j, x in enumerate(r) if x]

    def arrow_count(self) -> int:
        return sum(x for r in self.mult for x in r)

    def mutate(self, i: int) -> "Quiver":
        return quiver_mutate(self, i)

    def to_bmatrix(self) -> BMatrix:
        m = self.mult
        return BMatrix(tuple(tuple(m[j][i] - m[i][j] for j in range(self.n))
                             for i in range(self.n)))

    def to_dot(self, name: str = "Q") -> str:
        lines = [f"digraph {name} {{"]
        for i in range(self.n):
            lines.append(f"  {i + 1};")
        for i, j, x in self.arrows():
            lines.append(f"  {i + 1} -> {j + 1} [label={x}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def quiver_from_b(B: BMatrix) -> Quiver:
    return Quiver(tuple(tuple(pos(-x) for x in r) for r in B.rows))


def quiver_mutate(Q: Quiver, i: int) -> Quiver:
    """Reverse arrows at ``i``, compose paths through ``i``, cancel 2-cycles."""
    _check_index(i, Q.n)
    n = Q.n
    m = [list(r) for r in Q.mult]
    new = [[0] * n for _ in range(n)]
    for j in range(n):
        for k in range(n):
            if j == i:
                new[j][k] = m[k][j]
            elif k == i:
                new[j][k] = m[k][j]
            else:
                new[j][k] = m[j][k] + m[j][i] * m[i][k]
    for j in range(n):
        for k in range(j + 1, n):
            c = min(new[j][k], new[k][j])
            new[j][k] -= c
            new[k][j] -= c
    return Quiver(tuple(tuple(r) for r in new))


def y_exponents(B: BMatrix) -> list[tuple[int, ...]]:
    """Exponent vectors of ``y_1..y_n``: the x_j-exponent of ``y_i`` is ``b_ji``."""
    return [tuple(B.rows[j][i] for j in range(B.n)) for i in range(B.n)]


def y_variables(B: BMatrix) -> list[LaurentPoly]:
    return [LaurentPoly.monomial(e) for e in y_exponents(B)]


def x_mutation_images(B: BMatrix, i: int) -> list[RatFunc]:
    _check_index(i, B.n)
    n = B.n
    images = [RatFunc(LaurentPoly.var(n, j)) for j in range(n)]
    lead = [pos(B.rows[i][j]) for j in range(n)]
    lead[i] -= 1
    y = LaurentPoly.monomial([-B.rows[i][j] for j in range(n)])
    images[i] = RatFunc(LaurentPoly.monomial(lead) * (1 + y))
    return images


def x_mutate(B: BMatrix, i: int, f: "LaurentPoly | RatFunc") -> "LaurentPoly | RatFunc":
    """Substitute the x-mutation images of ``(B, i)`` into ``f``.

    A Laurent ``f`` is handled term-wise: ``x^e`` goes to the monomial
    ``x^e x_i^{-2 e_i} prod_j x_j^{e_i [b_ij]_+}`` times ``(1+y_i)^{e_i}``, and the
    binomial powers are cleared exactly.  If the image is not Laurent (or
    ``f`` is not), the generic rational substitution is used.
    """
    _check_index(i, B.n)
    # a zero row makes the exchange binomial the constant 2
    if isinstance(f, LaurentPoly) and any(B.rows[i]):
        n = B.n
        lead = [pos(B.rows[i][j]) for j in range(n)]
        lead[i] = -1

        def push(e):
            k = e[i]
            return tuple(-k if j == i else e[j] + k * lead[j] for j in range(n))

        unit = [0] * n
        unit[i] = -1
        try:
            return binomial_twist(f.map_exponents(push), [-b for b in B.rows[i]], unit)
        except NotDivisible:
            pass
    return substitute(f, x_mutation_images(B, i), reduce=True)


@dataclass(frozen=True)
class SubstitutionChain:
    """Recorded x-mutations ``(i_k, B_k)``, ``B_k`` being the matrix before step ``k``."""

    steps: tuple[tuple[int, BMatrix], ...] = ()

    def __post_init__(self):
        for i, B in self.steps:
            _check_index(i, B.n)

    @classmethod
    def along(cls, B: BMatrix, seq: Iterable[int]) -> "SubstitutionChain":
        steps = []
        for i in seq:
            steps.append((i, B))
            B = bmatrix_mutate(B, i)
        return cls(tuple(steps))

    def then(self, i: int, B: BMatrix) -> "SubstitutionChain":
        return SubstitutionChain(self.steps + ((i, B),))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final_matrix(self) -> BMatrix | None:
        if not self.steps:
            return None
        i, B = self.steps[-1]
        return bmatrix_mutate(B, i)


@lru_cache(maxsize=4096)
def _exchange_terms(row: tuple[int, ...]) -> tuple[tuple[tuple[int, int], ...], ...]:
    return (tuple((j, b) for j, b in enumerate(row) if b > 0),
            tuple((j, -b) for j, b in enumerate(row) if b < 0))


def fraction_mutate(B: BMatrix, i: int, num: list[int], den: list[int], p: int) -> None:
    """:func:`point_mutate` in place on coordinates ``num[j] / den[j]``."""
    plus, minus = _exchange_terms(B.rows[i])
    pn = pd = mn = md = 1
    for j, b in plus:
        if b == 1:
            pn, pd = pn * num[j] % p, pd * den[j] % p
        else:
            pn, pd = pn * pow(num[j], b, p) % p, pd * pow(den[j], b, p) % p
    for j, b in minus:
        if b == 1:
            mn, md = mn * num[j] % p, md * den[j] % p
        else:
            mn, md = mn * pow(num[j], b, p) % p, md * pow(den[j], b, p) % p
    top = (pn * md + mn * pd) % p
    if top == 0:
        raise DegeneratePoint(f"mutated coordinate {i + 1} vanishes")
    num[i], den[i] = top * den[i] % p, pd * md % p * num[i] % p


def point_mutate(B: BMatrix, i: int, coords: Sequence[int], p: int) -> tuple[int, ...]:
    """Image of a point of ``(F_p^*)^n`` under the x-mutation map of ``(B, i)``.

    Uses ``x_i' = (prod_j x_j^{[b_ij]_+} + prod_j x_j^{[-b_ij]_+}) / x_i``.
    """
    _check_index(i, B.n)
    num, den = list(coords), [1] * len(coords)
    fraction_mutate(B, i, num, den, p)
    out = list(coords)
    out[i] = num[i] * pow(den[i], -1, p) % p
    return tuple(out)


def chain_apply(chain: SubstitutionChain, f: "LaurentPoly | RatFunc",
                point: PrimePoint | None = None):
    """Apply ``mu_{i_N} o ... o mu_{i_1}`` to ``f``.

    Without ``point`` the substitutions are carried out exactly, step ``k``
    substituting the images of ``(B_k, i_k)`` into the current expression;
    Laurent intermediates stay :class:`LaurentPoly`.  With ``point`` the value
    at that point is returned, obtained by pushing the point through the step
    maps in reverse order and evaluating ``f`` there.  Coordinates are kept
    as fractions on the way so that only one inversion is needed.
    """
    if point is None:
        out = f
        for i, B in chain.steps:
            out = x_mutate(B, i, out)
        return out
    p = point.prime
    num, den = list(point.coords), [1] * len(point.coords)
    for i, B in reversed(chain.steps):
        fraction_mutate(B, i, num, den, p)
    n = len(num)
    inv = batch_inverse(num + den, p)
    coords = tuple(a * b % p for a, b in zip(num, inv[n:]))
    inverses = [a * b % p for a, b in zip(den, inv[:n])]
    return eval_mod_p(f, PrimePoint(p, coords), inverses)


def y_mutate(B: BMatrix, ys: Sequence[RatFunc], i: int) -> tuple[RatFunc, ...]:
    """``y_i -> y_i^{-1}``, ``y_j -> y_j y_i^{[b_ij]_+} (1+y_i)^{-b_ij}``."""
    _check_index(i, B.n)
    if len(ys) != B.n:
        raise ValueError(f"{len(ys)} y-values for a rank {B.n} matrix")
    ys = [RatFunc.coerce(y) for y in ys]
    yi = ys[i]
    one_plus = 1 + yi
    out = []
    for j, yj in enumerate(ys):
        if j == i:
            out.append(yi ** -1)
            continue
        b = B.rows[i][j]
        out.append(yj * yi ** pos(b) * one_plus ** (-b))
    return tuple(out)
