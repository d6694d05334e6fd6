"""Thin representations of the del Pezzo quivers and their cluster characters.

The representation attached to a base vertex ``i0`` has ``V_i0 = 0`` and
``V_i = C`` elsewhere.  Arrows touching ``i0`` are zero, an arrow ``i -> j``
is zero when it bypasses ``i0`` (arrows ``i -> i0 -> j`` exist), and every
other arrow carries a generic nonzero scalar.  Since all spaces are at most
one-dimensional, a subrepresentation is a vertex set closed under the
nonzero arrows and each quiver Grassmannian is a point or empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .clusterkit import BMatrix, Quiver, bmatrix_mutate, pos, quiver_from_b, y_exponents, y_mutate
from .exactalg import LaurentPoly, RatFunc, substitute
from .lgseed import SurfaceId

# exchange matrices of the five initial seeds, vertices in seed-direction order
QUIVER_B: dict[SurfaceId, BMatrix] = {
    SurfaceId.CP2: BMatrix((
        (0, 3, -3),
        (-3, 0, 3),
        (3, -3, 0),
    )),
    SurfaceId.CP1xCP1: BMatrix((
        (0, -2, 2, 0),
        (2, 0, 0, -2),
        (-2, 0, 0, 2),
        (0, 2, -2, 0),
    )),
    SurfaceId.Bl1CP2: BMatrix((
        (0, 3, -1, -2),
        (-3, 0, 2, 1),
        (1, -2, 0, 1),
        (2, -1, -1, 0),
    )),
    SurfaceId.Bl2CP2: BMatrix((
        (0, 0, -1, -1, 2),
        (0, 0, 1, 1, -2),
        (1, -1, 0, 1, -1),
        (1, -1, -1, 0, 1),
        (-2, 2, 1, -1, 0),
    )),
    SurfaceId.Bl3CP2: BMatrix((
        (0, 0, 1, -1, 1, -1),
        (0, 0, -1, 1, -1, 1),
        (-1, 1, 0, 0, 1, -1),
        (1, -1, 0, 0, -1, 1),
        (-1, 1, -1, 1, 0, 0),
        (1, -1, 1, -1, 0, 0),
    )),
}

# g-vectors of P(X) = [V] - [(S_1^-)^c] for base vertex 1, from the kernel
# dimensions of the gamma-maps.  CP2: gamma_2 has domain V_2^out = 0 and
# gamma_3 is the zero map on V_3^out = C^3, so g = (-1, 0-1, 3-1).  Bl3 is
# not tabulated anywhere; it is the unique candidate of
# comparison.derive_g_vector and agrees with generic_g_vector.
G_VECTORS: dict[SurfaceId, tuple[int, ...]] = {
    SurfaceId.CP2: (-1, -1, 2),
    SurfaceId.CP1xCP1: (-1, 1, -1, 1),
    SurfaceId.Bl1CP2: (-1, -1, 1, 1),
    SurfaceId.Bl2CP2: (-1, 1, 1, 0, -1),
    SurfaceId.Bl3CP2: (-1, 1, -1, 1, 0, 0),
}


@dataclass(frozen=True)
class ThinRep:
    quiver: Quiver
    base: int
    nonzero: frozenset[tuple[int, int]]

    def __post_init__(self):
        Q = self.quiver
        if not 0 <= self.base < Q.n:
            raise IndexError(f"base vertex {self.base} out of range")
        for i, j in self.nonzero:
            if not Q.mult[i][j]:
                raise ValueError(f"no arrow {i} -> {j}")
            if self.base in (i, j):
                raise ValueError(f"arrow {i} -> {j} touches the zero space at the base vertex")

    @property
    def n(self) -> int:
        return self.quiver.n

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(0 if i == self.base else 1 for i in range(self.n))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i != self.base)

    def successors(self, i: int) -> list[int]:
        return sorted(j for a, j in self.nonzero if a == i)


def thin_rep(Q: Quiver, base: int = 0) -> ThinRep:
    m = Q.mult
    nonzero = set()
    for i, j, _ in Q.arrows():
        if base in (i, j):
            continue
        if m[i][base] and m[base][j]:
            continue
        nonzero.add((i, j))
    return ThinRep(Q, base, frozenset(nonzero))


def initial_rep(surface: "SurfaceId | str", base: int = 0) -> ThinRep:
    surface = SurfaceId.parse(surface)
    return thin_rep(quiver_from_b(QUIVER_B[surface]), base)


def closed_subsets(R: ThinRep) -> list[frozenset[int]]:
    """Vertex sets of the subrepresentations, by exhaustive enumeration."""
    supp = R.support
    out = []
    for mask in range(1 << len(supp)):
        S = frozenset(v for k, v in enumerate(supp) if mask >> k & 1)
        if all(j in S for i, j in R.nonzero if i in S):
            out.append(S)
    return out


def f_polynomial(R: ThinRep) -> LaurentPoly:
    terms: dict[tuple[int, ...], int] = {}
    for S in closed_subsets(R):
        e = tuple(1 if i in S else 0 for i in range(R.n))
        terms[e] = terms.get(e, 0) + 1
    return LaurentPoly(R.n, terms)


def h_vector(R: ThinRep) -> tuple[int, ...]:
    """``-dim Ker(beta_i)``: -1 exactly at nonzero vertices without nonzero outgoing arrows."""
    return tuple(-1 if R.dims[i] and not R.successors(i) else 0 for i in range(R.n))


def g_vector(surface: "SurfaceId | str") -> tuple[int, ...]:
    return G_VECTORS[SurfaceId.parse(surface)]


def _reaches(R: ThinRep, k: int, j: int) -> bool:
    """Is there a path ``k ~> j`` of positive length along nonzero arrows?"""
    seen: set[int] = set()
    stack = [k]
    while stack:
        a = stack.pop()
        for b in R.successors(a):
            if b == j:
                return True
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def _term_rank(rows: list, cols: list, allowed) -> int:
    match: dict = {}

    def augment(r, visited):
        for c in cols:
            if c not in visited and allowed(r, c):
                visited.add(c)
                if c not in match or augment(match[c], visited):
                    match[c] = r
                    return True
        return False

    return sum(augment(r, set()) for r in rows)


def gamma_kernel_dims(R: ThinRep) -> tuple[int, ...]:
    """Generic ``dim Ker(gamma_i)`` for a thin representation.

    The ``(alpha, beta)`` entry of ``gamma_i`` (``alpha: j -> i``,
    ``beta: i -> k``) is a combination of the paths ``k ~> j``; it can be
    nonzero only if such a path runs along nonzero arrows.  For a generic
    potential and generic scalars the entries behave as independent
    indeterminates, so the rank is the term rank of that zero pattern.
    """
    Q, d = R.quiver, R.dims
    out = []
    for i in range(R.n):
        if not d[i]:
            out.append(0)
            continue
        outs = [(k, t) for k in range(R.n) for t in range(Q.mult[i][k]) if d[k]]
        ins = [(j, t) for j in range(R.n) for t in range(Q.mult[j][i]) if d[j]]
        rank = _term_rank(outs, ins, lambda o, c: _reaches(R, o[0], c[0]))
        out.append(len(outs) - rank)
    return tuple(out)


def generic_g_vector(R: ThinRep) -> tuple[int, ...]:
    """g-vector of ``[V] - [(S_{i0}^-)^c]``; the entry at the base vertex is -1."""
    ker = gamma_kernel_dims(R)
    return tuple(-1 if i == R.base else ker[i] - R.dims[i] for i in range(R.n))


@dataclass(frozen=True)
class VirtualCharData:
    f_poly: LaurentPoly
    g: tuple[int, ...]
    base: int = 0

    def __post_init__(self):
        if self.f_poly.constant_term() != 1:
            raise ValueError("F-polynomial must have constant term 1")
        if not self.f_poly.is_polynomial() or any(c <= 0 for c in self.f_poly.terms.values()):
            raise ValueError("F-polynomial must have nonnegative exponents and positive coefficients")
        if len(self.g) != self.f_poly.nvars:
            raise ValueError("g-vector length mismatch")
        if self.g[self.base] != -1:
            raise ValueError("g-vector entry at the base vertex must be -1")

    def to_json(self) -> dict:
        return {"f_poly": self.f_poly.to_json(), "g": list(self.g), "base": self.base + 1}


def virtual_char_data(surface: "SurfaceId | str") -> VirtualCharData:
    return VirtualCharData(f_polynomial(initial_rep(surface)), g_vector(surface))


def cluster_character(g: Sequence[int], F: LaurentPoly, B: BMatrix) -> LaurentPoly:
    """``x^g F(y_1..y_n)`` with the y-variables of ``B``."""
    n = B.n
    if len(g) != n or F.nvars != n:
        raise ValueError("g, F and B must have the same rank")
    ys = y_exponents(B)

    def push(e):
        return tuple(g[t] + sum(e[i] * ys[i][t] for i in range(n)) for t in range(n))

    return F.map_exponents(push)


def g_mutate(B: BMatrix, g: Sequence[int], h_i: int, i: int) -> tuple[int, ...]:
    if not 0 <= i < B.n:
        raise IndexError(f"vertex {i} out of range")
    out = []
    for j in range(B.n):
        if j == i:
            out.append(-g[i])
        else:
            b = B.rows[j][i]
            out.append(g[j] + pos(b) * g[i] - b * h_i)
    return tuple(out)


@dataclass(frozen=True)
class FMutation:
    ok: bool
    f_mutated: LaurentPoly | None = None
    h_i_mutated: int | None = None
    reason: str = ""
    remainder: object = None

    def __bool__(self) -> bool:
        return self.ok


def mutate_f(B: BMatrix, F: LaurentPoly, g: Sequence[int], h: Sequence[int], i: int) -> RatFunc:
    """Solve ``(1+y_i)^{h_i} F(y) = (1+y_i')^{h_i'} F'(y')`` for ``F'`` as a function of ``y'``."""
    n = B.n
    u = [RatFunc(LaurentPoly.var(n, j)) for j in range(n)]
    h_new = h[i] - g[i]
    # y expressed through y': mutation of y' with respect to mu_i(B)
    y_of = y_mutate(bmatrix_mutate(B, i), u, i)
    lhs = substitute(F, y_of) * (1 + y_of[i]) ** h[i]
    return lhs / (1 + u[i]) ** h_new


def f_mutation_check(B: BMatrix, F: LaurentPoly, g: Sequence[int], h: Sequence[int],
                     i: int) -> FMutation:
    h_new = h[i] - g[i]
    f_new = mutate_f(B, F, g, h, i)
    q = f_new.try_laurent()
    if q is None:
        return FMutation(False, None, h_new, "not a Laurent polynomial", f_new)
    if not q.is_polynomial():
        return FMutation(False, None, h_new, "negative exponents", q)
    if any(c <= 0 for c in q.terms.values()):
        return FMutation(False, None, h_new, "non-positive coefficient", q)
    if q.constant_term() != 1:
        return FMutation(False, None, h_new, "constant term is not 1", q)
    return FMutation(True, q, h_new)
