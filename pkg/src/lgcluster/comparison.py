"""The comparison map from LG seeds to cluster seeds and the end-to-end checks.

``Phi_s(z^v) = prod_i x_i^{-(v, v_i)}`` sends two-variable Laurent
polynomials to Laurent polynomials in the cluster variables.  It
intertwines LG seed mutation with x-mutation, so the identity between the
Floer potential and the cluster character, once checked on the initial
seed, propagates along any mutation sequence.  The checks here verify each
link of that argument directly.
"""

from __future__ import annotations

import itertools
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .clusterkit import (
    BMatrix,
    SubstitutionChain,
    bmatrix_mutate,
    fraction_mutate,
    x_mutate,
    x_mutation_images,
)
from .exactalg import (
    DEFAULT_RETRIES,
    EXACT,
    DegeneratePoint,
    LaurentPoly,
    Mode,
    PrimePoint,
    RatFunc,
    RetryBudgetExhausted,
    batch_inverse,
    eval_mod_p,
    equal,
    substitute,
)
from .lgseed import (
    LGSeed,
    SurfaceId,
    Vector,
    check_sequence,
    initial_seed,
    monomial_mutate,
    mutate_directions,
    fraction_pullback,
    scalar,
    seed_mutate,
    symplectic,
)
from .repchar import cluster_character, f_polynomial, g_vector, initial_rep


class NotMarkov(ValueError):
    pass


def b_from_seed(s: LGSeed) -> BMatrix:
    B = BMatrix(tuple(tuple(symplectic(v, w) for w in s.directions) for v in s.directions))
    if B.rank() > 2:
        raise ValueError(f"exchange matrix of a seed has rank {B.rank()} > 2")
    return B


@dataclass(frozen=True)
class ComparisonMap:
    seed: LGSeed

    @property
    def n(self) -> int:
        return self.seed.n

    def exponent(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(-scalar(v, d) for d in self.seed.directions)

    def __call__(self, f):
        if isinstance(f, RatFunc):
            return RatFunc(self(f.num), self(f.den))
        if f.nvars != 2:
            raise ValueError("the comparison map acts on two-variable Laurent polynomials")
        if f.is_zero():
            return LaurentPoly.zero(self.n)
        return f.map_exponents(self.exponent)


def phi(seed: LGSeed, f):
    return ComparisonMap(seed)(f)


def witness_json(w):
    """JSON-ready form of a report witness: points as dicts, polynomials as text."""
    if isinstance(w, (LaurentPoly, RatFunc)):
        return w.to_text("x")
    if isinstance(w, PrimePoint):
        return w.to_json()
    if isinstance(w, dict):
        return {k: witness_json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [witness_json(v) for v in w]
    return w


@dataclass
class VerificationReport:
    check: str
    surface: str | None
    sequence: tuple[int, ...]
    mode: Mode
    outcome: str
    witness: object = None
    millis: int = 0
    note: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome == "fail" and self.witness is None:
            raise ValueError("a failed report must carry a witness")

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "surface": self.surface,
            "sequence": list(self.sequence),
            "mode": self.mode.to_json(),
            "outcome": self.outcome,
            "millis": self.millis,
        }
        if self.witness is not None:
            out["witness"] = witness_json(self.witness)
        if self.note:
            out["note"] = self.note
        if self.details:
            out["details"] = self.details
        return out

    def line(self) -> str:
        seq = ",".join(str(i) for i in self.sequence) or "-"
        mode = "exact" if self.mode.exact else f"modp[{self.mode.trials}]"
        text = f"{self.outcome.upper():4} {self.check:8} {self.surface or '-':8} seq={seq:12} {mode} {self.millis}ms"
        if self.witness is not None and not self.passed:
            text += f"  witness={self.to_json()['witness']}"
        return text


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.millis = int(round((time.perf_counter() - self.t0) * 1000))


def _surface_name(surface) -> str | None:
    return SurfaceId.parse(surface).value if surface is not None else None


def check_b_compat(s: LGSeed, i: int, *, surface=None, sequence: Sequence[int] = ()) -> VerificationReport:
    with _Timer() as t:
        lhs = b_from_seed(seed_mutate(s, i))
        rhs = bmatrix_mutate(b_from_seed(s), i)
        bad = [(j + 1, k + 1, lhs[j, k], rhs[j, k])
               for j in range(s.n) for k in range(s.n) if lhs[j, k] != rhs[j, k]]
    return VerificationReport(
        "bmat", _surface_name(surface), tuple(sequence) + (i + 1,), EXACT,
        "fail" if bad else "pass", witness=bad or None, millis=t.millis)


def check_phi_compat(s: LGSeed, i: int, vectors: Iterable[Vector], mode: Mode = EXACT,
                     *, surface=None, sequence: Sequence[int] = ()) -> VerificationReport:
    """``mu_i^C(Phi_s(z^v)) == Phi_{mu_i s}(mu_{v_i}(z^v))`` for every test vector."""
    vectors = [tuple(v) for v in vectors]
    with _Timer() as t:
        B = b_from_seed(s)
        images = x_mutation_images(B, i)
        here = ComparisonMap(s)
        there = ComparisonMap(seed_mutate(s, i))
        witness = None
        for v in vectors:
            lhs = substitute(here(LaurentPoly.monomial(v)), images)
            rhs = there(monomial_mutate(s.directions[i], v))
            eq = equal(lhs, rhs, mode)
            if not eq:
                witness = {"v": list(v), "counterexample": eq.witness}
                break
    return VerificationReport(
        "compat", _surface_name(surface), tuple(sequence) + (i + 1,), mode,
        "fail" if witness else "pass", witness=witness, millis=t.millis,
        details={"vectors": len(vectors)})


def random_vectors(count: int, bound: int = 5, rng_seed: int = 0) -> list[Vector]:
    rng = random.Random(rng_seed)
    return [(rng.randint(-bound, bound), rng.randint(-bound, bound)) for _ in range(count)]


def initial_cc(surface) -> LaurentPoly:
    surface = SurfaceId.parse(surface)
    B = b_from_seed(initial_seed(surface))
    return cluster_character(g_vector(surface), f_polynomial(initial_rep(surface)), B)


def check_initial_identity(surface) -> VerificationReport:
    surface = SurfaceId.parse(surface)
    with _Timer() as t:
        s = initial_seed(surface)
        cc = initial_cc(surface)
        target = phi(s, s.potential)
        diff = cc - target
    return VerificationReport(
        "initial", surface.value, (), EXACT, "pass" if diff.is_zero() else "fail",
        witness=None if diff.is_zero() else diff, millis=t.millis,
        details={"value": target.to_text("x")})


def derive_g_vector(surface) -> tuple[int, ...]:
    """The g with g_1 = -1 such that ``x^g F(y) = Phi(W)``, found by trying
    every monomial of ``Phi(W)`` as the image of the constant term of F."""
    surface = SurfaceId.parse(surface)
    s = initial_seed(surface)
    B = b_from_seed(s)
    F = f_polynomial(initial_rep(surface))
    target = phi(s, s.potential)
    hits = [e for e in sorted(target.terms)
            if e[0] == -1 and cluster_character(e, F, B) == target]
    if len(hits) != 1:
        raise ValueError(f"expected a unique g-vector candidate, found {hits}")
    return hits[0]


class MainVerifier:
    """Runs the Floer-potential/cluster-character check along mutation sequences.

    ``A`` is the comparison map of the iterated seed applied to the iterated
    potential; ``B`` is the recorded chain of x-mutations applied to
    ``f0 = Phi_{s(X)}(W(X))``.  Prefix results are memoized, so running every
    sequence of a surface costs one mutation per node of the sequence tree.

    In ``modp`` mode neither side is expanded.  Each x-mutation map of points
    is an involution, so for ``x = T_N(...T_1(u))`` the chain gives
    ``B(x) = f0(u)``.  Points ``u`` are drawn once from the seeded stream and
    pushed forward along the tree.  ``A(x)`` is computed independently: ``x``
    is sent to the torus of the iterated seed and pulled back through the
    recorded LG mutations to the initial potential.  Laurentness of the
    iterated potentials is an exact-mode matter.
    """

    def __init__(self, surface, mode: Mode = EXACT, allow_repeats: bool = False):
        self.surface = SurfaceId.parse(surface)
        self.mode = mode
        self.allow_repeats = allow_repeats
        s0 = initial_seed(self.surface)
        self.n = s0.n
        self._seeds: dict[tuple[int, ...], LGSeed] = {(): s0}
        self._dirs: dict[tuple[int, ...], tuple[Vector, ...]] = {(): s0.directions}
        self._mats: dict[tuple[int, ...], BMatrix] = {(): b_from_seed(s0)}
        self._exprs: dict[tuple[int, ...], LaurentPoly | RatFunc] = {(): phi(s0, s0.potential)}
        self._rng = random.Random(mode.rng_seed)
        self._stream: list[PrimePoint] = []
        self._f0_values: list[int] = []
        self._pushed: dict[tuple[tuple[int, ...], int], tuple[list[int], list[int]] | None] = {}

    def seed(self, seq: tuple[int, ...]) -> LGSeed:
        if seq not in self._seeds:
            self._seeds[seq] = seed_mutate(self.seed(seq[:-1]), seq[-1])
        return self._seeds[seq]

    def directions(self, seq: tuple[int, ...]) -> tuple[Vector, ...]:
        if seq not in self._dirs:
            self._dirs[seq] = mutate_directions(self.directions(seq[:-1]), seq[-1])
        return self._dirs[seq]

    def matrix(self, seq: tuple[int, ...]) -> BMatrix:
        if seq not in self._mats:
            self._mats[seq] = bmatrix_mutate(self.matrix(seq[:-1]), seq[-1])
        return self._mats[seq]

    def chain(self, seq: tuple[int, ...]) -> SubstitutionChain:
        return SubstitutionChain(tuple((i, self.matrix(seq[:k])) for k, i in enumerate(seq)))

    def expr(self, seq: tuple[int, ...]) -> "LaurentPoly | RatFunc":
        if seq not in self._exprs:
            self._exprs[seq] = x_mutate(self.matrix(seq[:-1]), seq[-1], self.expr(seq[:-1]))
        return self._exprs[seq]

    def _draw(self, m: int) -> PrimePoint:
        while len(self._stream) <= m:
            u = PrimePoint.random(self.n, self._rng, self.mode.prime)
            self._stream.append(u)
            self._f0_values.append(eval_mod_p(self._exprs[()], u))
        return self._stream[m]

    def _pushed_point(self, seq: tuple[int, ...], m: int):
        """``T_N(...T_1(u_m))`` as fractions, or None where a step degenerates."""
        key = (seq, m)
        if key not in self._pushed:
            if not seq:
                out = (list(self._draw(m).coords), [1] * self.n)
            else:
                parent = self._pushed_point(seq[:-1], m)
                out = None
                if parent is not None:
                    num, den = list(parent[0]), list(parent[1])
                    try:
                        fraction_mutate(self.matrix(seq[:-1]), seq[-1], num, den, self.mode.prime)
                        out = (num, den)
                    except DegeneratePoint:
                        pass
            self._pushed[key] = out
        return self._pushed[key]

    def _lhs_fraction(self, seq: tuple[int, ...], x_num: Sequence[int],
                      x_den: Sequence[int]) -> int:
        p = self.mode.prime
        num, den = [1, 1], [1, 1]
        for xn, xd, v in zip(x_num, x_den, self.directions(seq)):
            for k in (0, 1):
                # z_k picks up x_i^{-v_k}
                e = v[k]
                if e > 0:
                    num[k] = num[k] * (xd if e == 1 else pow(xd, e, p)) % p
                    den[k] = den[k] * (xn if e == 1 else pow(xn, e, p)) % p
                elif e < 0:
                    num[k] = num[k] * (xn if e == -1 else pow(xn, -e, p)) % p
                    den[k] = den[k] * (xd if e == -1 else pow(xd, -e, p)) % p
        for k in range(len(seq), 0, -1):
            num, den = fraction_pullback(self.directions(seq[:k - 1])[seq[k - 1]], num, den, p)
        inv = batch_inverse(list(num) + list(den), p)
        z = tuple(a * b % p for a, b in zip(num, inv[2:]))
        zinv = [a * b % p for a, b in zip(den, inv[:2])]
        return eval_mod_p(self._seeds[()].potential, PrimePoint(p, z), zinv)

    def lhs_at(self, seq: Sequence[int], point: PrimePoint) -> int:
        """``Phi_{s_seq}(W_seq)`` at ``point``, without expanding the potential."""
        return self._lhs_fraction(tuple(seq), point.coords, [1] * len(point.coords))

    def _modp_witness(self, seq: tuple[int, ...]) -> PrimePoint | None:
        p = self.mode.prime
        passed = misses = m = 0
        while passed < self.mode.trials:
            if misses >= DEFAULT_RETRIES:
                raise RetryBudgetExhausted(f"{misses} consecutive degenerate sample points")
            x = self._pushed_point(seq, m)
            m += 1
            if x is None:
                misses += 1
                continue
            try:
                a = self._lhs_fraction(seq, *x)
            except DegeneratePoint:
                misses += 1
                continue
            misses = 0
            if a != self._f0_values[m - 1]:
                inv = batch_inverse(x[1], p)
                return PrimePoint(p, tuple(c * d % p for c, d in zip(x[0], inv)))
            passed += 1
        return None

    def run(self, seq: Sequence[int]) -> VerificationReport:
        seq = check_sequence(seq, self.n, self.allow_repeats)
        with _Timer() as t:
            if self.mode.exact:
                s = self.seed(seq)
                eq = equal(phi(s, s.potential), self.expr(seq), EXACT)
                witness = None if eq else eq.witness
            else:
                witness = self._modp_witness(seq)
        note = "verified via invariance route" if not witness else ""
        return VerificationReport(
            "main", self.surface.value, tuple(i + 1 for i in seq), self.mode,
            "fail" if witness else "pass", witness=witness, millis=t.millis, note=note)


def verify_main(surface, seq: Sequence[int], mode: Mode = EXACT,
                allow_repeats: bool = False) -> VerificationReport:
    """Check ``Phi_{s_i}(W_i)`` against the x-mutated ``Phi_s(W)`` (0-based ``seq``)."""
    return MainVerifier(surface, mode, allow_repeats).run(seq)


def repetition_free_sequences(n: int, include_empty: bool = False) -> list[tuple[int, ...]]:
    """All sequences of distinct indices in ``range(n)``, shorter ones first."""
    out = [()] if include_empty else []
    for k in range(1, n + 1):
        out.extend(itertools.permutations(range(n), k))
    return out


def main_suite(surface, mode: Mode = EXACT, sequences=None) -> list[VerificationReport]:
    v = MainVerifier(surface, mode)
    if sequences is None:
        sequences = repetition_free_sequences(v.n)
    return [v.run(seq) for seq in sequences]


def markov_extract(B: BMatrix) -> tuple[int, int, int]:
    if B.n != 3:
        raise NotMarkov("Markov quivers have three vertices")
    edges = (B[0, 1], B[1, 2], B[2, 0])
    if any(e == 0 or e % 3 for e in edges):
        raise NotMarkov(f"entries {edges} are not nonzero multiples of 3")
    if not (all(e > 0 for e in edges) or all(e < 0 for e in edges)):
        raise NotMarkov(f"entries {edges} do not form an oriented triangle")
    a, b, c = sorted(abs(e) // 3 for e in edges)
    if a * a + b * b + c * c != 3 * a * b * c:
        raise NotMarkov(f"({a}, {b}, {c}) violates a^2+b^2+c^2 = 3abc")
    return (a, b, c)


def markov_bfs(depth: int, B0: BMatrix | None = None) -> dict[tuple[int, int, int], int]:
    """Breadth-first B-matrix mutation; returns each triple with its first depth."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if B0 is None:
        B0 = b_from_seed(initial_seed(SurfaceId.CP2))
    found = {markov_extract(B0): 0}
    seen = {B0}
    queue = deque([(B0, 0)])
    while queue:
        B, d = queue.popleft()
        if d == depth:
            continue
        for i in range(3):
            C = bmatrix_mutate(B, i)
            if C in seen:
                continue
            seen.add(C)
            found.setdefault(markov_extract(C), d + 1)
            queue.append((C, d + 1))
    return found
