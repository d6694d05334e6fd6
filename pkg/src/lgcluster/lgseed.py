"""Landau-Ginzburg seeds in two variables and their mutation.

A seed is a two-variable Laurent potential ``W`` with an ordered list of
pairwise distinct primitive directions ``v_1..v_n``.  Mutating in direction
``i`` twists every monomial by a power of ``1 + z^{v_i^perp}`` and moves
the directions piecewise-linearly.  Indices are 0-based in this module.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .exactalg import DegeneratePoint, LaurentPoly, NotDivisible, RatFunc, binomial_twist, pow_rat

Vector = tuple[int, int]


class NotLaurent(ArithmeticError):
    """Mutation produced a non-Laurent potential: the seed is not LG in that direction."""

    def __init__(self, msg: str, index: int | None = None, step: int | None = None,
                 remainder: LaurentPoly | None = None):
        super().__init__(msg)
        self.index = index
        self.step = step
        self.remainder = remainder


class RepetitionRejected(ValueError):
    pass


def perp(v: Vector) -> Vector:
    a, b = v
    return (b, -a)


def scalar(v: Vector, w: Vector) -> int:
    return v[0] * w[0] + v[1] * w[1]


def symplectic(v: Vector, w: Vector) -> int:
    return v[0] * w[1] - v[1] * w[0]


def is_primitive(v: Vector) -> bool:
    return v != (0, 0) and gcd(abs(v[0]), abs(v[1])) == 1


def tropical_mutate(v: Vector, w: Vector) -> Vector:
    """``w + [{w, v}]_+ v``."""
    k = max(symplectic(w, v), 0)
    return (w[0] + k * v[0], w[1] + k * v[1])


def _binomial(v: Vector) -> LaurentPoly:
    """``1 + z^{v^perp}``."""
    return LaurentPoly(2, {(0, 0): 1}) + LaurentPoly.monomial(perp(v))


def monomial_mutate(v: Vector, w: Vector) -> RatFunc:
    """Image of ``z^w`` under the mutation map of ``v``."""
    return RatFunc(LaurentPoly.monomial(w)) * pow_rat(_binomial(v), -scalar(v, w))


def mutate_potential(potential: LaurentPoly, v: Vector) -> LaurentPoly:
    """Mutate ``potential`` by ``v``; raise :class:`NotLaurent` if the result is not Laurent.

    Every term ``c z^w`` becomes ``c z^w (1+z^{v^perp})^{-(v,w)}``.  The
    pairing with ``v`` is constant on lines parallel to ``v^perp``, so the
    division is checked line by line (see :func:`binomial_twist`).
    """
    try:
        return binomial_twist(potential, perp(v), (-v[0], -v[1]))
    except NotDivisible as exc:
        raise NotLaurent(f"mutation by {v} is not Laurent", remainder=exc.remainder) from None


def mutate_directions(dirs: Sequence[Vector], i: int) -> tuple[Vector, ...]:
    """``v_i -> -v_i`` and ``v_j -> v_j + [{v_j, v_i}]_+ v_i``."""
    v = dirs[i]
    return tuple((-v[0], -v[1]) if j == i else tropical_mutate(v, u)
                 for j, u in enumerate(dirs))


def fraction_pullback(v: Vector, num: Sequence[int], den: Sequence[int],
                      p: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """:func:`point_pullback` on a point given as fractions ``num[k] / den[k]``."""
    a, b = v
    n1, n2 = num
    d1, d2 = den
    # t = z1^b z2^-a = tn / td
    tn = td = 1
    if b > 0:
        tn, td = pow(n1, b, p), pow(d1, b, p)
    elif b < 0:
        tn, td = pow(d1, -b, p), pow(n1, -b, p)
    if a > 0:
        tn, td = tn * pow(d2, a, p) % p, td * pow(n2, a, p) % p
    elif a < 0:
        tn, td = tn * pow(n2, -a, p) % p, td * pow(d2, -a, p) % p
    hn = (tn + td) % p
    if hn == 0:
        raise DegeneratePoint("1 + z^(v perp) vanishes at the sample point")
    # z_k (hn/td)^{-v_k}
    if a > 0:
        n1, d1 = n1 * pow(td, a, p) % p, d1 * pow(hn, a, p) % p
    elif a < 0:
        n1, d1 = n1 * pow(hn, -a, p) % p, d1 * pow(td, -a, p) % p
    if b > 0:
        n2, d2 = n2 * pow(td, b, p) % p, d2 * pow(hn, b, p) % p
    elif b < 0:
        n2, d2 = n2 * pow(hn, -b, p) % p, d2 * pow(td, -b, p) % p
    return (n1, n2), (d1, d2)


def point_pullback(v: Vector, z: Sequence[int], p: int) -> tuple[int, int]:
    """The point ``z * (1 + z^{v^perp})^{-v}`` of ``(F_p^*)^2``.

    Evaluating ``mutate_potential(W, v)`` at ``z`` is evaluating ``W`` here.
    """
    num, den = fraction_pullback(v, z, (1, 1), p)
    return tuple(x * pow(y, -1, p) % p for x, y in zip(num, den))


class SurfaceId(enum.Enum):
    CP2 = "CP2"
    CP1xCP1 = "CP1xCP1"
    Bl1CP2 = "Bl1CP2"
    Bl2CP2 = "Bl2CP2"
    Bl3CP2 = "Bl3CP2"

    @classmethod
    def parse(cls, name: "str | SurfaceId") -> "SurfaceId":
        if isinstance(name, SurfaceId):
            return name
        key = name.strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "cp2": cls.CP2, "p2": cls.CP2,
            "cp1xcp1": cls.CP1xCP1, "p1xp1": cls.CP1xCP1, "cp1cp1": cls.CP1xCP1,
        }
        for k in (1, 2, 3):
            s = getattr(cls, f"Bl{k}CP2")
            aliases[f"bl{k}cp2"] = s
            aliases[f"bl{k}"] = s
            aliases[f"bl{k}p2"] = s
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown surface {name!r}; expected one of "
                             f"{', '.join(s.value for s in cls)}") from None


@dataclass(frozen=True)
class LGSeed:
    potential: LaurentPoly
    directions: tuple[Vector, ...]

    def __post_init__(self):
        if self.potential.nvars != 2:
            raise ValueError("LG potentials live in two variables")
        dirs = tuple((int(a), int(b)) for a, b in self.directions)
        object.__setattr__(self, "directions", dirs)
        for v in dirs:
            if not is_primitive(v):
                raise ValueError(f"direction {v} is not primitive")

    @property
    def n(self) -> int:
        return len(self.directions)

    @property
    def distinct(self) -> bool:
        """Whether the directions are pairwise different.

        Initial seeds always are.  Mutation at ``v_i`` sends it to ``-v_i``, so
        a seed that also contains ``-v_i`` (which ``{-v_i, v_i} = 0`` leaves
        fixed) acquires a repeated direction.
        """
        return len(set(self.directions)) == len(self.directions)

    def mutate(self, i: int) -> "LGSeed":
        return seed_mutate(self, i)

    def to_json(self) -> dict:
        return {"potential": self.potential.to_json(),
                "directions": [list(v) for v in self.directions]}

    @classmethod
    def from_json(cls, data: dict) -> "LGSeed":
        return cls(LaurentPoly.from_json(data["potential"], nvars=2),
                   tuple(tuple(v) for v in data["directions"]))


def seed_mutate(s: LGSeed, i: int) -> LGSeed:
    if not 0 <= i < s.n:
        raise IndexError(f"direction index {i} out of range for {s.n} directions")
    v = s.directions[i]
    try:
        w = mutate_potential(s.potential, v)
    except NotLaurent as exc:
        exc.index = i
        raise
    return LGSeed(w, mutate_directions(s.directions, i))


_P = lambda text: LaurentPoly.parse(text, 2, "z")  # noqa: E731

_INITIAL: dict[SurfaceId, tuple[str, tuple[Vector, ...]]] = {
    SurfaceId.CP2: ("z1 + z2 + z1^-1*z2^-1",
                    ((1, 1), (-2, 1), (1, -2))),
    SurfaceId.CP1xCP1: ("z1 + z2 + z1^-1 + z2^-1",
                        ((1, 1), (1, -1), (-1, 1), (-1, -1))),
    SurfaceId.Bl1CP2: ("z1 + z2 + z1^-1*z2^-1 + z1*z2",
                       ((-2, 1), (1, -2), (1, 0), (0, 1))),
    SurfaceId.Bl2CP2: ("z1 + z2 + z1^-1 + z2^-1 + z1^-1*z2^-1",
                       ((1, -1), (-1, 1), (-1, 0), (0, -1), (1, 1))),
    # the table only gives +-(1,-1), +-(1,0), +-(0,1); this order and these
    # signs reproduce the Bl3 exchange matrix
    SurfaceId.Bl3CP2: ("z1 + z2 + z1^-1 + z2^-1 + z1*z2 + z1^-1*z2^-1",
                       ((1, -1), (-1, 1), (1, 0), (-1, 0), (0, 1), (0, -1))),
}


def initial_seed(surface: "SurfaceId | str") -> LGSeed:
    surface = SurfaceId.parse(surface)
    text, dirs = _INITIAL[surface]
    seed = LGSeed(_P(text), dirs)
    assert seed.distinct
    return seed


def check_sequence(seq: Sequence[int], n: int, allow_repeats: bool = False) -> tuple[int, ...]:
    seq = tuple(int(i) for i in seq)
    for i in seq:
        if not 0 <= i < n:
            raise IndexError(f"index {i + 1} out of range 1..{n}")
    if not allow_repeats and len(set(seq)) != len(seq):
        raise RepetitionRejected(f"sequence {[i + 1 for i in seq]} repeats an index")
    return seq


def iterate(s: LGSeed, seq: Iterable[int], allow_repeats: bool = False) -> LGSeed:
    """Apply ``seed_mutate`` left to right; the first index acts first."""
    seq = check_sequence(list(seq), s.n, allow_repeats)
    for step, i in enumerate(seq):
        try:
            s = seed_mutate(s, i)
        except NotLaurent as exc:
            exc.step = step
            raise
    return s


def iterate_all(s: LGSeed, seq: Iterable[int], allow_repeats: bool = False) -> list[LGSeed]:
    """All intermediate seeds, starting with ``s`` itself."""
    seq = check_sequence(list(seq), s.n, allow_repeats)
    out = [s]
    for step, i in enumerate(seq):
        try:
            out.append(seed_mutate(out[-1], i))
        except NotLaurent as exc:
            exc.step = step
            raise
    return out
