"""Finite point spaces, chains and tables.

A point space is a finite, totally ordered set of points carrying a time, a
measure weight and a multiplicity. Chains are sorted tuples of point ids and
tables are quadruples of pairwise disjoint chains, one per role:

    's'  (-,+)  scalar
    'a'  (-,o)  annihilation
    'c'  (o,+)  creation
    'n'  (o,o)  number (gauge)

Tables are encoded as role strings with one character per point position
('.' for an absent point); kernels are keyed by these strings.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from src.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

Chain = Tuple[int, ...]

ROLES = ('s', 'a', 'c', 'n')
ABSENT = '.'
ROLE_NAMES = {
    's': '(-,+)',
    'a': '(-,o)',
    'c': '(o,+)',
    'n': '(o,o)',
}
# roles whose point carries a k_x factor on the output / input side of a block
OUTPUT_ROLES = frozenset('cn')
INPUT_ROLES = frozenset('an')


@dataclass(frozen=True)
class Point:
    """A single point x with time t(x), weight Δ(x) and multiplicity d(x)."""
    index: int
    time: float
    weight: float
    multiplicity: int = 1


@dataclass(frozen=True)
class PointSpace:
    """Ordered finite point space together with the initial space dimension.

    Point ids increase with time, so sorting a chain by id sorts it by time.
    """
    points: Tuple[Point, ...]
    initial_dim: int = 1
    _positions: Dict[int, int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, 'points', points)
        if self.initial_dim < 1:
            raise PreconditionError(f"initial_dim must be >= 1, got {self.initial_dim}")
        ids = [p.index for p in points]
        if len(set(ids)) != len(ids):
            raise PreconditionError(f"duplicate point ids: {ids}")
        for prev, nxt in zip(points, points[1:]):
            if not nxt.index > prev.index:
                raise PreconditionError("point ids must increase along the time order")
            if not nxt.time > prev.time:
                raise PreconditionError(
                    f"times must be strictly increasing: t({prev.index})={prev.time}, "
                    f"t({nxt.index})={nxt.time}")
        for p in points:
            if p.time < 0:
                raise PreconditionError(f"negative time at point {p.index}")
            if not p.weight > 0:
                raise PreconditionError(f"weight of point {p.index} must be positive")
            if p.multiplicity < 1:
                raise PreconditionError(f"multiplicity of point {p.index} must be >= 1")
        object.__setattr__(self, '_positions', {p.index: k for k, p in enumerate(points)})

    @classmethod
    def uniform(cls, n: int, horizon: float = 1.0, multiplicity: Union[int, Sequence[int]] = 1,
                initial_dim: int = 1, weights: Optional[Sequence[float]] = None,
                times: Optional[Sequence[float]] = None) -> 'PointSpace':
        """Build n points on [0, horizon) with Δ = horizon / n unless given explicitly."""
        if n < 0:
            raise PreconditionError(f"n must be >= 0, got {n}")
        step = horizon / n if n else horizon
        if times is None:
            times = [k * step for k in range(n)]
        if weights is None:
            weights = [step] * n
        if isinstance(multiplicity, int):
            multiplicity = [multiplicity] * n
        if not (len(times) == len(weights) == len(multiplicity) == n):
            raise PreconditionError("times, weights and multiplicities must have n entries")
        points = tuple(Point(k + 1, float(times[k]), float(weights[k]), int(multiplicity[k]))
                       for k in range(n))
        return cls(points, initial_dim)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def ids(self) -> Chain:
        return tuple(p.index for p in self.points)

    def position(self, x: int) -> int:
        try:
            return self._positions[x]
        except KeyError:
            raise PreconditionError(f"point {x} is not in the space") from None

    def point(self, x: int) -> Point:
        return self.points[self.position(x)]

    def time(self, x: int) -> float:
        return self.point(x).time

    def weight(self, x: int) -> float:
        return self.point(x).weight

    def multiplicity(self, x: int) -> int:
        return self.point(x).multiplicity

    def contains(self, x: int) -> bool:
        return x in self._positions

    def without(self, *xs: int) -> 'PointSpace':
        """The reduced space with the given points removed; ids are preserved."""
        drop = set(xs)
        for x in drop:
            self.position(x)
        return PointSpace(tuple(p for p in self.points if p.index not in drop), self.initial_dim)

    def with_initial_dim(self, initial_dim: int) -> 'PointSpace':
        return PointSpace(self.points, initial_dim)

    def level(self, t: float) -> int:
        """Number of points strictly before t; processes are constant between levels."""
        return sum(1 for p in self.points if p.time < t)

    def level_time(self, level: int) -> float:
        """A representative time for a level: t(x_{level+1}), or +inf for the last one."""
        if level < 0 or level > self.n:
            raise PreconditionError(f"level {level} out of range 0..{self.n}")
        return self.points[level].time if level < self.n else math.inf

    def cut_times(self) -> List[float]:
        """Cuts 0, t(x_1), ..., t(x_n), +inf without repetitions."""
        cuts = [0.0]
        for p in self.points:
            if p.time > cuts[-1]:
                cuts.append(p.time)
        cuts.append(math.inf)
        return cuts

    def chain_dim(self, chain: Iterable[int]) -> int:
        dim = 1
        for x in chain:
            dim *= self.multiplicity(x)
        return dim

    def fock_dim(self) -> int:
        dim = self.initial_dim
        for p in self.points:
            dim *= 1 + p.multiplicity
        return dim

    def describe(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'initial_dim': self.initial_dim,
            'times': [p.time for p in self.points],
            'weights': [p.weight for p in self.points],
            'multiplicities': [p.multiplicity for p in self.points],
        }


@dataclass(frozen=True)
class Table:
    """Quadruple of pairwise disjoint chains indexed by role."""
    scalar: Chain = ()
    annihilation: Chain = ()
    creation: Chain = ()
    number: Chain = ()

    def __post_init__(self):
        chains = [tuple(sorted(c)) for c in (self.scalar, self.annihilation,
                                              self.creation, self.number)]
        for name, chain in zip(('scalar', 'annihilation', 'creation', 'number'), chains):
            object.__setattr__(self, name, chain)
        members = [x for c in chains for x in c]
        if len(set(members)) != len(members):
            raise PreconditionError(f"table chains are not disjoint: {chains}")

    def chain(self, role: str) -> Chain:
        return {'s': self.scalar, 'a': self.annihilation,
                'c': self.creation, 'n': self.number}[role]

    @property
    def output_chain(self) -> Chain:
        return tuple(sorted(self.number + self.creation))

    @property
    def input_chain(self) -> Chain:
        return tuple(sorted(self.annihilation + self.number))

    def points(self) -> Chain:
        return tuple(sorted(self.scalar + self.annihilation + self.creation + self.number))

    def key(self, space: PointSpace) -> str:
        chars = [ABSENT] * space.n
        for role in ROLES:
            for x in self.chain(role):
                chars[space.position(x)] = role
        return ''.join(chars)

    @classmethod
    def from_key(cls, space: PointSpace, key: str) -> 'Table':
        if len(key) != space.n:
            raise PreconditionError(f"table key {key!r} does not match {space.n} points")
        chains = {role: [] for role in ROLES}
        for p, ch in zip(space.points, key):
            if ch != ABSENT:
                chains[ch].append(p.index)
        return cls(tuple(chains['s']), tuple(chains['a']),
                   tuple(chains['c']), tuple(chains['n']))


@dataclass(frozen=True)
class AtomicTable:
    """A table with a single point x in one role."""
    role: str
    point: int

    def __post_init__(self):
        if self.role not in ROLES:
            raise PreconditionError(f"unknown role {self.role!r}")

    def table(self) -> Table:
        return Table(**{{'s': 'scalar', 'a': 'annihilation', 'c': 'creation',
                         'n': 'number'}[self.role]: (self.point,)})


# role-string helpers used by the kernel modules

def key_chain(space: PointSpace, key: str, roles: Iterable[str]) -> Chain:
    roles = set(roles)
    return tuple(p.index for p, ch in zip(space.points, key) if ch in roles)


def key_output_chain(space: PointSpace, key: str) -> Chain:
    return key_chain(space, key, OUTPUT_ROLES)


def key_input_chain(space: PointSpace, key: str) -> Chain:
    return key_chain(space, key, INPUT_ROLES)


def empty_key(space: PointSpace) -> str:
    return ABSENT * space.n


def enumerate_chains(space: PointSpace) -> List[Chain]:
    """All 2^n chains ordered by size, then lexicographically."""
    ids = space.ids
    return [c for size in range(len(ids) + 1) for c in combinations(ids, size)]


def subsets(chain: Sequence[int]) -> Iterator[Chain]:
    """All sub-chains of a chain, in the same order as enumerate_chains."""
    chain = tuple(chain)
    for size in range(len(chain) + 1):
        yield from combinations(chain, size)


def enumerate_table_keys(space: PointSpace) -> List[str]:
    return [''.join(chars) for chars in product(ABSENT + ''.join(ROLES), repeat=space.n)]


def enumerate_tables(space: PointSpace) -> List[Table]:
    """All 5^n tables: each point absent or in one of the four roles."""
    return [Table.from_key(space, key) for key in enumerate_table_keys(space)]


def chain_weight(space: PointSpace, chain: Iterable[int]) -> float:
    """Measure element dϑ = ∏ Δ(x); the empty chain has unit mass."""
    w = 1.0
    for x in chain:
        w *= space.weight(x)
    return w


def measure_sum(space: PointSpace, f: Callable[[Chain], complex],
                support: Optional[Callable[[Chain], bool]] = None,
                disjoint_from: Iterable[int] = ()) -> complex:
    """Σ_ϑ w(ϑ) f(ϑ) over all chains, optionally restricted."""
    excluded = set(disjoint_from)
    total = 0.0
    for chain in enumerate_chains(space):
        if excluded and excluded.intersection(chain):
            continue
        if support is not None and not support(chain):
            continue
        total += chain_weight(space, chain) * f(chain)
    return total


def fubini_residual(space: PointSpace, f: Callable[[Chain, Chain], complex]) -> float:
    """|∫ Σ_{υ⊆ϑ} f(υ, ϑ∖υ) dϑ − ∬ f(υ, κ) dυ dκ| with disjoint pairs on the right."""
    lhs = 0.0
    for chain in enumerate_chains(space):
        inner = 0.0
        for sub in subsets(chain):
            rest = tuple(x for x in chain if x not in sub)
            inner += f(sub, rest)
        lhs += chain_weight(space, chain) * inner

    rhs = 0.0
    for upsilon in enumerate_chains(space):
        w_upsilon = chain_weight(space, upsilon)
        for kappa in enumerate_chains(space):
            if set(upsilon).intersection(kappa):
                continue
            rhs += w_upsilon * chain_weight(space, kappa) * f(upsilon, kappa)

    residual = abs(lhs - rhs)
    logger.debug(f"Fubini residual on {space.n} points: {residual:.3e}")
    return residual


def restrict(space: PointSpace, chain: Sequence[int], t: float, side: str) -> Chain:
    """Points of the chain before t (side='before') or from t on (side='from')."""
    if side == 'before':
        return tuple(x for x in chain if space.time(x) < t)
    if side == 'from':
        return tuple(x for x in chain if space.time(x) >= t)
    raise PreconditionError(f"side must be 'before' or 'from', got {side!r}")


def next_time(space: PointSpace, x: int, context: Union[Table, Sequence[int], None] = None) -> float:
    """Smallest time in the context strictly after t(x); +inf when there is none."""
    if context is None:
        members: Iterable[int] = ()
    elif isinstance(context, Table):
        members = context.points()
    else:
        members = context
    tx = space.time(x)
    later = [space.time(y) for y in members if space.time(y) > tx]
    return min(later) if later else math.inf
