"""Triangular germ matrices over the index order (−, ∘, +).

Entry (μ, ν) of a germ at x is a point-split object on the space with x
removed: a Kernel in the kernel flavor, a FockOperator in the operator
flavor. The 𝔨ₓ factor of a split sits next to 𝔥 (order 𝔨ₓ⊗𝔥), on the output
side iff μ = ∘ and on the input side iff ν = ∘. Strictly lower entries are
zero and are not stored.
"""

import logging
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.core.chainspace import PointSpace
from src.core.fock import FockOperator
from src.core.kernel import Kernel, kernel_product, star_adjoint, unit_kernel
from src.core.representation import epsilon
from src.utils.errors import DimensionMismatchError, FlavorMismatchError

logger = logging.getLogger(__name__)

MINUS, CIRCLE, PLUS = 0, 1, 2
INDEX_SYMBOLS = ('-', 'o', '+')

# role of each off-corner entry
ENTRY_ROLES = {
    (MINUS, CIRCLE): 'a',
    (MINUS, PLUS): 's',
    (CIRCLE, CIRCLE): 'n',
    (CIRCLE, PLUS): 'c',
}
ROLE_ENTRIES = {role: idx for idx, role in ENTRY_ROLES.items()}
CORNERS = ((MINUS, MINUS), (PLUS, PLUS))
UPPER = tuple((i, j) for i in range(3) for j in range(i, 3))

KERNEL = 'kernel'
OPERATOR = 'operator'

Entry = Union[Kernel, FockOperator]


def _is_operator(entry: Entry) -> bool:
    return isinstance(entry, FockOperator)


class GermMatrix:
    """3×3 upper-triangular matrix of point-split entries at a point x."""

    def __init__(self, space: PointSpace, point: int, entries: Dict[Tuple[int, int], Entry],
                 flavor: str = KERNEL, h: Optional[int] = None):
        if flavor not in (KERNEL, OPERATOR):
            raise FlavorMismatchError(f"unknown germ flavor {flavor!r}")
        self.space = space
        self.point = point
        self.reduced = space.without(point)
        self.flavor = flavor
        self.h = space.initial_dim if h is None else h
        self.d = space.multiplicity(point)
        self.weight = space.weight(point)
        self.entries: Dict[Tuple[int, int], Entry] = {}
        for idx, entry in entries.items():
            if idx not in UPPER:
                raise DimensionMismatchError(f"germ entry {idx} lies below the diagonal")
            if entry is not None:
                self._check_entry(idx, entry)
                self.entries[idx] = entry

    def slot(self, index: int) -> int:
        return self.h * self.d if index == CIRCLE else self.h

    def _check_entry(self, idx: Tuple[int, int], entry: Entry):
        if _is_operator(entry) != (self.flavor == OPERATOR):
            raise FlavorMismatchError(f"{self.flavor} germ got entry of type {type(entry).__name__}")
        expected = (self.slot(idx[0]), self.slot(idx[1]))
        if entry.space != self.reduced or (entry.h_out, entry.h_in) != expected:
            raise DimensionMismatchError(
                f"germ entry {idx} has initial slots {(entry.h_out, entry.h_in)}, expected {expected}")

    def zero_entry(self, idx: Tuple[int, int]) -> Entry:
        h_out, h_in = self.slot(idx[0]), self.slot(idx[1])
        if self.flavor == OPERATOR:
            return FockOperator.zeros(self.reduced, h_out, h_in)
        return Kernel.zero(self.reduced, h_out, h_in)

    def entry(self, mu: int, nu: int) -> Entry:
        if (mu, nu) not in UPPER:
            raise DimensionMismatchError(f"germ entry {(mu, nu)} lies below the diagonal")
        found = self.entries.get((mu, nu))
        return found if found is not None else self.zero_entry((mu, nu))

    def role(self, role: str) -> Entry:
        return self.entry(*ROLE_ENTRIES[role])

    def corner(self) -> Entry:
        return self.entry(MINUS, MINUS)

    @classmethod
    def identity(cls, space: PointSpace, point: int, flavor: str = KERNEL,
                 h: Optional[int] = None) -> 'GermMatrix':
        reduced = space.without(point)
        h = space.initial_dim if h is None else h
        d = space.multiplicity(point)
        entries = {}
        for idx in ((MINUS, MINUS), (CIRCLE, CIRCLE), (PLUS, PLUS)):
            slot = h * d if idx == (CIRCLE, CIRCLE) else h
            unit = unit_kernel(reduced, slot)
            entries[idx] = epsilon(unit) if flavor == OPERATOR else unit
        return cls(space, point, entries, flavor, h)

    def _same(self, other: 'GermMatrix'):
        if other.flavor != self.flavor:
            raise FlavorMismatchError(f"cannot combine {self.flavor} and {other.flavor} germs")
        if other.space != self.space or other.point != self.point or other.h != self.h:
            raise DimensionMismatchError("germs belong to different points or spaces")

    def _map2(self, other: 'GermMatrix', fn) -> 'GermMatrix':
        self._same(other)
        entries = {idx: fn(self.entry(*idx), other.entry(*idx))
                   for idx in set(self.entries) | set(other.entries)}
        return GermMatrix(self.space, self.point, entries, self.flavor, self.h)

    def __add__(self, other: 'GermMatrix') -> 'GermMatrix':
        return self._map2(other, lambda a, b: a + b)

    def __sub__(self, other: 'GermMatrix') -> 'GermMatrix':
        return self._map2(other, lambda a, b: a - b)

    def __matmul__(self, other: 'GermMatrix') -> 'GermMatrix':
        return germ_product(self, other)

    def represent(self) -> 'GermMatrix':
        """Entrywise ε: the operator flavor of a kernel germ."""
        if self.flavor == OPERATOR:
            return self
        entries = {idx: epsilon(entry) for idx, entry in self.entries.items()}
        return GermMatrix(self.space, self.point, entries, OPERATOR, self.h)

    def distance(self, other: 'GermMatrix') -> float:
        """Largest entrywise deviation from another germ of the same flavor."""
        self._same(other)
        worst = 0.0
        for idx in set(self.entries) | set(other.entries):
            a, b = self.entry(*idx), other.entry(*idx)
            if self.flavor == OPERATOR:
                diff = float(np.max(np.abs(a.matrix - b.matrix))) if a.matrix.size else 0.0
            else:
                diff = a.distance(b)
            worst = max(worst, diff)
        return worst

    def __repr__(self) -> str:
        return f"GermMatrix(x={self.point}, flavor={self.flavor}, entries={sorted(self.entries)})"


def _multiply(a: Entry, b: Entry) -> Entry:
    if _is_operator(a):
        return a.compose(b)
    return kernel_product(a, b)


def _accumulate(total: Optional[Entry], term: Entry) -> Entry:
    return term if total is None else total + term


def germ_product(a: GermMatrix, b: GermMatrix) -> GermMatrix:
    """(AB)_ν^μ = Σ_{μ≤κ≤ν} A_κ^μ B_ν^κ + Δ(x) A_+^μ B_ν^− off the corners.

    The Δ(x) term accounts for the atom at x being used by both factors; on
    the corners the entries multiply directly.
    """
    a._same(b)
    entries: Dict[Tuple[int, int], Entry] = {}
    for mu, nu in UPPER:
        total = None
        if (mu, nu) in CORNERS:
            if (mu, mu) in a.entries and (nu, nu) in b.entries:
                total = _multiply(a.entries[(mu, mu)], b.entries[(nu, nu)])
        else:
            for kappa in range(mu, nu + 1):
                if (mu, kappa) in a.entries and (kappa, nu) in b.entries:
                    total = _accumulate(total, _multiply(a.entries[(mu, kappa)], b.entries[(kappa, nu)]))
            if (mu, PLUS) in a.entries and (MINUS, nu) in b.entries:
                mass = _multiply(a.entries[(mu, PLUS)], b.entries[(MINUS, nu)])
                total = _accumulate(total, mass * a.weight)
        if total is not None:
            entries[(mu, nu)] = total
    return GermMatrix(a.space, a.point, entries, a.flavor, a.h)


def _entry_adjoint(entry: Entry) -> Entry:
    if _is_operator(entry):
        return entry.adjoint()
    return star_adjoint(entry)


def dagger(a: GermMatrix) -> GermMatrix:
    """Pseudo-Euclidean conjugation: (A‡)_ν^μ = (A_{−μ}^{−ν})*."""
    entries = {(2 - nu, 2 - mu): _entry_adjoint(entry) for (mu, nu), entry in a.entries.items()}
    return GermMatrix(a.space, a.point, entries, a.flavor, a.h)
