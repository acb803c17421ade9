"""Truncated Fock space 𝔥⊗F over a point space.

Vectors store the function values ψ(ϑ) chain by chain ("function
coordinates"); the pairing carries the measure weights,
⟨ψ|χ⟩ = Σ_ϑ w(ϑ) ⟨ψ(ϑ)|χ(ϑ)⟩. Sectors follow the chain enumeration order and
each sector is 𝔨⊗(ϑ)⊗𝔥 with factors in ascending time, 𝔥 last.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.blocks import axes_for, kron_all, permute_vector
from src.core.chainspace import Chain, PointSpace, chain_weight, enumerate_chains
from src.utils.errors import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)


class FockLayout:
    """Offsets of the chain sectors of 𝔨⊗(ϑ)⊗𝔥 for a space and initial dimension."""

    def __init__(self, space: PointSpace, h: int):
        self.space = space
        self.h = h
        self.chains: List[Chain] = enumerate_chains(space)
        self.offsets: Dict[Chain, int] = {}
        self.sizes: Dict[Chain, int] = {}
        offset = 0
        weights = []
        for chain in self.chains:
            size = space.chain_dim(chain) * h
            self.offsets[chain] = offset
            self.sizes[chain] = size
            weights.append(np.full(size, chain_weight(space, chain)))
            offset += size
        self.dim = offset
        self.weights = np.concatenate(weights) if weights else np.zeros(0)

    def sector(self, chain: Sequence[int]) -> slice:
        chain = tuple(chain)
        start = self.offsets[chain]
        return slice(start, start + self.sizes[chain])

    def product_weights(self, q: np.ndarray) -> np.ndarray:
        """w(ϑ)·q(ϑ) expanded over the basis, for per-point weights q."""
        values = []
        for chain in self.chains:
            qv = 1.0
            for x in chain:
                qv *= q[self.space.position(x)]
            values.append(np.full(self.sizes[chain], chain_weight(self.space, chain) * qv))
        return np.concatenate(values)


@lru_cache(maxsize=256)
def fock_layout(space: PointSpace, h: Optional[int] = None) -> FockLayout:
    return FockLayout(space, space.initial_dim if h is None else h)


@dataclass
class WeightFunction:
    """Per-point positive weights q(x); q(ϑ) = ∏ q(x)."""
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.values <= 0):
            raise PreconditionError("weight functions must be strictly positive")

    @classmethod
    def constant(cls, space: PointSpace, value: float) -> 'WeightFunction':
        return cls(np.full(space.n, float(value)))

    def of_chain(self, space: PointSpace, chain: Iterable[int]) -> float:
        value = 1.0
        for x in chain:
            value *= self.values[space.position(x)]
        return value

    def reciprocal(self) -> 'WeightFunction':
        return WeightFunction(1.0 / self.values)

    def __add__(self, other: 'WeightFunction') -> 'WeightFunction':
        return WeightFunction(self.values + other.values)


def _as_values(space: PointSpace, q: Union[WeightFunction, np.ndarray, float, None]) -> np.ndarray:
    if q is None:
        return np.ones(space.n)
    if isinstance(q, WeightFunction):
        values = q.values
    elif np.isscalar(q):
        values = np.full(space.n, float(q))
    else:
        values = np.asarray(q, dtype=float)
    if values.shape != (space.n,):
        raise DimensionMismatchError(f"weight function has shape {values.shape}, expected ({space.n},)")
    return values


@dataclass
class QField:
    """Per-point d(x)×d(x) matrices Q(x)."""
    matrices: Tuple[np.ndarray, ...]

    def __post_init__(self):
        self.matrices = tuple(np.asarray(m, dtype=complex) for m in self.matrices)

    @classmethod
    def identity(cls, space: PointSpace) -> 'QField':
        return cls(tuple(np.eye(p.multiplicity) for p in space.points))

    @classmethod
    def zero(cls, space: PointSpace) -> 'QField':
        return cls(tuple(np.zeros((p.multiplicity, p.multiplicity)) for p in space.points))

    @classmethod
    def scalar(cls, space: PointSpace, value: complex) -> 'QField':
        return cls(tuple(value * np.eye(p.multiplicity) for p in space.points))

    def validate(self, space: PointSpace) -> 'QField':
        if len(self.matrices) != space.n:
            raise DimensionMismatchError(f"Q field has {len(self.matrices)} entries for {space.n} points")
        for p, m in zip(space.points, self.matrices):
            if m.shape != (p.multiplicity, p.multiplicity):
                raise DimensionMismatchError(f"Q({p.index}) has shape {m.shape}, expected d={p.multiplicity}")
        return self

    def at(self, space: PointSpace, x: int) -> np.ndarray:
        return self.matrices[space.position(x)]

    def restricted(self, space: PointSpace, reduced: PointSpace) -> 'QField':
        return QField(tuple(self.at(space, p.index) for p in reduced.points))

    def compose(self, other: 'QField') -> 'QField':
        return QField(tuple(a @ b for a, b in zip(self.matrices, other.matrices)))

    def adjoint(self) -> 'QField':
        return QField(tuple(m.conj().T for m in self.matrices))

    def scaled(self, value: complex) -> 'QField':
        return QField(tuple(value * m for m in self.matrices))

    def is_zero_at(self, space: PointSpace, x: int) -> bool:
        return not np.any(self.at(space, x))

    def is_projector(self, atol: float = 1e-12) -> bool:
        return all(np.allclose(m @ m, m, atol=atol) and np.allclose(m.conj().T, m, atol=atol)
                   for m in self.matrices)


class FockVector:
    """Element χ of 𝔥⊗F in function coordinates."""

    def __init__(self, space: PointSpace, data: np.ndarray, h: Optional[int] = None):
        self.space = space
        self.h = space.initial_dim if h is None else h
        self.layout = fock_layout(space, self.h)
        self.data = np.asarray(data, dtype=complex).reshape(-1)
        if self.data.shape != (self.layout.dim,):
            raise DimensionMismatchError(
                f"vector of length {self.data.size} does not match Fock dimension {self.layout.dim}")

    @classmethod
    def zeros(cls, space: PointSpace, h: Optional[int] = None) -> 'FockVector':
        layout = fock_layout(space, h)
        return cls(space, np.zeros(layout.dim, dtype=complex), layout.h)

    @classmethod
    def vacuum(cls, space: PointSpace, initial: Optional[np.ndarray] = None) -> 'FockVector':
        vec = cls.zeros(space)
        e = np.zeros(space.initial_dim, dtype=complex)
        if initial is None:
            e[0] = 1.0
        else:
            e[:] = initial
        vec.data[vec.layout.sector(())] = e
        return vec

    def sector(self, chain: Sequence[int]) -> np.ndarray:
        return self.data[self.layout.sector(chain)]

    def inner(self, other: 'FockVector') -> complex:
        """Weighted pairing ⟨self|other⟩, antilinear in self."""
        self._check(other)
        return complex(np.sum(self.layout.weights * np.conj(self.data) * other.data))

    def norm(self) -> float:
        return weighted_norm(self)

    def _check(self, other: 'FockVector'):
        if other.space != self.space or other.h != self.h:
            raise DimensionMismatchError("vectors live on different Fock spaces")

    def __add__(self, other: 'FockVector') -> 'FockVector':
        self._check(other)
        return FockVector(self.space, self.data + other.data, self.h)

    def __sub__(self, other: 'FockVector') -> 'FockVector':
        self._check(other)
        return FockVector(self.space, self.data - other.data, self.h)

    def __mul__(self, scalar: complex) -> 'FockVector':
        return FockVector(self.space, scalar * self.data, self.h)

    __rmul__ = __mul__


class FockOperator:
    """Dense operator from 𝔥_in⊗F to 𝔥_out⊗F over one point space."""

    def __init__(self, space: PointSpace, matrix: np.ndarray,
                 h_out: Optional[int] = None, h_in: Optional[int] = None):
        self.space = space
        self.h_out = space.initial_dim if h_out is None else h_out
        self.h_in = space.initial_dim if h_in is None else h_in
        self.out_layout = fock_layout(space, self.h_out)
        self.in_layout = fock_layout(space, self.h_in)
        self.matrix = np.asarray(matrix, dtype=complex)
        expected = (self.out_layout.dim, self.in_layout.dim)
        if self.matrix.shape != expected:
            raise DimensionMismatchError(f"operator of shape {self.matrix.shape}, expected {expected}")

    @classmethod
    def zeros(cls, space: PointSpace, h_out: Optional[int] = None,
              h_in: Optional[int] = None) -> 'FockOperator':
        out_dim = fock_layout(space, h_out).dim
        in_dim = fock_layout(space, h_in).dim
        return cls(space, np.zeros((out_dim, in_dim), dtype=complex), h_out, h_in)

    @classmethod
    def identity(cls, space: PointSpace, h: Optional[int] = None) -> 'FockOperator':
        dim = fock_layout(space, h).dim
        return cls(space, np.eye(dim, dtype=complex), h, h)

    def _check_same(self, other: 'FockOperator'):
        if (other.space != self.space or other.h_out != self.h_out or other.h_in != self.h_in):
            raise DimensionMismatchError("operators act between different Fock spaces")

    def compose(self, other: 'FockOperator') -> 'FockOperator':
        if other.space != self.space or other.h_out != self.h_in:
            raise DimensionMismatchError(
                f"cannot compose: inner dimensions h_in={self.h_in} and h_out={other.h_out}")
        return FockOperator(self.space, self.matrix @ other.matrix, self.h_out, other.h_in)

    def adjoint(self) -> 'FockOperator':
        """Hilbert adjoint for the weighted pairing: W_in⁻¹ Aᴴ W_out."""
        w_out = self.out_layout.weights
        w_in = self.in_layout.weights
        matrix = (self.matrix.conj().T * w_out[np.newaxis, :]) / w_in[:, np.newaxis]
        return FockOperator(self.space, matrix, self.h_in, self.h_out)

    def add(self, other: 'FockOperator') -> 'FockOperator':
        self._check_same(other)
        return FockOperator(self.space, self.matrix + other.matrix, self.h_out, self.h_in)

    def scale(self, scalar: complex) -> 'FockOperator':
        return FockOperator(self.space, scalar * self.matrix, self.h_out, self.h_in)

    def apply(self, vector: FockVector) -> FockVector:
        if vector.space != self.space or vector.h != self.h_in:
            raise DimensionMismatchError("vector does not match the operator domain")
        return FockVector(self.space, self.matrix @ vector.data, self.h_out)

    def frobenius_distance(self, other: 'FockOperator') -> float:
        return frobenius_distance(self, other)

    def __matmul__(self, other):
        if isinstance(other, FockVector):
            return self.apply(other)
        return self.compose(other)

    def __add__(self, other: 'FockOperator') -> 'FockOperator':
        return self.add(other)

    def __sub__(self, other: 'FockOperator') -> 'FockOperator':
        return self.add(other.scale(-1.0))

    def __mul__(self, scalar: complex) -> 'FockOperator':
        return self.scale(scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def frobenius_distance(a: FockOperator, b: FockOperator) -> float:
    a._check_same(b)
    return float(np.linalg.norm(a.matrix - b.matrix))


def weighted_norm(chi: FockVector, q: Union[WeightFunction, np.ndarray, float, None] = None) -> float:
    """‖χ‖(q) = (Σ_ϑ w(ϑ) q(ϑ) ‖χ(ϑ)‖²)^{1/2}."""
    values = _as_values(chi.space, q)
    weights = chi.layout.product_weights(values)
    return float(np.sqrt(np.sum(weights * np.abs(chi.data) ** 2)))


def weighted_operator_norm(a: FockOperator, p: Union[WeightFunction, np.ndarray, float, None] = None) -> float:
    """‖A‖_p = sup ‖Aχ‖(1/p) / ‖χ‖(p), the top singular value of W(1/p) A W(p)⁻¹."""
    values = _as_values(a.space, p)
    if np.any(values <= 0):
        raise PreconditionError("operator norm weights must be strictly positive")
    left = np.sqrt(a.out_layout.product_weights(1.0 / values))
    right = np.sqrt(a.in_layout.product_weights(values))
    scaled = left[:, np.newaxis] * a.matrix / right[np.newaxis, :]
    if scaled.size == 0:
        return 0.0
    return float(np.linalg.norm(scaled, 2))


def q_tensor(field: QField, space: PointSpace, h: Optional[int] = None) -> FockOperator:
    """Block-diagonal operator acting as ⊗_{x∈ϑ} Q(x) ⊗ 1_𝔥 on each chain."""
    field.validate(space)
    layout = fock_layout(space, h)
    matrix = np.zeros((layout.dim, layout.dim), dtype=complex)
    for chain in layout.chains:
        factors = [field.at(space, x) for x in chain] + [np.eye(layout.h)]
        sl = layout.sector(chain)
        matrix[sl, sl] = kron_all(factors)
    return FockOperator(space, matrix, layout.h, layout.h)


def vacuum_projector(space: PointSpace, h: Optional[int] = None) -> FockOperator:
    return q_tensor(QField.zero(space), space, h)


@lru_cache(maxsize=256)
def insertion_indices(space: PointSpace, x: int, h: Optional[int] = None) -> np.ndarray:
    """Full-space basis index of every basis vector of the reduced space with 𝔨ₓ⊗𝔥 initial slot.

    The reduced space omits x and carries initial dimension d(x)·h, with the
    𝔨ₓ factor placed just before 𝔥.
    """
    layout = fock_layout(space, h)
    reduced = space.without(x)
    d_x = space.multiplicity(x)
    indices = []
    for chain in enumerate_chains(reduced):
        full_chain = tuple(sorted(chain + (x,), key=space.position))
        sl = layout.sector(full_chain)
        full_axes = axes_for(space, full_chain, layout.h)
        new_axes = axes_for(space, chain, layout.h, extra=[(x, d_x)])
        indices.append(permute_vector(np.arange(sl.start, sl.stop), full_axes, new_axes))
    return np.concatenate(indices).astype(int)


@lru_cache(maxsize=256)
def free_indices(space: PointSpace, x: int, h: Optional[int] = None) -> np.ndarray:
    """Full-space basis index of every basis vector of the x-free reduced space."""
    layout = fock_layout(space, h)
    reduced = space.without(x)
    return np.concatenate([np.arange(layout.sector(c).start, layout.sector(c).stop)
                           for c in enumerate_chains(reduced)]).astype(int)


def point_evaluation(chi: FockVector, x: int) -> FockVector:
    """χ̊(x)(ϑ) = χ(ϑ⊔x) as a vector over the reduced space with initial slot 𝔨ₓ⊗𝔥."""
    reduced = chi.space.without(x)
    idx = insertion_indices(chi.space, x, chi.h)
    return FockVector(reduced, chi.data[idx], chi.space.multiplicity(x) * chi.h)


def point_insertion(vector: FockVector, space: PointSpace, x: int) -> FockVector:
    """Inverse of point_evaluation: a full-space vector supported on chains containing x."""
    d_x = space.multiplicity(x)
    if vector.h % d_x:
        raise DimensionMismatchError(f"initial slot {vector.h} is not divisible by d({x})={d_x}")
    h = vector.h // d_x
    out = FockVector.zeros(space, h)
    out.data[insertion_indices(space, x, h)] = vector.data
    return out


def restrict_free(chi: FockVector, x: int) -> FockVector:
    """χ restricted to chains not containing x, as a vector over the reduced space."""
    reduced = chi.space.without(x)
    return FockVector(reduced, chi.data[free_indices(chi.space, x, chi.h)], chi.h)


def extend_free(vector: FockVector, space: PointSpace, x: int) -> FockVector:
    """Embed a reduced-space vector as a full-space vector on x-free chains."""
    out = FockVector.zeros(space, vector.h)
    out.data[free_indices(space, x, vector.h)] = vector.data
    return out
