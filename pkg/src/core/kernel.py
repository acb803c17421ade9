"""Triangular operator-valued kernels and their ⋆-algebra.

A Kernel maps tables to blocks. The block at a table maps
𝔨⊗(ϑ∘⁻⊔ϑ∘∘)⊗𝔥_in to 𝔨⊗(ϑ∘∘⊔ϑ₊∘)⊗𝔥_out; tables are stored by role string
and a missing key is a zero block. 𝔥_out and 𝔥_in default to the space's
initial dimension; point-split kernels carry a larger initial slot.
"""

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.blocks import axes_for, kron_all, permute_block
from src.core.chainspace import (ABSENT, INPUT_ROLES, OUTPUT_ROLES, ROLES, PointSpace,
                                 chain_weight, enumerate_table_keys,
                                 key_chain, key_input_chain, key_output_chain)
from src.utils.errors import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)

STAR_ROLES = str.maketrans('ac', 'ca')

# (left role, right role) -> (product role, carries Δ(x))
PRODUCT_RULES: Dict[Tuple[str, str], Tuple[str, bool]] = {
    ('n', 'n'): ('n', False),
    ('c', 'a'): ('n', True),
    ('n', 'c'): ('c', False),
    ('c', '.'): ('c', False),
    ('c', 's'): ('c', True),
    ('a', 'n'): ('a', False),
    ('.', 'a'): ('a', False),
    ('s', 'a'): ('a', True),
    ('a', 'c'): ('s', False),
    ('s', '.'): ('s', False),
    ('.', 's'): ('s', False),
    ('s', 's'): ('s', True),
    ('.', '.'): ('.', False),
}


def block_shape(space: PointSpace, key: str, h_out: int, h_in: int) -> Tuple[int, int]:
    out_dim, in_dim = h_out, h_in
    for p, ch in zip(space.points, key):
        if ch in OUTPUT_ROLES:
            out_dim *= p.multiplicity
        if ch in INPUT_ROLES:
            in_dim *= p.multiplicity
    return out_dim, in_dim


class Kernel:
    """Sparse map from table keys to dense complex blocks."""

    def __init__(self, space: PointSpace, blocks: Optional[Dict[str, np.ndarray]] = None,
                 h_out: Optional[int] = None, h_in: Optional[int] = None):
        self.space = space
        self.h_out = space.initial_dim if h_out is None else h_out
        self.h_in = space.initial_dim if h_in is None else h_in
        self.blocks: Dict[str, np.ndarray] = {}
        for key, block in (blocks or {}).items():
            self._store(key, block)

    def _store(self, key: str, block: np.ndarray):
        if len(key) != self.space.n or any(ch not in ABSENT + ''.join(ROLES) for ch in key):
            raise DimensionMismatchError(f"invalid table key {key!r} for {self.space.n} points")
        block = np.asarray(block, dtype=complex)
        expected = block_shape(self.space, key, self.h_out, self.h_in)
        if block.shape != expected:
            raise DimensionMismatchError(f"block at {key!r} has shape {block.shape}, expected {expected}")
        self.blocks[key] = block

    @classmethod
    def zero(cls, space: PointSpace, h_out: Optional[int] = None, h_in: Optional[int] = None) -> 'Kernel':
        return cls(space, {}, h_out, h_in)

    def shape(self, key: str) -> Tuple[int, int]:
        return block_shape(self.space, key, self.h_out, self.h_in)

    def block(self, key: str) -> np.ndarray:
        block = self.blocks.get(key)
        if block is None:
            return np.zeros(self.shape(key), dtype=complex)
        return block

    def support(self) -> List[str]:
        return sorted(self.blocks)

    def same_shape(self, other: 'Kernel') -> bool:
        return other.space == self.space and other.h_out == self.h_out and other.h_in == self.h_in

    def _check(self, other: 'Kernel'):
        if not self.same_shape(other):
            raise DimensionMismatchError("kernels live on different spaces or initial slots")

    def combine(self, other: 'Kernel', a: complex = 1.0, b: complex = 1.0) -> 'Kernel':
        self._check(other)
        blocks = {key: a * block for key, block in self.blocks.items()}
        for key, block in other.blocks.items():
            if key in blocks:
                blocks[key] = blocks[key] + b * block
            else:
                blocks[key] = b * block
        return Kernel(self.space, blocks, self.h_out, self.h_in)

    def __add__(self, other: 'Kernel') -> 'Kernel':
        return self.combine(other)

    def __sub__(self, other: 'Kernel') -> 'Kernel':
        return self.combine(other, 1.0, -1.0)

    def __neg__(self) -> 'Kernel':
        return self.scale(-1.0)

    def scale(self, scalar: complex) -> 'Kernel':
        return Kernel(self.space, {k: scalar * b for k, b in self.blocks.items()}, self.h_out, self.h_in)

    def __mul__(self, scalar: complex) -> 'Kernel':
        return self.scale(scalar)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(b))) for b in self.blocks.values() if b.size), default=0.0)

    def distance(self, other: 'Kernel') -> float:
        """Largest entrywise deviation between two kernels."""
        return (self - other).max_abs()

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.max_abs() <= atol

    def pruned(self, atol: float = 0.0) -> 'Kernel':
        blocks = {k: b for k, b in self.blocks.items() if b.size and np.max(np.abs(b)) > atol}
        return Kernel(self.space, blocks, self.h_out, self.h_in)

    def restricted(self, predicate) -> 'Kernel':
        return Kernel(self.space, {k: b for k, b in self.blocks.items() if predicate(k)},
                      self.h_out, self.h_in)

    def __repr__(self) -> str:
        return (f"Kernel(n={self.space.n}, h_out={self.h_out}, h_in={self.h_in}, "
                f"blocks={len(self.blocks)})")


def unit_kernel(space: PointSpace, h: Optional[int] = None) -> Kernel:
    """Î: identity blocks on tables whose only nonempty chain is ϑ∘∘."""
    h = space.initial_dim if h is None else h
    blocks = {}
    for chars in product(ABSENT + 'n', repeat=space.n):
        key = ''.join(chars)
        blocks[key] = np.eye(block_shape(space, key, h, h)[0], dtype=complex)
    return Kernel(space, blocks, h, h)


def ampliation_kernel(space: PointSpace, a: np.ndarray) -> Kernel:
    """A ⊗ Î: the initial operator A acting trivially on every 𝔨ₓ."""
    a = np.asarray(a, dtype=complex)
    blocks = {}
    for chars in product(ABSENT + 'n', repeat=space.n):
        key = ''.join(chars)
        k = key_output_chain(space, key)
        blocks[key] = np.kron(np.eye(space.chain_dim(k)), a)
    return Kernel(space, blocks, a.shape[0], a.shape[1])


def star_adjoint(kernel: Kernel) -> Kernel:
    """T⋆(𝛝) = T(𝛝′)* with annihilation and creation roles exchanged."""
    blocks = {key.translate(STAR_ROLES): block.conj().T for key, block in kernel.blocks.items()}
    return Kernel(kernel.space, blocks, kernel.h_in, kernel.h_out)


def kernel_product(x: Kernel, y: Kernel, point_mass: bool = True) -> Kernel:
    """The associative product X·Y.

    Each point of the result is either unused, used by one factor, or shared
    between the factors; shared uses of an atom of mass Δ(x) carry that mass.
    With point_mass=False only the disjoint decompositions are summed.
    """
    if x.space != y.space:
        raise DimensionMismatchError("kernel product needs a common point space")
    if x.h_in != y.h_out:
        raise DimensionMismatchError(f"inner initial slots differ: {x.h_in} vs {y.h_out}")
    space = x.space
    weights = [p.weight for p in space.points]

    by_output = defaultdict(list)
    for key, block in y.blocks.items():
        by_output[tuple(ch in OUTPUT_ROLES for ch in key)].append((key, block))

    result: Dict[str, np.ndarray] = {}
    for sigma, x_block in x.blocks.items():
        for tau, y_block in by_output.get(tuple(ch in INPUT_ROLES for ch in sigma), ()):
            coef = 1.0
            target = []
            for pos, pair in enumerate(zip(sigma, tau)):
                role, massive = PRODUCT_RULES[pair]
                if massive:
                    if not point_mass:
                        break
                    coef *= weights[pos]
                target.append(role)
            else:
                key = ''.join(target)
                contribution = coef * (x_block @ y_block)
                if key in result:
                    result[key] += contribution
                else:
                    result[key] = contribution
    return Kernel(space, result, x.h_out, y.h_in)


@dataclass
class WeightQuadruple:
    """Four per-point nonnegative weight functions, one per role."""
    scalar: np.ndarray
    annihilation: np.ndarray
    creation: np.ndarray
    number: np.ndarray

    def __post_init__(self):
        for name in ('scalar', 'annihilation', 'creation', 'number'):
            values = np.asarray(getattr(self, name), dtype=float)
            if np.any(values < 0):
                raise PreconditionError(f"{name} weights must be nonnegative")
            setattr(self, name, values)

    @classmethod
    def constant(cls, space: PointSpace, s: float = 0.0, a: float = 0.0,
                 c: float = 0.0, n: float = 1.0) -> 'WeightQuadruple':
        return cls(np.full(space.n, s), np.full(space.n, a), np.full(space.n, c), np.full(space.n, n))

    def role(self, role: str) -> np.ndarray:
        return {'s': self.scalar, 'a': self.annihilation,
                'c': self.creation, 'n': self.number}[role]

    def of_key(self, key: str) -> float:
        """α(𝛝) = ∏ over present points of the weight of their role."""
        value = 1.0
        for pos, ch in enumerate(key):
            if ch != ABSENT:
                value *= self.role(ch)[pos]
        return value

    def transposed(self) -> 'WeightQuadruple':
        """𝛂′: annihilation and creation weights exchanged."""
        return WeightQuadruple(self.scalar, self.creation, self.annihilation, self.number)

    def product(self, other: 'WeightQuadruple', space: PointSpace,
                point_mass: bool = True) -> 'WeightQuadruple':
        """(𝛂·𝛄): the triangular matrix product, plus Δ-terms for shared atoms."""
        a, g = self, other
        delta = np.array([p.weight for p in space.points]) if point_mass else np.zeros(space.n)
        return WeightQuadruple(
            scalar=a.annihilation * g.creation + a.scalar + g.scalar + delta * a.scalar * g.scalar,
            annihilation=a.annihilation * g.number + g.annihilation + delta * a.scalar * g.annihilation,
            creation=a.number * g.creation + a.creation + delta * a.creation * g.scalar,
            number=a.number * g.number + delta * a.creation * g.annihilation,
        )

    def as_matrices(self) -> List[np.ndarray]:
        """Per-point 3×3 upper-triangular matrices over (−, ∘, +)."""
        mats = []
        for k in range(len(self.number)):
            mats.append(np.array([
                [1.0, self.annihilation[k], self.scalar[k]],
                [0.0, self.number[k], self.creation[k]],
                [0.0, 0.0, 1.0],
            ]))
        return mats


def relative_norm(kernel: Kernel, alpha: WeightQuadruple) -> float:
    """‖T‖_𝛂 = max over tables of ‖T(𝛝)‖ / α(𝛝), spectral norm on blocks."""
    worst = 0.0
    for key, block in kernel.blocks.items():
        norm = float(np.linalg.norm(block, 2)) if block.size else 0.0
        if norm == 0.0:
            continue
        denom = alpha.of_key(key)
        if denom == 0.0:
            return math.inf
        worst = max(worst, norm / denom)
    return worst


def projective_norm(kernel: Kernel, q, r) -> float:
    """‖T‖_q(r) = Σ_s w(s) (Σ_{c,a} w(c)w(a) max_n(‖T‖/q(n))² r(c⊔a))^{1/2}."""
    space = kernel.space
    q = _per_point(space, q)
    r = _per_point(space, r)
    if np.any(q < 1.0):
        raise PreconditionError("projective norm needs q >= 1")
    if np.any(r <= 0.0):
        raise PreconditionError("projective norm needs r > 0")

    peaks: Dict[str, float] = {}
    for key, block in kernel.blocks.items():
        norm = float(np.linalg.norm(block, 2)) if block.size else 0.0
        if norm == 0.0:
            continue
        q_n = 1.0
        for pos, ch in enumerate(key):
            if ch == 'n':
                q_n *= q[pos]
        outer = key.replace('n', ABSENT)
        peaks[outer] = max(peaks.get(outer, 0.0), norm / q_n)

    inner: Dict[str, float] = defaultdict(float)
    for outer, peak in peaks.items():
        weight = 1.0
        for pos, ch in enumerate(outer):
            if ch in 'ac':
                weight *= space.points[pos].weight * r[pos]
        scalar_key = ''.join(ch if ch == 's' else ABSENT for ch in outer)
        inner[scalar_key] += weight * peak ** 2

    total = 0.0
    for scalar_key, value in inner.items():
        w_s = chain_weight(space, key_chain(space, scalar_key, 's'))
        total += w_s * math.sqrt(value)
    return total


def exponential_bound(norm: float, alpha: WeightQuadruple, r, q, space: PointSpace) -> float:
    """‖T‖_𝛂 · exp Σ_x Δ(x)(α₊⁻(x) + r(x)(α₊∘(x)² + α∘⁻(x)²)/2), valid for α∘∘ ≤ q."""
    q = _per_point(space, q)
    r = _per_point(space, r)
    if np.any(alpha.number > q):
        raise PreconditionError("exponential bound needs α∘∘ <= q pointwise")
    if norm == 0.0:
        return 0.0
    delta = np.array([p.weight for p in space.points])
    exponent = np.sum(delta * (alpha.scalar + r * (alpha.creation ** 2 + alpha.annihilation ** 2) / 2.0))
    return norm * math.exp(float(exponent))


def exponential_kernel(alpha: WeightQuadruple, space: PointSpace, h: Optional[int] = None) -> Kernel:
    """Scalar kernel 𝛂⊗(𝛝) = ∏ α_ν^μ(ϑ_ν^μ) times the identity on 𝔥."""
    if any(p.multiplicity != 1 for p in space.points):
        raise PreconditionError("exponential kernels are scalar: all multiplicities must be 1")
    h = space.initial_dim if h is None else h
    blocks = {}
    for key in enumerate_table_keys(space):
        value = alpha.of_key(key)
        if value != 0.0:
            blocks[key] = value * np.eye(h, dtype=complex)
    return Kernel(space, blocks, h, h)


def _per_point(space: PointSpace, values) -> np.ndarray:
    if np.isscalar(values):
        return np.full(space.n, float(values))
    if hasattr(values, 'values') and not isinstance(values, np.ndarray):
        values = values.values
    values = np.asarray(values, dtype=float)
    if values.shape != (space.n,):
        raise DimensionMismatchError(f"per-point weights have shape {values.shape}, expected ({space.n},)")
    return values


# Ampliation by Q⊗ on extra (∘,∘) points

def ampliate_block(space: PointSpace, key: str, block: np.ndarray, extra: Sequence[int],
                   matrices: Sequence[np.ndarray], h_out: int, h_in: int) -> Tuple[str, np.ndarray]:
    """Tensor a block with ⊗ Q(x) over extra points, which join the number chain."""
    if not extra:
        return key, block
    chars = list(key)
    for x in extra:
        chars[space.position(x)] = 'n'
    new_key = ''.join(chars)
    big = np.kron(block, kron_all(list(matrices)))
    extra_axes = [(x, space.multiplicity(x)) for x in extra]
    out_axes = axes_for(space, key_output_chain(space, key), h_out) + extra_axes
    in_axes = axes_for(space, key_input_chain(space, key), h_in) + extra_axes
    new_out = axes_for(space, key_output_chain(space, new_key), h_out)
    new_in = axes_for(space, key_input_chain(space, new_key), h_in)
    return new_key, permute_block(big, out_axes, in_axes, new_out, new_in)


# Integrand kernels M(𝛖, 𝛞)

UPSILON_ROLES = {'s': 'S', 'a': 'A', 'c': 'C', 'n': 'N'}


def pair_key(upsilon_key: str, kappa_key: str) -> str:
    """Merge a 𝛖 key (upper case) and a disjoint 𝛞 key (lower case)."""
    chars = []
    for u, k in zip(upsilon_key, kappa_key):
        if u != ABSENT and k != ABSENT:
            raise PreconditionError(f"tables {upsilon_key!r} and {kappa_key!r} overlap")
        chars.append(u.upper() if u != ABSENT else k)
    return ''.join(chars)


def split_pair_key(key: str) -> Tuple[str, str]:
    upsilon = ''.join(ch.lower() if ch.isupper() else ABSENT for ch in key)
    kappa = ''.join(ch if ch.islower() else ABSENT for ch in key)
    return upsilon, kappa


class IntegrandKernel:
    """Sparse map from disjoint table pairs (𝛖, 𝛞) to blocks.

    Pair keys use upper-case roles for 𝛖 and lower-case roles for 𝛞; the
    block at a pair has the shape of a kernel block at the union table.
    """

    def __init__(self, space: PointSpace, blocks: Optional[Dict[str, np.ndarray]] = None,
                 h_out: Optional[int] = None, h_in: Optional[int] = None):
        self.space = space
        self.h_out = space.initial_dim if h_out is None else h_out
        self.h_in = space.initial_dim if h_in is None else h_in
        self.blocks: Dict[str, np.ndarray] = {}
        for key, block in (blocks or {}).items():
            self._store(key, block)

    def _store(self, key: str, block: np.ndarray):
        if len(key) != self.space.n or any(ch not in '.sacnSACN' for ch in key):
            raise DimensionMismatchError(f"invalid pair key {key!r}")
        block = np.asarray(block, dtype=complex)
        expected = block_shape(self.space, key.lower(), self.h_out, self.h_in)
        if block.shape != expected:
            raise DimensionMismatchError(f"block at {key!r} has shape {block.shape}, expected {expected}")
        self.blocks[key] = block

    def upsilon_points(self, key: str) -> Tuple[int, ...]:
        return tuple(p.index for p, ch in zip(self.space.points, key) if ch.isupper())

    def support(self) -> List[str]:
        return sorted(self.blocks)

    def combine(self, other: 'IntegrandKernel', a: complex = 1.0, b: complex = 1.0) -> 'IntegrandKernel':
        if other.space != self.space or (other.h_out, other.h_in) != (self.h_out, self.h_in):
            raise DimensionMismatchError("integrands live on different spaces")
        blocks = {key: a * block for key, block in self.blocks.items()}
        for key, block in other.blocks.items():
            blocks[key] = blocks[key] + b * block if key in blocks else b * block
        return IntegrandKernel(self.space, blocks, self.h_out, self.h_in)

    def __add__(self, other):
        return self.combine(other)

    def __sub__(self, other):
        return self.combine(other, 1.0, -1.0)

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(b))) for b in self.blocks.values() if b.size), default=0.0)

    def __repr__(self) -> str:
        return f"IntegrandKernel(n={self.space.n}, blocks={len(self.blocks)})"


# Serialization: a flat record list in JSON

def kernel_to_records(kernel: Kernel) -> Dict[str, object]:
    records = []
    for key in kernel.support():
        block = kernel.blocks[key]
        records.append({
            'table': key,
            'shape': list(block.shape),
            're': [float(v) for v in block.real.reshape(-1)],
            'im': [float(v) for v in block.imag.reshape(-1)],
        })
    return {'n': kernel.space.n, 'h_out': kernel.h_out, 'h_in': kernel.h_in, 'records': records}


def kernel_from_records(space: PointSpace, data: Dict[str, object]) -> Kernel:
    if data.get('n', space.n) != space.n:
        raise DimensionMismatchError(f"records are for {data.get('n')} points, space has {space.n}")
    blocks = {}
    for record in data['records']:
        shape = tuple(record['shape'])
        values = np.array(record['re'], dtype=float) + 1j * np.array(record['im'], dtype=float)
        blocks[record['table']] = values.reshape(shape)
    return Kernel(space, blocks, data.get('h_out'), data.get('h_in'))


def dumps_kernel(kernel: Kernel) -> str:
    return json.dumps(kernel_to_records(kernel), indent=2)


def loads_kernel(space: PointSpace, text: str) -> Kernel:
    return kernel_from_records(space, json.loads(text))
