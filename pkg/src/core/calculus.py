"""Point splits, counting integrals, Meyer/Möbius transforms and Q-adaptedness.

Processes are piecewise constant between cut times: the value at t depends
only on the level, the number of points strictly before t. Counting
integrals carry no measure weights; the weights enter through ε only.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.blocks import axes_for, permute_block
from src.core.chainspace import (ABSENT, INPUT_ROLES, OUTPUT_ROLES, AtomicTable, PointSpace,
                                 chain_weight, enumerate_chains, key_chain,
                                 key_input_chain, key_output_chain, subsets)
from src.core.fock import (FockOperator, FockVector, QField, fock_layout, free_indices,
                           insertion_indices, point_evaluation, weighted_norm)
from src.core.germs import MINUS, PLUS, ROLE_ENTRIES, GermMatrix
from src.core.kernel import (IntegrandKernel, Kernel, WeightQuadruple, ampliate_block,
                             relative_norm, split_pair_key, star_adjoint)
from src.core.representation import epsilon
from src.utils.errors import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)

DIAGONAL_ROLES = ('-', '+')


def _drop(key: str, pos: int) -> str:
    return key[:pos] + key[pos + 1:]


def _insert(key: str, pos: int, ch: str) -> str:
    return key[:pos] + ch + key[pos:]


# Point splits

@dataclass
class PointSplitKernel:
    """𝛞 ↦ T(𝛞 ⊔ 𝐱) for one role; the 𝔨ₓ factor sits in the initial slot."""
    role: str
    point: int
    kernel: Kernel

    def join(self, space: PointSpace) -> Kernel:
        return point_join(self.kernel, self.role, self.point, space)


def _split_slots(space: PointSpace, role: str, x: int, h_out: int, h_in: int) -> Tuple[int, int]:
    d = space.multiplicity(x)
    return (h_out * d if role in OUTPUT_ROLES else h_out,
            h_in * d if role in INPUT_ROLES else h_in)


def point_split(kernel: Kernel, role: str, x: int) -> PointSplitKernel:
    """Ṫ(𝐱, 𝛞) = T(𝛞 ⊔ 𝐱) over tables 𝛞 not containing x.

    The diagonal roles '-' and '+' return T itself, restricted to x-free
    tables.
    """
    space = kernel.space
    pos = space.position(x)
    reduced = space.without(x)
    if role in DIAGONAL_ROLES:
        blocks = {_drop(key, pos): b for key, b in kernel.blocks.items() if key[pos] == ABSENT}
        return PointSplitKernel(role, x, Kernel(reduced, blocks, kernel.h_out, kernel.h_in))

    if role not in ROLE_ENTRIES:
        raise PreconditionError(f"unknown role {role!r}")
    d = space.multiplicity(x)
    h_out, h_in = _split_slots(space, role, x, kernel.h_out, kernel.h_in)
    out_extra = [(x, d)] if role in OUTPUT_ROLES else []
    in_extra = [(x, d)] if role in INPUT_ROLES else []
    blocks = {}
    for key, block in kernel.blocks.items():
        if key[pos] != role:
            continue
        rkey = _drop(key, pos)
        blocks[rkey] = permute_block(
            block,
            axes_for(space, key_output_chain(space, key), kernel.h_out),
            axes_for(space, key_input_chain(space, key), kernel.h_in),
            axes_for(space, key_output_chain(reduced, rkey), kernel.h_out, out_extra),
            axes_for(space, key_input_chain(reduced, rkey), kernel.h_in, in_extra),
        )
    return PointSplitKernel(role, x, Kernel(reduced, blocks, h_out, h_in))


def point_join(split: Kernel, role: str, x: int, space: PointSpace) -> Kernel:
    """Inverse of point_split: a full-space kernel supported on tables with x in the role."""
    pos = space.position(x)
    d = space.multiplicity(x)
    h_out = split.h_out // d if role in OUTPUT_ROLES else split.h_out
    h_in = split.h_in // d if role in INPUT_ROLES else split.h_in
    if _split_slots(space, role, x, h_out, h_in) != (split.h_out, split.h_in):
        raise DimensionMismatchError(f"split kernel slots do not carry d({x})={d}")
    out_extra = [(x, d)] if role in OUTPUT_ROLES else []
    in_extra = [(x, d)] if role in INPUT_ROLES else []
    reduced = split.space
    blocks = {}
    for rkey, block in split.blocks.items():
        key = _insert(rkey, pos, role)
        blocks[key] = permute_block(
            block,
            axes_for(space, key_output_chain(reduced, rkey), h_out, out_extra),
            axes_for(space, key_input_chain(reduced, rkey), h_in, in_extra),
            axes_for(space, key_output_chain(space, key), h_out),
            axes_for(space, key_input_chain(space, key), h_in),
        )
    return Kernel(space, blocks, h_out, h_in)


def x_free_part(kernel: Kernel, x: int) -> Kernel:
    return point_split(kernel, '-', x).kernel


def tensor_point(kernel: Kernel, q: np.ndarray, x: int) -> Kernel:
    """T ⊗ Q(x) on the space without x, with the 𝔨ₓ factor in the initial slot."""
    reduced = kernel.space
    d = q.shape[0]
    blocks = {}
    for key, block in kernel.blocks.items():
        blocks[key] = permute_block(
            np.kron(block, q),
            axes_for(reduced, key_output_chain(reduced, key), kernel.h_out) + [(x, d)],
            axes_for(reduced, key_input_chain(reduced, key), kernel.h_in) + [(x, d)],
            axes_for(reduced, key_output_chain(reduced, key), kernel.h_out, [(x, d)]),
            axes_for(reduced, key_input_chain(reduced, key), kernel.h_in, [(x, d)]),
        )
    return Kernel(reduced, blocks, kernel.h_out * d, kernel.h_in * d)


# Single integrands D(𝐱, 𝛞)

class SingleIntegrand:
    """Role-indexed point kernels D(𝐱_ν^μ, ·), one reduced kernel per (role, x)."""

    def __init__(self, space: PointSpace, entries: Optional[Dict[Tuple[str, int], Kernel]] = None,
                 h_out: Optional[int] = None, h_in: Optional[int] = None):
        self.space = space
        self.h_out = space.initial_dim if h_out is None else h_out
        self.h_in = space.initial_dim if h_in is None else h_in
        self.entries: Dict[Tuple[str, int], Kernel] = {}
        for (role, x), kernel in (entries or {}).items():
            self.set(role, x, kernel)

    def set(self, role: str, x: int, kernel: Kernel):
        if role not in ROLE_ENTRIES:
            raise PreconditionError(f"unknown role {role!r}")
        expected = _split_slots(self.space, role, x, self.h_out, self.h_in)
        if kernel.space != self.space.without(x) or (kernel.h_out, kernel.h_in) != expected:
            raise DimensionMismatchError(f"D({role}, {x}) does not fit the reduced space of {x}")
        self.entries[(role, x)] = kernel

    def get(self, role: str, x: int) -> Kernel:
        found = self.entries.get((role, x))
        if found is None:
            h_out, h_in = _split_slots(self.space, role, x, self.h_out, self.h_in)
            return Kernel.zero(self.space.without(x), h_out, h_in)
        return found

    def joined(self, role: str, x: int) -> Kernel:
        return point_join(self.get(role, x), role, x, self.space)

    def atoms(self) -> List[AtomicTable]:
        """Atomic tables 𝐱_ν^μ with a stored entry, in (role, point) order."""
        return [AtomicTable(role, x) for role, x in sorted(self.entries)]

    @classmethod
    def from_germs(cls, germs: Dict[int, GermMatrix], space: PointSpace) -> 'SingleIntegrand':
        """Collect the off-corner entries of kernel germs, one germ per point."""
        h = space.initial_dim
        entries = {}
        for x, germ in germs.items():
            h = germ.h
            for role, idx in ROLE_ENTRIES.items():
                if idx in germ.entries:
                    entries[(role, x)] = germ.entries[idx]
        return cls(space, entries, h, h)


def counting_integral(integrand: IntegrandKernel, t: float) -> Kernel:
    """ν₀ᵗ(𝛝, M) = Σ_{𝛖⊆𝛝ᵗ} M(𝛖, 𝛝∖𝛖), all points of 𝛖 strictly before t."""
    space = integrand.space
    times = [p.time for p in space.points]
    blocks: Dict[str, np.ndarray] = {}
    for key, block in integrand.blocks.items():
        if any(ch.isupper() and times[pos] >= t for pos, ch in enumerate(key)):
            continue
        union = key.lower()
        blocks[union] = blocks[union] + block if union in blocks else block
    return Kernel(space, blocks, integrand.h_out, integrand.h_in)


def single_counting_integral(integrand: SingleIntegrand, t: float) -> Kernel:
    """n₀ᵗ(𝛝, D) = Σ over roles of Σ_{x∈ϑ_ν^μ, t(x)<t} D(𝐱_ν^μ, 𝛝∖𝐱_ν^μ)."""
    space = integrand.space
    total = Kernel.zero(space, integrand.h_out, integrand.h_in)
    for atom in integrand.atoms():
        if space.time(atom.point) < t:
            total = total + integrand.joined(atom.role, atom.point)
    return total


def integrand_from_single(integrand: SingleIntegrand) -> IntegrandKernel:
    """The multiple integrand M(𝐱_ν^μ, 𝛞) = D(𝐱_ν^μ, 𝛞) supported on one-point 𝛖."""
    space = integrand.space
    blocks: Dict[str, np.ndarray] = {}
    for atom in integrand.atoms():
        marker = atom.table().key(space)
        for key, block in integrand.joined(atom.role, atom.point).blocks.items():
            pair = ''.join(ch.upper() if m != ABSENT else ch for ch, m in zip(key, marker))
            blocks[pair] = blocks[pair] + block if pair in blocks else block
    return IntegrandKernel(space, blocks, integrand.h_out, integrand.h_in)


def canonical_measure(role: str, integrand: SingleIntegrand, window: Tuple[float, float]) -> FockOperator:
    """Λ(D, △) = ε(N(D, △)) with N(𝛝) = Σ_{x∈ϑ_ν^μ∩△} D(x, 𝛝∖𝐱_ν^μ), △ = [a, b)."""
    lo, hi = window
    space = integrand.space
    total = Kernel.zero(space, integrand.h_out, integrand.h_in)
    for (r, x) in sorted(integrand.entries):
        if r == role and lo <= space.time(x) < hi:
            total = total + integrand.joined(r, x)
    return epsilon(total)


# Operator-level integrals, assembled from reduced representations

@lru_cache(maxsize=1024)
def _multi_insertion(space: PointSpace, points: Tuple[int, ...], h: int) -> np.ndarray:
    """Full basis index of each basis vector of space∖points with slot 𝔨⊗(points)⊗𝔥."""
    layout = fock_layout(space, h)
    reduced = space.without(*points)
    extra = [(y, space.multiplicity(y)) for y in points]
    indices = []
    for chain in enumerate_chains(reduced):
        full_chain = tuple(sorted(chain + points))
        sl = layout.sector(full_chain)
        tensor = np.arange(sl.start, sl.stop).reshape(-1, 1)
        indices.append(permute_block(tensor, axes_for(space, full_chain, h), [],
                                     axes_for(space, chain, h, extra), []).reshape(-1))
    return np.concatenate(indices).astype(int)


def operator_multiple_integral(integrand: IntegrandKernel, t: float) -> FockOperator:
    """𝚤₀ᵗ(𝐌): sum over 𝛖 before t of the reduced representations ε(M(𝛖, ·)).

    Each 𝛖 contributes w(υ₊⁻) w(υ∘⁻) ε(M(𝛖, ·)) between the sectors that
    contain its output points and its input points respectively.
    """
    space = integrand.space
    h_out, h_in = integrand.h_out, integrand.h_in
    groups: Dict[str, Dict[str, np.ndarray]] = {}
    for key, block in integrand.blocks.items():
        upsilon, _ = split_pair_key(key)
        groups.setdefault(upsilon, {})[key] = block

    out_dim = fock_layout(space, h_out).dim
    in_dim = fock_layout(space, h_in).dim
    matrix = np.zeros((out_dim, in_dim), dtype=complex)
    for upsilon, members in sorted(groups.items()):
        points = key_chain(space, upsilon, 'sacn')
        if any(space.time(y) >= t for y in points):
            continue
        p_out = key_output_chain(space, upsilon)
        p_in = key_input_chain(space, upsilon)
        reduced = space.without(*points)
        positions = [space.position(y) for y in points]
        slot_out = h_out * space.chain_dim(p_out)
        slot_in = h_in * space.chain_dim(p_in)
        blocks = {}
        for key, block in members.items():
            union = key.lower()
            rkey = ''.join(ch for pos, ch in enumerate(union) if pos not in positions)
            blocks[rkey] = permute_block(
                block,
                axes_for(space, key_output_chain(space, union), h_out),
                axes_for(space, key_input_chain(space, union), h_in),
                axes_for(space, key_output_chain(reduced, rkey), h_out,
                         [(y, space.multiplicity(y)) for y in p_out]),
                axes_for(space, key_input_chain(reduced, rkey), h_in,
                         [(y, space.multiplicity(y)) for y in p_in]),
            )
        reduced_op = epsilon(Kernel(reduced, blocks, slot_out, slot_in))
        coef = chain_weight(space, key_chain(space, upsilon, 'sa'))
        rows = _embedding(space, points, p_out, h_out)
        cols = _embedding(space, points, p_in, h_in)
        matrix[np.ix_(rows, cols)] += coef * reduced_op.matrix
    return FockOperator(space, matrix, h_out, h_in)


def _embedding(space: PointSpace, points: Tuple[int, ...], inserted: Tuple[int, ...], h: int) -> np.ndarray:
    """Indices of space∖points (slot 𝔨⊗(inserted)⊗𝔥) inside the full space.

    Points of 𝛖 that are not inserted are simply absent from the sector.
    """
    free = tuple(y for y in points if y not in inserted)
    if not free:
        return _multi_insertion(space, tuple(inserted), h)
    partial = space.without(*free)
    inner = _multi_insertion(partial, tuple(inserted), h)
    outer = _free_many(space, free, h)
    return outer[inner]


@lru_cache(maxsize=1024)
def _free_many(space: PointSpace, points: Tuple[int, ...], h: int) -> np.ndarray:
    layout = fock_layout(space, h)
    reduced = space.without(*points)
    return np.concatenate([np.arange(layout.sector(c).start, layout.sector(c).stop)
                           for c in enumerate_chains(reduced)]).astype(int)


def operator_single_integral(integrand: SingleIntegrand, t: float) -> FockOperator:
    """i₀ᵗ(𝐃) = Σ_{t(x)<t} Δ E D₊⁻ E† + Δ E D∘⁻ ∇ₓ + C D₊∘ E† + C D∘∘ ∇ₓ.

    E embeds x-free chains, C inserts the point x and ∇ₓ evaluates at x.
    """
    space = integrand.space
    h_out, h_in = integrand.h_out, integrand.h_in
    matrix = np.zeros((fock_layout(space, h_out).dim, fock_layout(space, h_in).dim), dtype=complex)
    for (role, x) in sorted(integrand.entries):
        if space.time(x) >= t:
            continue
        op = epsilon(integrand.get(role, x)).matrix
        rows = insertion_indices(space, x, h_out) if role in OUTPUT_ROLES else free_indices(space, x, h_out)
        cols = insertion_indices(space, x, h_in) if role in INPUT_ROLES else free_indices(space, x, h_in)
        coef = space.weight(x) if role in ('s', 'a') else 1.0
        matrix[np.ix_(rows, cols)] += coef * op
    return FockOperator(space, matrix, h_out, h_in)


def multiple_qs_integral(integrand: IntegrandKernel, t: float) -> FockOperator:
    """𝚤₀ᵗ(ε M) realized as ε(ν₀ᵗ(M))."""
    return epsilon(counting_integral(integrand, t))


# Meyer and Möbius transforms

def _absent_points(space: PointSpace, key: str) -> Tuple[int, ...]:
    return tuple(p.index for p, ch in zip(space.points, key) if ch == ABSENT)


def _subset_transform(kernel: Kernel, field: QField, sign: complex) -> Kernel:
    space = kernel.space
    field.validate(space)
    result: Dict[str, np.ndarray] = {}
    for key, block in kernel.blocks.items():
        free = [y for y in _absent_points(space, key) if not field.is_zero_at(space, y)]
        for extra in subsets(free):
            mats = [sign * field.at(space, y) for y in extra]
            new_key, new_block = ampliate_block(space, key, block, extra, mats, kernel.h_out, kernel.h_in)
            result[new_key] = result[new_key] + new_block if new_key in result else new_block
    return Kernel(space, result, kernel.h_out, kernel.h_in)


def meyer_transform(kernel: Kernel, field: QField) -> Kernel:
    """M(𝛖) = Σ_{ϑ⊆υ∘∘} T(υ₊⁻, υ∘⁻; υ₊∘, ϑ) ⊗ (−Q)⊗(υ∘∘∖ϑ)."""
    return _subset_transform(kernel, field, -1.0)


def mobius_transform(integrand: Kernel, field: QField) -> Kernel:
    """T(𝛝) = Σ_{υ⊆ϑ∘∘} M(ϑ₊⁻, ϑ∘⁻; ϑ₊∘, υ) ⊗ Q⊗(ϑ∘∘∖υ)."""
    return _subset_transform(integrand, field, 1.0)


def integrand_tensor_q(kernel: Kernel, field: QField) -> IntegrandKernel:
    """(M⊗Q⊗)(𝛖, 𝛞) = M(𝛖) ⊗ Q⊗(κ∘∘) when 𝛞 has only (∘,∘) points, else 0."""
    space = kernel.space
    field.validate(space)
    result: Dict[str, np.ndarray] = {}
    for key, block in kernel.blocks.items():
        free = [y for y in _absent_points(space, key) if not field.is_zero_at(space, y)]
        for extra in subsets(free):
            mats = [field.at(space, y) for y in extra]
            new_key, new_block = ampliate_block(space, key, block, extra, mats, kernel.h_out, kernel.h_in)
            pair = ''.join(ch.upper() if ch != ABSENT and key[pos] != ABSENT else ch
                           for pos, ch in enumerate(new_key))
            result[pair] = new_block
    return IntegrandKernel(space, result, kernel.h_out, kernel.h_in)


# Processes

class KernelProcess:
    """Kernel values T_t at every level 0..n, optionally backed by an integrand."""

    def __init__(self, space: PointSpace, levels: Sequence[Kernel],
                 integrand: Optional[IntegrandKernel] = None):
        if len(levels) != space.n + 1:
            raise DimensionMismatchError(f"a process on {space.n} points needs {space.n + 1} levels")
        self.space = space
        self.levels: List[Kernel] = list(levels)
        self.integrand = integrand
        self.h_out = self.levels[0].h_out
        self.h_in = self.levels[0].h_in

    @classmethod
    def from_integrand(cls, integrand: IntegrandKernel) -> 'KernelProcess':
        space = integrand.space
        levels = [counting_integral(integrand, space.level_time(k)) for k in range(space.n + 1)]
        return cls(space, levels, integrand)

    @classmethod
    def from_single_integrand(cls, initial: Kernel, integrand: SingleIntegrand) -> 'KernelProcess':
        space = integrand.space
        levels = [initial + single_counting_integral(integrand, space.level_time(k))
                  for k in range(space.n + 1)]
        return cls(space, levels)

    @classmethod
    def constant(cls, kernel: Kernel) -> 'KernelProcess':
        return cls(kernel.space, [kernel] * (kernel.space.n + 1))

    def at(self, t: float) -> Kernel:
        return self.levels[self.space.level(t)]

    def at_level(self, level: int) -> Kernel:
        return self.levels[level]

    def star(self) -> 'KernelProcess':
        return KernelProcess(self.space, [star_adjoint(k) for k in self.levels])

    def consistency_residual(self) -> float:
        """Largest deviation between stored levels and the integrand, if any."""
        if self.integrand is None:
            return 0.0
        return max(counting_integral(self.integrand, self.space.level_time(k)).distance(level)
                   for k, level in enumerate(self.levels))


def q_meyer_process_transform(process: KernelProcess, field: QField) -> List[Kernel]:
    """M_t = Q-Meyer transform of T_t at every level."""
    return [meyer_transform(kernel, field) for kernel in process.levels]


def q_mobius_process_inverse(integrands: Sequence[Kernel], field: QField) -> List[Kernel]:
    """T_t(𝛝) = Σ_{𝛖⊆𝛝ᵗ} M_t(𝛖) ⊗ Q⊗(𝛝∖𝛖), level by level."""
    result = []
    for level, integrand in enumerate(integrands):
        space = integrand.space
        result.append(counting_integral(integrand_tensor_q(integrand, field), space.level_time(level)))
    return result


def canonical_integrand(process: KernelProcess) -> IntegrandKernel:
    """Time-ordered integrand whose 𝛖 are initial segments of the table.

    M̃(first k points of 𝛝, rest) = F_k(𝛝) − F_{k−1}(𝛝), where F_k is the
    process just after the k-th point of 𝛝. Reproduces every process that
    is a counting integral.
    """
    space = process.space
    keys = sorted({key for level in process.levels for key in level.blocks})
    blocks: Dict[str, np.ndarray] = {}
    for key in keys:
        present = [pos for pos, ch in enumerate(key) if ch != ABSENT]
        previous = None
        for k in range(len(present) + 1):
            level = 0 if k == 0 else present[k - 1] + 1
            value = process.levels[level].block(key)
            diff = value if previous is None else value - previous
            previous = value
            if not np.any(diff):
                continue
            head = set(present[:k])
            pair = ''.join(ch.upper() if pos in head else ch for pos, ch in enumerate(key))
            blocks[pair] = diff
    return IntegrandKernel(space, blocks, process.h_out, process.h_in)


def is_null_integrand(integrand: IntegrandKernel, atol: float = 1e-12) -> bool:
    """True iff ν₀ᵗ(N) vanishes at every cut."""
    space = integrand.space
    for level in range(space.n + 1):
        if not counting_integral(integrand, space.level_time(level)).is_zero(atol):
            return False
    return True


# Q-adaptedness

@dataclass
class AdaptednessResult:
    adapted: bool
    witness: Optional[str] = None
    deviation: float = 0.0

    def __bool__(self) -> bool:
        return self.adapted


def is_q_adapted(target: Union[Kernel, KernelProcess], field: QField, t: float,
                 atol: float = 1e-10) -> AdaptednessResult:
    """Check T_t(𝛝) = T_t(𝛝ᵗ) ⊗ Q⊗(late ϑ∘∘) and T_t = 0 on late ϑ₊⁻, ϑ∘⁻, ϑ₊∘.

    On failure the result carries the first offending table key.
    """
    kernel = target.at(t) if isinstance(target, KernelProcess) else target
    space = kernel.space
    field.validate(space)
    late = [p.time >= t for p in space.points]
    for key in sorted(kernel.blocks):
        block = kernel.blocks[key]
        if any(late[pos] and ch in 'sac' for pos, ch in enumerate(key)):
            if np.any(np.abs(block) > atol):
                return AdaptednessResult(False, key, float(np.max(np.abs(block))))
            continue
        early_key = ''.join(ABSENT if late[pos] else ch for pos, ch in enumerate(key))
        late_n = tuple(p.index for pos, p in enumerate(space.points) if late[pos] and key[pos] == 'n')
        mats = [field.at(space, y) for y in late_n]
        _, expected = ampliate_block(space, early_key, kernel.block(early_key), late_n, mats,
                                     kernel.h_out, kernel.h_in)
        deviation = float(np.max(np.abs(block - expected))) if block.size else 0.0
        if deviation > atol:
            return AdaptednessResult(False, key, deviation)
        if key == early_key:
            free = [p.index for pos, p in enumerate(space.points) if late[pos] and key[pos] == ABSENT]
            for extra in subsets(free):
                if not extra:
                    continue
                new_key, amp = ampliate_block(space, key, block, extra,
                                              [field.at(space, y) for y in extra],
                                              kernel.h_out, kernel.h_in)
                deviation = float(np.max(np.abs(kernel.block(new_key) - amp))) if amp.size else 0.0
                if deviation > atol:
                    return AdaptednessResult(False, new_key, deviation)
    return AdaptednessResult(True)


def q_adapted_projection(kernel: Kernel, field: QField, t: float) -> Kernel:
    """The Q-adapted kernel agreeing with T on tables whose points all lie before t."""
    space = kernel.space
    field.validate(space)
    late = {p.index for p in space.points if p.time >= t}
    result: Dict[str, np.ndarray] = {}
    for key, block in kernel.blocks.items():
        if any(ch != ABSENT and space.points[pos].index in late for pos, ch in enumerate(key)):
            continue
        free = [y for y in _absent_points(space, key) if y in late and not field.is_zero_at(space, y)]
        for extra in subsets(free):
            new_key, new_block = ampliate_block(space, key, block, extra,
                                                [field.at(space, y) for y in extra],
                                                kernel.h_out, kernel.h_in)
            result[new_key] = new_block
    return Kernel(space, result, kernel.h_out, kernel.h_in)


# Germs of processes

def kernel_germ(kernel: Kernel, x: int, corner: Optional[Kernel] = None) -> GermMatrix:
    """Germ matrix of point splits of one kernel at x; corners default to its x-free part."""
    corner = x_free_part(kernel, x) if corner is None else corner
    entries = {(MINUS, MINUS): corner, (PLUS, PLUS): corner}
    for role, idx in ROLE_ENTRIES.items():
        split = point_split(kernel, role, x).kernel
        if split.blocks:
            entries[idx] = split
    return GermMatrix(kernel.space, x, entries, h=kernel.h_out)


def germ(process: KernelProcess, x: int) -> Tuple[GermMatrix, GermMatrix, GermMatrix]:
    """(𝐓(x), 𝐓₊(x), 𝐃(x)) built from T at t(x) and at the next cut.

    Both germs share the corners T_{t(x)} restricted to x-free tables, so
    𝐃 has zero corners.
    """
    space = process.space
    level = space.position(x)
    current = process.at_level(level)
    following = process.at_level(level + 1)
    corner = x_free_part(current, x)
    germ_t = kernel_germ(current, x, corner)
    germ_plus = kernel_germ(following, x, corner)
    return germ_t, germ_plus, germ_plus - germ_t


def corner_residual(process: KernelProcess, x: int) -> float:
    """Deviation between the x-free parts of T at t(x) and at the next cut."""
    level = process.space.position(x)
    return x_free_part(process.at_level(level), x).distance(x_free_part(process.at_level(level + 1), x))


def q_commutator_residual(process: KernelProcess, field: QField, x: int, chi: FockVector) -> float:
    """‖∇ₓ T_{t(x)} χ − (T ⊗ Q(x)) ∇ₓ χ‖ with T the x-free part of T_{t(x)}."""
    space = process.space
    kernel = process.at(space.time(x))
    lhs = point_evaluation(epsilon(kernel).apply(chi), x)
    shifted = tensor_point(x_free_part(kernel, x), field.at(space, x), x)
    rhs = epsilon(shifted).apply(point_evaluation(chi, x))
    return weighted_norm(lhs - rhs)


# Relative bound for counting integrals

@dataclass
class NormBoundResult:
    lhs: float
    rhs: float
    passed: bool
    hypothesis_ratio: float


def lemma2_norm_bound(integrand: IntegrandKernel, beta: WeightQuadruple, gamma: WeightQuadruple,
                      c: float, t: float, rtol: float = 1e-12) -> NormBoundResult:
    """‖ν₀ᵗ(M)‖_𝛂 ≤ c for α = β·1_{[0,t)} + γ, given ‖M(𝛖, ·)‖_𝛄 ≤ c β(𝛖).

    Raises PreconditionError when M violates the hypothesis.
    """
    space = integrand.space
    ratio = 0.0
    for key, block in integrand.blocks.items():
        norm = float(np.linalg.norm(block, 2)) if block.size else 0.0
        if norm == 0.0:
            continue
        upsilon, kappa = split_pair_key(key)
        denom = beta.of_key(upsilon) * gamma.of_key(kappa)
        if denom == 0.0:
            raise PreconditionError(f"integrand is nonzero at {key!r} where β·γ vanishes")
        ratio = max(ratio, norm / denom)
    if ratio > c * (1.0 + rtol):
        raise PreconditionError(f"integrand bound {ratio:.6g} exceeds c = {c:.6g}")

    early = np.array([1.0 if p.time < t else 0.0 for p in space.points])
    alpha = WeightQuadruple(
        beta.scalar * early + gamma.scalar,
        beta.annihilation * early + gamma.annihilation,
        beta.creation * early + gamma.creation,
        beta.number * early + gamma.number,
    )
    lhs = relative_norm(counting_integral(integrand, t), alpha)
    return NormBoundResult(lhs, c, lhs <= c * (1.0 + rtol), ratio)
