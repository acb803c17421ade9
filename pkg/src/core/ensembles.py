"""Seeded random kernels, integrands, Q fields and vectors for the suites."""

import logging
import zlib
from dataclasses import dataclass
from itertools import product
from typing import Dict, Optional, Sequence, Union

import numpy as np

from src.core.chainspace import ABSENT, PointSpace, enumerate_chains, enumerate_table_keys
from src.core.calculus import KernelProcess, SingleIntegrand, q_adapted_projection
from src.core.fock import FockVector, QField, fock_layout
from src.core.kernel import IntegrandKernel, Kernel, WeightQuadruple, block_shape
from src.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator]

Q_FIELD_KINDS = ('identity', 'zero', 'projector', 'scalar', 'random')


def derive_rng(base_seed: int, suite: str, index: int) -> np.random.Generator:
    """Independent stream per (base seed, suite, seed index)."""
    return np.random.default_rng(np.random.SeedSequence([base_seed, zlib.crc32(suite.encode()), index]))


def as_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def disc(rng: np.random.Generator, shape, magnitude: float = 1.0) -> np.ndarray:
    """Complex entries uniform on the disc of the given radius."""
    radius = magnitude * np.sqrt(rng.random(shape))
    angle = rng.uniform(0.0, 2.0 * np.pi, shape)
    return radius * np.exp(1j * angle)


def _check_density(density: float):
    if not 0.0 < density <= 1.0:
        raise PreconditionError(f"density must lie in (0, 1], got {density}")


def random_kernel(space: PointSpace, seed: Seed, density: float = 0.5, magnitude: float = 1.0,
                  max_points: Optional[int] = None, h_out: Optional[int] = None,
                  h_in: Optional[int] = None, roles: str = 'sacn') -> Kernel:
    """Sparse kernel: each table kept with probability `density`, entries on a disc."""
    _check_density(density)
    rng = as_rng(seed)
    h_out = space.initial_dim if h_out is None else h_out
    h_in = space.initial_dim if h_in is None else h_in
    blocks = {}
    for key in enumerate_table_keys(space):
        if any(ch != ABSENT and ch not in roles for ch in key):
            continue
        if max_points is not None and sum(ch != ABSENT for ch in key) > max_points:
            continue
        if rng.random() >= density:
            continue
        if magnitude == 0.0:
            continue
        blocks[key] = disc(rng, block_shape(space, key, h_out, h_in), magnitude)
    return Kernel(space, blocks, h_out, h_in)


def random_integrand(space: PointSpace, seed: Seed, density: float = 0.3, magnitude: float = 1.0,
                     max_points: Optional[int] = None) -> IntegrandKernel:
    """Sparse integrand over disjoint pairs (𝛖, 𝛞)."""
    _check_density(density)
    rng = as_rng(seed)
    h = space.initial_dim
    blocks = {}
    for chars in product('.sacnSACN', repeat=space.n):
        key = ''.join(chars)
        if max_points is not None and sum(ch != ABSENT for ch in key) > max_points:
            continue
        if rng.random() >= density or magnitude == 0.0:
            continue
        blocks[key] = disc(rng, block_shape(space, key.lower(), h, h), magnitude)
    return IntegrandKernel(space, blocks, h, h)


def random_single_integrand(space: PointSpace, seed: Seed, density: float = 0.5,
                            magnitude: float = 1.0, roles: str = 'sacn',
                            max_points: Optional[int] = None) -> SingleIntegrand:
    rng = as_rng(seed)
    h = space.initial_dim
    integrand = SingleIntegrand(space, h_out=h, h_in=h)
    for p in space.points:
        reduced = space.without(p.index)
        for role in roles:
            h_out = h * p.multiplicity if role in 'cn' else h
            h_in = h * p.multiplicity if role in 'an' else h
            kernel = random_kernel(reduced, rng, density, magnitude, max_points, h_out, h_in)
            integrand.set(role, p.index, kernel)
    return integrand


@dataclass(frozen=True)
class QFieldSpec:
    """identity | zero | projector(rank) | scalar(value) | random."""
    kind: str = 'projector'
    rank: int = 1
    value: complex = 2.0

    def __post_init__(self):
        if self.kind not in Q_FIELD_KINDS:
            raise PreconditionError(f"unknown Q field kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == 'projector':
            return f"projector({self.rank})"
        if self.kind == 'scalar':
            return f"scalar({self.value})"
        return self.kind


def random_projector(rng: np.random.Generator, d: int, rank: int) -> np.ndarray:
    """Orthoprojector onto a seeded random subspace of dimension min(rank, d)."""
    rank = max(0, min(rank, d))
    frame, _ = np.linalg.qr(disc(rng, (d, d)) + 1e-3 * np.eye(d))
    basis = frame[:, :rank]
    return basis @ basis.conj().T


def make_q_field(space: PointSpace, spec: QFieldSpec, seed: Seed = 0) -> QField:
    rng = as_rng(seed)
    if spec.kind == 'identity':
        return QField.identity(space)
    if spec.kind == 'zero':
        return QField.zero(space)
    if spec.kind == 'scalar':
        return QField.scalar(space, spec.value)
    if spec.kind == 'projector':
        return QField(tuple(random_projector(rng, p.multiplicity, spec.rank) for p in space.points))
    return QField(tuple(disc(rng, (p.multiplicity, p.multiplicity)) for p in space.points))


def random_vector(space: PointSpace, seed: Seed, h: Optional[int] = None,
                  magnitude: float = 1.0) -> FockVector:
    rng = as_rng(seed)
    layout = fock_layout(space, h)
    return FockVector(space, disc(rng, layout.dim, magnitude), layout.h)


def random_quadruple(space: PointSpace, seed: Seed, low: float = 0.1, high: float = 1.0,
                     number_cap: Optional[Sequence[float]] = None) -> WeightQuadruple:
    """Positive quadruple; α∘∘ is capped by number_cap when given."""
    rng = as_rng(seed)
    draws = {role: rng.uniform(low, high, space.n) for role in 'sacn'}
    if number_cap is not None:
        draws['n'] = np.minimum(draws['n'], np.asarray(number_cap, dtype=float))
    return WeightQuadruple(draws['s'], draws['a'], draws['c'], draws['n'])


def random_initial(seed: Seed, h: int, magnitude: float = 1.0) -> np.ndarray:
    return disc(as_rng(seed), (h, h), magnitude)


def random_chain_function(space: PointSpace, seed: Seed) -> Dict[tuple, complex]:
    """Complex values on disjoint chain pairs, keyed by (υ, κ)."""
    rng = as_rng(seed)
    chains = enumerate_chains(space)
    values = {}
    for upsilon in chains:
        for kappa in chains:
            if not set(upsilon).intersection(kappa):
                values[(upsilon, kappa)] = complex(disc(rng, ()))
    return values


def q_adapted_process(space: PointSpace, field: QField, seed: Seed, density: float = 0.5,
                      magnitude: float = 1.0, roles: str = 'sacn') -> KernelProcess:
    """T_0 = A ⊗ Q⊗ plus a single integrand whose D(x) is Q-adapted at t(x).

    The resulting process is Q-adapted at every cut.
    """
    rng = as_rng(seed)
    h = space.initial_dim
    empty = Kernel(space, {ABSENT * space.n: disc(rng, (h, h), magnitude)}, h, h)
    first = space.points[0].time if space.n else 0.0
    initial = q_adapted_projection(empty, field, first)
    integrand = random_single_integrand(space, rng, density, magnitude, roles)
    for (role, x), kernel in list(integrand.entries.items()):
        reduced = space.without(x)
        integrand.set(role, x, q_adapted_projection(kernel, field.restricted(space, reduced), space.time(x)))
    return KernelProcess.from_single_integrand(initial, integrand)
