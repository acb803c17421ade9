"""The ε-representation of kernels as operators on 𝔥⊗F."""

import logging
from typing import Optional

import numpy as np

from src.core.chainspace import chain_weight, key_chain, key_input_chain, key_output_chain
from src.core.fock import FockOperator, fock_layout, frobenius_distance
from src.core.kernel import Kernel, kernel_product, star_adjoint, unit_kernel

logger = logging.getLogger(__name__)


def epsilon(kernel: Kernel) -> FockOperator:
    """[ε(T)χ](ϑ) = Σ_{ϑ∘∘⊔ϑ₊∘=ϑ} Σ w(ϑ∘⁻) w(ϑ₊⁻) T(𝛝) χ(ϑ∘∘⊔ϑ∘⁻).

    The integration chains are disjoint from ϑ and from each other, so every
    table contributes exactly one weighted block, placed between the sectors
    of its input and output chains.
    """
    space = kernel.space
    out_layout = fock_layout(space, kernel.h_out)
    in_layout = fock_layout(space, kernel.h_in)
    matrix = np.zeros((out_layout.dim, in_layout.dim), dtype=complex)
    for key, block in kernel.blocks.items():
        coef = chain_weight(space, key_chain(space, key, 'sa'))
        rows = out_layout.sector(key_output_chain(space, key))
        cols = in_layout.sector(key_input_chain(space, key))
        matrix[rows, cols] += coef * block
    return FockOperator(space, matrix, kernel.h_out, kernel.h_in)


def epsilon_adjoint_residual(kernel: Kernel) -> float:
    """‖ε(T)* − ε(T⋆)‖_F."""
    return frobenius_distance(epsilon(kernel).adjoint(), epsilon(star_adjoint(kernel)))


def epsilon_homomorphism_residual(x: Kernel, y: Kernel, point_mass: bool = True) -> float:
    """‖ε(X)ε(Y) − ε(X·Y)‖_F."""
    lhs = epsilon(x).compose(epsilon(y))
    rhs = epsilon(kernel_product(x, y, point_mass=point_mass))
    return frobenius_distance(lhs, rhs)


def epsilon_unit_residual(space, h: Optional[int] = None) -> float:
    """‖ε(Î) − I‖_F."""
    unit = epsilon(unit_kernel(space, h))
    return frobenius_distance(unit, FockOperator.identity(space, unit.h_out))
