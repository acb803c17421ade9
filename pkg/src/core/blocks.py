"""Tensor-factor bookkeeping for dense blocks.

A block is a matrix whose rows and columns are tensor products of labelled
factors. Labels are point ids for the 𝔨ₓ factors and 'h' for the initial
space; factors are stored in ascending time order with 'h' last.
"""

from functools import reduce
from typing import Hashable, List, Sequence, Tuple

import numpy as np

from src.utils.errors import DimensionMismatchError

Axis = Tuple[Hashable, int]

INITIAL = 'h'


def axes_for(space, chain: Sequence[int], h: int, extra: Sequence[Axis] = ()) -> List[Axis]:
    """Axes of 𝔨⊗(chain) ⊗ extra ⊗ 𝔥 in canonical order."""
    return [(x, space.multiplicity(x)) for x in chain] + list(extra) + [(INITIAL, h)]


def axes_dim(axes: Sequence[Axis]) -> int:
    dim = 1
    for _, d in axes:
        dim *= d
    return dim


def permute_block(block: np.ndarray, out_axes: Sequence[Axis], in_axes: Sequence[Axis],
                  new_out: Sequence[Axis], new_in: Sequence[Axis]) -> np.ndarray:
    """Reorder the tensor factors on both sides of a block.

    Labels are matched by name; the dimensions of a label must agree between
    the old and the new layout.
    """
    if block.shape != (axes_dim(out_axes), axes_dim(in_axes)):
        raise DimensionMismatchError(
            f"block of shape {block.shape} does not match axes {list(out_axes)} x {list(in_axes)}")
    out_labels = [label for label, _ in out_axes]
    in_labels = [label for label, _ in in_axes]
    try:
        perm = ([out_labels.index(label) for label, _ in new_out]
                + [len(out_axes) + in_labels.index(label) for label, _ in new_in])
    except ValueError as e:
        raise DimensionMismatchError(f"cannot relabel block axes: {e}") from None
    if sorted(perm) != list(range(len(out_axes) + len(in_axes))):
        raise DimensionMismatchError("relabelling must use every axis exactly once")
    dims = [d for _, d in out_axes] + [d for _, d in in_axes]
    for k, (_, d) in zip(perm, list(new_out) + list(new_in)):
        if dims[k] != d:
            raise DimensionMismatchError(f"axis dimension changed from {dims[k]} to {d}")
    tensor = block.reshape(dims).transpose(perm)
    return tensor.reshape(axes_dim(new_out), axes_dim(new_in))


def permute_vector(vector: np.ndarray, axes: Sequence[Axis], new_axes: Sequence[Axis]) -> np.ndarray:
    return permute_block(vector.reshape(-1, 1), axes, [], new_axes, []).reshape(-1)


def kron_all(matrices: Sequence[np.ndarray], dtype=complex) -> np.ndarray:
    if not matrices:
        return np.ones((1, 1), dtype=dtype)
    return reduce(np.kron, matrices)
