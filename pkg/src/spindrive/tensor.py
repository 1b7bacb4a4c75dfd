"""Labeled dense real tensors: contraction and truncated SVD.

This is the numerical substrate for the MPS/MPO machinery.  A tensor is a
real numpy array plus one distinct label per axis; contractions are requested
by label pairs, so callers never juggle axis numbers.  Element order is fixed
as row-major over the dimensions as listed, which makes serialized tensors
reproducible across runs and platforms.

Everything is float64 and immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DenseTensor", "SvdResult", "contract", "svd_split", "truncation_rank"]


class DenseTensor:
    """A real tensor with one label per axis.

    Labels are arbitrary hashable identifiers (strings in practice), unique
    within one tensor.  The wrapped array is marked read-only; operations
    return new tensors.
    """

    __slots__ = ("array", "labels")

    def __init__(self, array, labels):
        arr = np.array(array, dtype=np.float64, order="C")  # owning copy
        labels = tuple(labels)
        if arr.ndim != len(labels):
            raise ValueError(
                f"tensor has {arr.ndim} axes but {len(labels)} labels given"
            )
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique within one tensor: {labels}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor data contains NaN or Inf")
        arr.setflags(write=False)
        self.array = arr
        self.labels = labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the elements."""
        return self.array.reshape(-1)

    def axis(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"label {label!r} not found in {self.labels}") from None

    def relabel(self, mapping: dict) -> "DenseTensor":
        """Return the same tensor with labels renamed via `mapping`."""
        return DenseTensor(self.array, tuple(mapping.get(l, l) for l in self.labels))

    def permute(self, new_order) -> "DenseTensor":
        """Return the tensor with axes reordered to the given label order."""
        new_order = tuple(new_order)
        if set(new_order) != set(self.labels) or len(new_order) != len(self.labels):
            raise ValueError(f"{new_order} is not a permutation of {self.labels}")
        axes = [self.axis(l) for l in new_order]
        return DenseTensor(np.transpose(self.array, axes), new_order)

    def item(self) -> float:
        """Scalar value of a rank-0 tensor."""
        if self.array.ndim != 0:
            raise ValueError(f"tensor of rank {self.array.ndim} is not a scalar")
        return float(self.array)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def __repr__(self):
        return f"DenseTensor(dims={self.dims}, labels={self.labels})"


@dataclass(frozen=True)
class SvdResult:
    """Truncated SVD of a tensor split into row and column label groups.

    `left` carries the row labels plus the new bond label (columns
    orthonormal); `right` carries the bond label plus the column labels (rows
    orthonormal).  `truncation_error` is the discarded squared singular
    weight divided by the total squared weight.
    """

    left: DenseTensor
    singular_values: np.ndarray
    right: DenseTensor
    truncation_error: float


def contract(a: DenseTensor, b: DenseTensor, pairs) -> DenseTensor:
    """Contract `a` with `b` over the given (label_in_a, label_in_b) pairs.

    The result carries the uncontracted labels of `a` followed by those of
    `b`, in their original order.
    """
    pairs = list(pairs)
    axes_a = [a.axis(la) for la, _ in pairs]
    axes_b = [b.axis(lb) for _, lb in pairs]
    for (la, lb), ia, ib in zip(pairs, axes_a, axes_b):
        if a.dims[ia] != b.dims[ib]:
            raise ValueError(
                f"extent mismatch contracting {la!r} (={a.dims[ia]}) "
                f"with {lb!r} (={b.dims[ib]})"
            )
    out_labels = tuple(l for i, l in enumerate(a.labels) if i not in set(axes_a)) + tuple(
        l for i, l in enumerate(b.labels) if i not in set(axes_b)
    )
    if len(set(out_labels)) != len(out_labels):
        raise ValueError(f"contraction result would carry duplicate labels: {out_labels}")
    out = np.tensordot(a.array, b.array, axes=(axes_a, axes_b))
    return DenseTensor(out, out_labels)


def truncation_rank(s: np.ndarray, max_rank: int, cutoff: float) -> tuple[int, float]:
    """How many nonincreasing singular values to keep, and the error incurred.

    Keeps at most `max_rank` values; additionally drops the longest trailing
    run whose cumulative squared weight is below `cutoff` relative to the
    total squared weight.  At least one value is always kept.  The returned
    error is the discarded squared-weight fraction.
    """
    total = float(np.dot(s, s))
    if total == 0.0:
        return 1 if len(s) else 0, 0.0
    sq = s * s
    # tail[k] = squared weight discarded when keeping the first k values
    tail = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    keep_by_cutoff = len(s)
    for k in range(len(s) + 1):
        if tail[k] < cutoff * total:
            keep_by_cutoff = k
            break
    keep = max(1, min(max_rank, keep_by_cutoff, len(s)))
    return keep, float(tail[keep] / total)


def svd_split(
    t: DenseTensor,
    row_labels,
    max_rank: int,
    cutoff: float = 1e-10,
    bond_label="bond",
) -> SvdResult:
    """Split `t` by SVD with the given labels grouped as matrix rows.

    At most `max_rank` singular values are kept; additionally the longest
    trailing run of singular values whose cumulative squared weight is below
    `cutoff` (relative to the total squared weight) is dropped.  At least one
    singular value is always kept.
    """
    if max_rank < 1:
        raise ValueError(f"max_rank must be positive, got {max_rank}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff}")
    rows = set(row_labels)
    missing = rows - set(t.labels)
    if missing:
        raise ValueError(f"row labels {missing} not found in {t.labels}")
    if not rows or len(rows) == len(t.labels):
        raise ValueError("row_labels must be a nonempty strict subset of the labels")
    if bond_label in t.labels:
        raise ValueError(f"bond label {bond_label!r} collides with an existing label")

    row_order = [l for l in t.labels if l in rows]
    col_order = [l for l in t.labels if l not in rows]
    perm = t.permute(row_order + col_order)
    row_dims = perm.dims[: len(row_order)]
    col_dims = perm.dims[len(row_order) :]
    mat = perm.array.reshape(int(np.prod(row_dims)), int(np.prod(col_dims)))

    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    keep, error = truncation_rank(s, max_rank, cutoff)

    left = DenseTensor(
        u[:, :keep].reshape(row_dims + (keep,)), tuple(row_order) + (bond_label,)
    )
    right = DenseTensor(
        vh[:keep, :].reshape((keep,) + col_dims), (bond_label,) + tuple(col_order)
    )
    return SvdResult(left, s[:keep].copy(), right, error)
