"""Boolean-relation primitives used by the finite backend.

Relations are numpy bool arrays of shape (n, n). The composition of two
relations is a boolean matrix product; all topological primitives on finite
spaces reduce to such products.
"""
from __future__ import annotations

import numpy as np

from .errors import NotAPreorder


def as_bool_matrix(rel, name="relation") -> np.ndarray:
    A = np.asarray(rel)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotAPreorder(f"{name} must be a square matrix, got shape {A.shape}")
    return A.astype(bool)


def bool_mm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Boolean matrix product: out[i,j] = OR_k A[i,k] and B[k,j]."""
    return (A.astype(np.uint8) @ B.astype(np.uint8)) > 0


def is_reflexive(A: np.ndarray) -> bool:
    return bool(np.diagonal(A).all())


def reflexivity_witness(A: np.ndarray):
    missing = np.flatnonzero(~np.diagonal(A))
    return (int(missing[0]),) if missing.size else None


def transitivity_witness(A: np.ndarray):
    """Return (x, y, z) with x<=y, y<=z but not x<=z, or None."""
    bad = bool_mm(A, A) & ~A
    if not bad.any():
        return None
    x, z = map(int, np.argwhere(bad)[0])
    y = int(np.flatnonzero(A[x] & A[:, z])[0])
    return (x, y, z)


def is_preorder(A: np.ndarray) -> bool:
    return is_reflexive(A) and transitivity_witness(A) is None


def check_preorder(A: np.ndarray, name="relation") -> np.ndarray:
    A = as_bool_matrix(A, name)
    w = reflexivity_witness(A)
    if w is not None:
        raise NotAPreorder(f"{name} is not reflexive at point {w[0]}", witness=w)
    w = transitivity_witness(A)
    if w is not None:
        raise NotAPreorder(
            f"{name} is not transitive: {w[0]}<={w[1]} and {w[1]}<={w[2]} "
            f"but not {w[0]}<={w[2]}",
            witness=w,
        )
    return A


def transitive_closure(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    C = A | np.eye(n, dtype=bool)
    while True:
        nxt = C | bool_mm(C, C)
        if np.array_equal(nxt, C):
            return C
        C = nxt


def subsets_matrix(n: int) -> np.ndarray:
    """All 2^n subsets of range(n) as a (2^n, n) bool matrix, bit i = point i."""
    masks = np.arange(1 << n, dtype=np.uint32)
    return (masks[:, None] >> np.arange(n)) & 1 > 0


def set_to_indices(member_row: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(member_row))


def indices_to_set(indices, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=bool)
    idx = list(indices)
    if idx:
        out[idx] = True
    return out
