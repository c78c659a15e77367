"""Semi-decompositions and their order-theoretic machinery.

A semi-decomposition assigns each point x a set F(x) containing x such that
membership nests: x in F(y) forces F(x) to be a subset of F(y).  Reading
"x in F(y)" as "x <= y" turns the two axioms into reflexivity and
transitivity, so semi-decompositions on n points are exactly pre-orders on
n points; ``from_preorder`` / ``to_preorder`` realize the bijection with
F(y) the downward closure of y.

The storage convention is ``member[y, x]`` meaning x in F(y), i.e. row y is
the set F(y); the induced pre-order matrix is its transpose.

Finite-space prolongation.  A net in a finite (Alexandroff) space converges
to x iff it is eventually inside the minimal open neighborhood of x, and a
constant net at z converges to y iff y lies in the closure of {z}.  Chasing
the two-net definition of the prolongation D(x) through those two facts
gives the closed form used here:

    D(x) = closure( union of F(x') over x' in min_open_nbhd(x) ).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AxiomViolation, SizeMismatch
from .relations import bool_mm, check_preorder, is_reflexive
from .spaces import (
    FiniteSpace,
    MetricSample,
    ball,
    closure_fin,
    eps_closure,
    min_open_nbhd,
)


@dataclass(frozen=True, eq=False)
class SemiDecomposition:
    """Map F: X -> 2^X with reflexive membership and nested elements."""

    member: np.ndarray   # member[y, x] means x in F(y)

    @property
    def n(self) -> int:
        return self.member.shape[0]

    def __post_init__(self):
        self.member.setflags(write=False)

    def element(self, x: int) -> np.ndarray:
        """F(x) as a bool mask."""
        return self.member[x].copy()

    @cached_property
    def is_decomposition(self) -> bool:
        """True when the elements partition the space (member is symmetric)."""
        return bool(np.array_equal(self.member, self.member.T))

    def __eq__(self, other):
        return isinstance(other, SemiDecomposition) and np.array_equal(
            self.member, other.member
        )

    def __hash__(self):
        return hash(self.member.tobytes())

    def __repr__(self):
        return f"SemiDecomposition(n={self.n})"


@dataclass(frozen=True)
class ClassPartition:
    """Partition of points by equality of element closures."""

    classes: tuple            # tuple of tuples of point indices
    representatives: tuple    # one representative per class, ascending
    projection: tuple         # point index -> class index

    def class_of(self, x: int) -> tuple:
        return self.classes[self.projection[x]]


@dataclass(frozen=True, eq=False)
class Relation:
    """A plain subset of X x X, stored as a bool matrix."""

    pairs: np.ndarray

    @property
    def n(self) -> int:
        return self.pairs.shape[0]

    def __post_init__(self):
        self.pairs.setflags(write=False)

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.pairs, self.pairs.T))

    @property
    def is_transitive(self) -> bool:
        return not (bool_mm(self.pairs, self.pairs) & ~self.pairs).any()

    def as_pair_list(self) -> list[tuple[int, int]]:
        return [tuple(map(int, p)) for p in np.argwhere(self.pairs)]

    def __eq__(self, other):
        return isinstance(other, Relation) and np.array_equal(self.pairs, other.pairs)

    def __repr__(self):
        return f"Relation(n={self.n}, pairs={len(np.argwhere(self.pairs))})"


def make_semidecomposition(member) -> SemiDecomposition:
    """Validate both axioms; failures carry the offending (x, y) pair."""
    A = np.asarray(member)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise AxiomViolation(f"member must be square, got shape {A.shape}")
    A = A.astype(bool).copy()
    if not is_reflexive(A):
        x = int(np.flatnonzero(~np.diagonal(A))[0])
        raise AxiomViolation(f"reflexivity fails: {x} not in F({x})", witness=(x, x))
    # nesting: x in F(y) must force F(x) subset of F(y)
    for y in range(A.shape[0]):
        members = np.flatnonzero(A[y])
        bad = members[(A[members] & ~A[y]).any(axis=1)]
        if bad.size:
            x = int(bad[0])
            raise AxiomViolation(
                f"nesting fails: {x} in F({y}) but F({x}) is not a subset of F({y})",
                witness=(x, y),
            )
    return SemiDecomposition(A)


def from_preorder(leq) -> SemiDecomposition:
    """F(y) = downward closure of y in the given pre-order."""
    L = check_preorder(np.asarray(leq), name="leq")
    return SemiDecomposition(L.T.copy())


def to_preorder(F: SemiDecomposition) -> np.ndarray:
    """The pre-order x <= y iff x in F(y); inverse of ``from_preorder``."""
    return F.member.T.copy()


def singleton_semidecomposition(n: int) -> SemiDecomposition:
    return SemiDecomposition(np.eye(n, dtype=bool))


def total_semidecomposition(n: int) -> SemiDecomposition:
    return SemiDecomposition(np.ones((n, n), dtype=bool))


def saturation(F: SemiDecomposition, A) -> np.ndarray:
    """Union of F(x) over x in A."""
    a = np.asarray(A)
    if a.dtype != bool:
        mask = np.zeros(F.n, dtype=bool)
        idx = a.astype(int).ravel()
        if idx.size:
            mask[idx] = True
        a = mask
    return bool_mm(a[None, :], F.member).ravel()


def is_invariant(F: SemiDecomposition, A) -> bool:
    a = np.asarray(A)
    if a.dtype != bool:
        mask = np.zeros(F.n, dtype=bool)
        idx = a.astype(int).ravel()
        if idx.size:
            mask[idx] = True
        a = mask
    return bool(np.array_equal(saturation(F, a), a))


def _check_sizes(F: SemiDecomposition, S: FiniteSpace):
    if F.n != S.n:
        raise SizeMismatch(f"semi-decomposition on {F.n} points, space on {S.n}")


def element_closure(F: SemiDecomposition, S: FiniteSpace, x: int) -> np.ndarray:
    _check_sizes(F, S)
    return closure_fin(S, F.member[x])


def element_closures(F: SemiDecomposition, S: FiniteSpace) -> np.ndarray:
    """All element closures at once; row x is the closure of F(x)."""
    _check_sizes(F, S)
    return bool_mm(F.member, S.leq.T)


def element_class(F: SemiDecomposition, S: FiniteSpace, x: int) -> np.ndarray:
    C = element_closures(F, S)
    return (C == C[x]).all(axis=1)


def class_partition(F: SemiDecomposition, S: FiniteSpace) -> ClassPartition:
    """Group points by equal element closures (always an equivalence)."""
    C = element_closures(F, S)
    classes, reps, proj = [], [], [None] * F.n
    for x in range(F.n):
        if proj[x] is not None:
            continue
        mask = (C == C[x]).all(axis=1)
        ci = len(classes)
        classes.append(tuple(int(i) for i in np.flatnonzero(mask)))
        reps.append(x)
        for i in np.flatnonzero(mask):
            proj[int(i)] = ci
    return ClassPartition(
        classes=tuple(classes), representatives=tuple(reps), projection=tuple(proj)
    )


def prolongation_fin(F: SemiDecomposition, S: FiniteSpace, x: int) -> np.ndarray:
    """D(x) on the finite backend: closure(F(min_open_nbhd(x)))."""
    _check_sizes(F, S)
    return closure_fin(S, saturation(F, min_open_nbhd(S, x)))


def prolongations(F: SemiDecomposition, S: FiniteSpace) -> np.ndarray:
    """All prolongations at once; row x is D(x)."""
    _check_sizes(F, S)
    return bool_mm(bool_mm(S.leq, F.member), S.leq.T)


def prolongation_metric(F: SemiDecomposition, M: MetricSample, x: int, eps: float) -> np.ndarray:
    """Scale-eps prolongation: eps-closure of F(ball(x, eps))."""
    if F.n != M.m:
        raise SizeMismatch(f"semi-decomposition on {F.n} points, sample on {M.m}")
    eps = M.require_scale(eps)
    return eps_closure(M, saturation(F, ball(M, x, eps)), eps)


def element_closure_relation(F: SemiDecomposition, space) -> Relation:
    """R = {(x, y) : y in closure(F(x))}; exact on the finite backend.

    On a metric sample the closure is the eps-closure at the finest ladder
    scale; per-scale variants are available through
    ``element_closure_relation_at_scale``.
    """
    if isinstance(space, FiniteSpace):
        return Relation(element_closures(F, space))
    return element_closure_relation_at_scale(F, space, float(space.scales[-1]))


def element_closure_relation_at_scale(
    F: SemiDecomposition, M: MetricSample, eps: float
) -> Relation:
    if F.n != M.m:
        raise SizeMismatch(f"semi-decomposition on {F.n} points, sample on {M.m}")
    R = np.zeros((F.n, F.n), dtype=bool)
    for x in range(F.n):
        R[x] = eps_closure(M, F.member[x], eps)
    return Relation(R)
