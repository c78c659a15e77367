"""Finite topological spaces and finite metric samples.

Finite spaces are stored as their specialization pre-order: ``leq[x, y]``
means x is a specialization of y, i.e. x lies in the closure of {y}.  Open
sets are exactly the up-sets of this pre-order, closed sets the down-sets,
and the closure of A is its downward closure.  Every finite topology arises
this way, so all topological primitives below are relational computations.

Metric samples are finite point clouds with an explicit symmetric distance
matrix, a decreasing scale ladder, and a comparison tolerance.  They are the
approximate backend: verdicts against them are always taken at a ladder
scale.  Closures use the non-strict form {y : d(y, A) <= eps}; the strict
form would only shift thresholds on a finite sample, and every report
records the convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    EmptySet,
    NotAPartition,
    PointOutOfRange,
    ScaleNotInLadder,
    SizeOverflow,
    ValidationError,
)
from .relations import bool_mm, check_preorder, indices_to_set, subsets_matrix

PRODUCT_POINT_BOUND = 4096
ENUMERATION_BOUND = 16  # 2^n subsets are enumerated for separation axioms

DEFAULT_TRIANGLE_TOL = 1e-9
DEFAULT_LADDER_EXPONENTS = range(2, 11)  # eps_k = diam / 2^k


# ---------------------------------------------------------------------------
# finite backend
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """A finite topological space given by its specialization pre-order."""

    leq: np.ndarray

    @property
    def n(self) -> int:
        return self.leq.shape[0]

    def __post_init__(self):
        self.leq.setflags(write=False)

    @cached_property
    def up_sets(self) -> np.ndarray:
        """All open sets as a (k, n) bool matrix (rows are up-sets of leq)."""
        if self.n > ENUMERATION_BOUND:
            raise SizeOverflow(f"open-set enumeration capped at n={ENUMERATION_BOUND}")
        subs = subsets_matrix(self.n)
        up_closed = bool_mm(subs, self.leq)  # {y : exists x in A with x <= y}
        return subs[(up_closed == subs).all(axis=1)]

    @cached_property
    def down_sets(self) -> np.ndarray:
        """All closed sets as a (k, n) bool matrix (rows are down-sets)."""
        if self.n > ENUMERATION_BOUND:
            raise SizeOverflow(f"closed-set enumeration capped at n={ENUMERATION_BOUND}")
        subs = subsets_matrix(self.n)
        down_closed = bool_mm(subs, self.leq.T)  # {z : exists a in A with z <= a}
        return subs[(down_closed == subs).all(axis=1)]

    def is_open(self, A) -> bool:
        a = _as_point_set(self, A)
        return bool(np.array_equal(bool_mm(a[None, :], self.leq).ravel(), a))

    def is_closed(self, A) -> bool:
        a = _as_point_set(self, A)
        return bool(np.array_equal(bool_mm(a[None, :], self.leq.T).ravel(), a))

    def __eq__(self, other):
        return isinstance(other, FiniteSpace) and np.array_equal(self.leq, other.leq)

    def __hash__(self):
        return hash(self.leq.tobytes())

    def __repr__(self):
        return f"FiniteSpace(n={self.n})"


@dataclass(frozen=True)
class SeparationFlags:
    t0: bool
    t1: bool
    hausdorff: bool
    regular: bool
    normal: bool
    completely_regular_skipped: bool = True

    def as_dict(self) -> dict:
        return {
            "t0": self.t0,
            "t1": self.t1,
            "hausdorff": self.hausdorff,
            "regular": self.regular,
            "normal": self.normal,
            "completely_regular_skipped": self.completely_regular_skipped,
        }


def _as_point_set(S: FiniteSpace, A) -> np.ndarray:
    """Normalize a subset given as indices or a bool mask to a bool mask."""
    arr = np.asarray(A)
    if arr.dtype == bool:
        if arr.shape != (S.n,):
            raise PointOutOfRange(f"mask length {arr.shape} != point count {S.n}")
        return arr.astype(bool)
    idx = arr.astype(int).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= S.n):
        raise PointOutOfRange(f"point index out of range 0..{S.n - 1}: {idx}")
    return indices_to_set(idx, S.n)


def make_finite_space(n: int, leq) -> FiniteSpace:
    """Validate an n x n specialization pre-order and wrap it as a space."""
    A = np.asarray(leq)
    if A.shape != (n, n):
        raise ValidationError(f"leq must be {n}x{n}, got {A.shape}")
    return FiniteSpace(check_preorder(A.astype(bool).copy(), name="leq"))


def discrete_space(n: int) -> FiniteSpace:
    return FiniteSpace(np.eye(n, dtype=bool))


def sierpinski_space() -> FiniteSpace:
    """Two points with 0 in the closure of {1}; opens are {}, {1}, {0,1}."""
    leq = np.eye(2, dtype=bool)
    leq[0, 1] = True
    return FiniteSpace(leq)


def closure_fin(S: FiniteSpace, A) -> np.ndarray:
    """Downward closure of A: the smallest closed superset."""
    a = _as_point_set(S, A)
    return bool_mm(S.leq[:, :], a[:, None]).ravel() if a.any() else a.copy()


def min_open_nbhd(S: FiniteSpace, x: int) -> np.ndarray:
    """The up-set of x: the intersection of all open sets containing x."""
    if not 0 <= x < S.n:
        raise PointOutOfRange(f"point {x} out of range 0..{S.n - 1}")
    return S.leq[x].copy()


def product(S1: FiniteSpace, S2: FiniteSpace, max_points: int = PRODUCT_POINT_BOUND) -> FiniteSpace:
    """Product space; point (i, j) gets index i * S2.n + j, order componentwise."""
    n = S1.n * S2.n
    if n > max_points:
        raise SizeOverflow(f"product would have {n} > {max_points} points")
    leq = (S1.leq[:, None, :, None] & S2.leq[None, :, None, :]).reshape(n, n)
    return FiniteSpace(leq)


@dataclass(frozen=True, eq=False)
class Quotient:
    space: FiniteSpace
    projection: np.ndarray          # point index -> class index
    parts: tuple                    # tuple of tuples of point indices

    def __post_init__(self):
        self.projection.setflags(write=False)


def quotient(S: FiniteSpace, parts) -> Quotient:
    """Quotient by a partition; open downstairs iff the preimage is open.

    The quotient topology is re-encoded as a specialization pre-order on the
    classes: P <= Q iff every open whose preimage is open and which contains
    P also contains Q.
    """
    parts = tuple(tuple(sorted(int(i) for i in p)) for p in parts)
    seen = np.zeros(S.n, dtype=bool)
    for p in parts:
        if not p:
            raise NotAPartition("empty part")
        for i in p:
            if not 0 <= i < S.n:
                raise NotAPartition(f"point {i} out of range")
            if seen[i]:
                raise NotAPartition(f"point {i} appears in two parts")
            seen[i] = True
    if not seen.all():
        raise NotAPartition(f"points {np.flatnonzero(~seen).tolist()} not covered")

    k = len(parts)
    proj = np.empty(S.n, dtype=int)
    for ci, p in enumerate(parts):
        for i in p:
            proj[i] = ci
    # saturated opens: opens of S that are unions of parts
    part_mat = np.zeros((k, S.n), dtype=bool)
    for ci, p in enumerate(parts):
        part_mat[ci, list(p)] = True
    ups = S.up_sets
    saturated = ups[(bool_mm(bool_mm(ups, part_mat.T), part_mat) == ups).all(axis=1)]
    leq_q = np.ones((k, k), dtype=bool)
    for V in saturated:
        has = part_mat[:, V.nonzero()[0]].any(axis=1) if V.any() else np.zeros(k, bool)
        # class P in V but Q not in V kills P <= Q
        leq_q &= ~(has[:, None] & ~has[None, :])
    return Quotient(space=FiniteSpace(leq_q), projection=proj, parts=parts)


def separation_axioms(S: FiniteSpace) -> SeparationFlags:
    """Definitional separation flags from enumerating opens and closed sets."""
    n = S.n
    ups = S.up_sets
    downs = S.down_sets
    t0 = all(
        any(U[x] != U[y] for U in ups)
        for x in range(n) for y in range(x + 1, n)
    )
    singleton_closed = [S.is_closed([x]) for x in range(n)]
    t1 = all(singleton_closed)
    hausdorff = all(
        _separated_by_disjoint_opens(ups, indices_to_set([x], n), indices_to_set([y], n))
        for x in range(n) for y in range(x + 1, n)
    )
    regular = all(
        _separated_by_disjoint_opens(ups, F, indices_to_set([x], n))
        for F in downs
        for x in range(n)
        if not F[x]
    )
    normal = all(
        _separated_by_disjoint_opens(ups, F, G)
        for i, F in enumerate(downs)
        for G in downs[i + 1:]
        if not (F & G).any()
    )
    return SeparationFlags(t0=t0, t1=t1, hausdorff=hausdorff, regular=regular, normal=normal)


def _separated_by_disjoint_opens(ups: np.ndarray, A: np.ndarray, B: np.ndarray) -> bool:
    covers_a = ups[~(A & ~ups).any(axis=1)]
    covers_b = ups[~(B & ~ups).any(axis=1)]
    if not len(covers_a) or not len(covers_b):
        return False
    return bool((~bool_mm(covers_a, covers_b.T)).any())


# ---------------------------------------------------------------------------
# metric backend
# ---------------------------------------------------------------------------

class CoordMetric:
    """Distance on raw coordinates, for iterating formula generators exactly."""

    def pairwise(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class EuclideanMetric(CoordMetric):
    def pairwise(self, P, Q):
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        return np.sqrt(((P[:, None, :] - Q[None, :, :]) ** 2).sum(axis=-1))


class CubicMetric(CoordMetric):
    """1-d image metric d(x, y) = |x^3 - y^3| (pullback of |.| under x -> x^3)."""

    def pairwise(self, P, Q):
        p = np.asarray(P, dtype=float).reshape(-1) ** 3
        q = np.asarray(Q, dtype=float).reshape(-1) ** 3
        return np.abs(p[:, None] - q[None, :])


class TorusMetric(CoordMetric):
    """Flat metric on a product of circles with the given periods."""

    def __init__(self, periods):
        self.periods = np.asarray(periods, dtype=float)

    def pairwise(self, P, Q):
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        out = np.empty((P.shape[0], Q.shape[0]))
        step = max(1, int(2 ** 24 / max(1, Q.shape[0])))  # bound temporaries
        for s in range(0, P.shape[0], step):
            diff = np.abs(P[s:s + step, None, :] - Q[None, :, :]) % self.periods
            diff = np.minimum(diff, self.periods - diff)
            out[s:s + step] = np.sqrt((diff ** 2).sum(axis=-1))
        return out


class CircleMetric(CoordMetric):
    """Arc-length metric on a circle of the given circumference."""

    def __init__(self, circumference):
        self.circumference = float(circumference)

    def pairwise(self, P, Q):
        p = np.asarray(P, dtype=float).reshape(-1)
        q = np.asarray(Q, dtype=float).reshape(-1)
        diff = np.abs(p[:, None] - q[None, :]) % self.circumference
        return np.minimum(diff, self.circumference - diff)


COORD_METRICS = {
    "euclidean": EuclideanMetric,
    "cubic": CubicMetric,
}


@dataclass(frozen=True, eq=False)
class MetricSample:
    """Finite point cloud with an explicit metric and a scale ladder."""

    dist: np.ndarray                      # (m, m) symmetric, zero diagonal
    scales: np.ndarray                    # strictly decreasing, positive
    tol: float = DEFAULT_TRIANGLE_TOL
    points: np.ndarray | None = None      # (m, d) coordinates when available
    metric: str = "matrix"
    coord_metric: CoordMetric | None = field(default=None, compare=False)
    snapper: object | None = field(default=None, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def m(self) -> int:
        return self.dist.shape[0]

    def __post_init__(self):
        self.dist.setflags(write=False)
        self.scales.setflags(write=False)
        if self.points is not None:
            self.points.setflags(write=False)

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max())

    @cached_property
    def mesh(self) -> float:
        """Smallest positive pairwise distance (sample resolution)."""
        m = self.m
        if m < 2:
            return 0.0
        off = self.dist[~np.eye(m, dtype=bool)]
        pos = off[off > 0]
        return float(pos.min()) if pos.size else 0.0

    def require_scale(self, eps: float) -> float:
        if not np.any(np.isclose(self.scales, eps, rtol=0, atol=self.tol)):
            raise ScaleNotInLadder(f"{eps} not in ladder {self.scales.tolist()}")
        return float(eps)

    def snap(self, coords) -> tuple[np.ndarray, np.ndarray]:
        """Nearest sample index and distance for each coordinate row.

        Structured samples (grids, rings) install a ``snapper`` so this is
        O(1) per point; the fallback scans all pairwise distances.
        """
        if self.snapper is not None:
            return self.snapper(np.atleast_2d(np.asarray(coords, dtype=float)))
        if self.coord_metric is None or self.points is None:
            raise ValidationError("sample has no coordinate metric; cannot snap")
        D = self.coord_metric.pairwise(coords, self.points)
        idx = D.argmin(axis=1)
        return idx, D[np.arange(D.shape[0]), idx]

    def __repr__(self):
        return f"MetricSample(m={self.m}, metric={self.metric!r})"


def default_scale_ladder(diameter: float) -> np.ndarray:
    return np.array([diameter / 2.0 ** k for k in DEFAULT_LADDER_EXPONENTS])


def make_metric_sample(
    points=None,
    metric: str = "euclidean",
    matrix=None,
    scales=None,
    tol: float = DEFAULT_TRIANGLE_TOL,
    coord_metric: CoordMetric | None = None,
    snapper=None,
    meta: dict | None = None,
) -> MetricSample:
    """Build and validate a metric sample from coordinates or a matrix."""
    pts = None
    if points is not None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
    if matrix is not None:
        D = np.asarray(matrix, dtype=float)
        if coord_metric is None and metric in COORD_METRICS:
            coord_metric = COORD_METRICS[metric]()
    else:
        if pts is None:
            raise ValidationError("need points or an explicit distance matrix")
        if coord_metric is None:
            if metric not in COORD_METRICS:
                raise ValidationError(f"unknown metric {metric!r} without matrix")
            coord_metric = COORD_METRICS[metric]()
        raw = pts[:, 0] if metric == "cubic" else pts
        D = coord_metric.pairwise(raw, raw)
    _validate_distance_matrix(D, tol)
    if scales is None:
        scales = default_scale_ladder(float(D.max()))
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0:
        raise ValidationError("scale ladder must be a non-empty 1-d array")
    if (scales <= 0).any() or (np.diff(scales) >= 0).any():
        raise ValidationError("scales must be strictly decreasing and positive")
    return MetricSample(
        dist=D.copy(),
        scales=scales.copy(),
        tol=tol,
        points=None if pts is None else pts.copy(),
        metric=metric,
        coord_metric=coord_metric,
        snapper=snapper,
        meta=dict(meta or {}),
    )


def _validate_distance_matrix(D: np.ndarray, tol: float):
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {D.shape}")
    if not np.allclose(D, D.T, rtol=0, atol=tol):
        raise ValidationError("distance matrix is not symmetric")
    if not np.allclose(np.diagonal(D), 0, rtol=0, atol=tol):
        raise ValidationError("distance matrix has a nonzero diagonal")
    if (D < -tol).any():
        raise ValidationError("negative distances")
    m = D.shape[0]
    if m <= 768:
        # exhaustive, one (m, m) slab per intermediate point
        for k in range(m):
            slack = D[:, k, None] + D[None, k, :] - D
            if (slack < -tol).any():
                i, j = map(int, np.argwhere(slack < -tol)[0])
                raise ValidationError(
                    f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                )
    else:
        # deterministic stride spot-check to keep validation sub-cubic
        idx = np.linspace(0, m - 1, 384).astype(int)
        sub = D[np.ix_(idx, idx)]
        for k in range(len(idx)):
            slack = sub[:, k, None] + sub[None, k, :] - sub
            if (slack < -tol).any():
                raise ValidationError("triangle inequality fails on stride sample")


def metric_point_set(M: MetricSample, A) -> np.ndarray:
    arr = np.asarray(A)
    if arr.dtype == bool:
        if arr.shape != (M.m,):
            raise PointOutOfRange(f"mask length {arr.shape} != {M.m}")
        return arr.astype(bool)
    idx = arr.astype(int).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= M.m):
        raise PointOutOfRange(f"index out of range 0..{M.m - 1}")
    return indices_to_set(idx, M.m)


def hausdorff_distance(A, B, M: MetricSample) -> float:
    """max of the two directed sup-inf distances between finite sets."""
    a = metric_point_set(M, A)
    b = metric_point_set(M, B)
    if not a.any() or not b.any():
        raise EmptySet("hausdorff distance needs non-empty sets")
    sub = M.dist[np.ix_(a.nonzero()[0], b.nonzero()[0])]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def eps_closure(M: MetricSample, A, eps: float) -> np.ndarray:
    """{y : d(y, A) <= eps} over the sample (non-strict by convention)."""
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    a = metric_point_set(M, A)
    if not a.any():
        raise EmptySet("eps closure of the empty set")
    return (M.dist[:, a].min(axis=1) <= eps)


def ball(M: MetricSample, x: int, eps: float) -> np.ndarray:
    if not 0 <= x < M.m:
        raise PointOutOfRange(f"index {x} out of range")
    return M.dist[x] <= eps
