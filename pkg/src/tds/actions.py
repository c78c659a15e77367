"""Semi-group actions as finite generator sets of self-maps.

Generators come in two kinds.  Table generators map sample/point indices to
indices (exact; entries of -1 mark points where the map is undefined, which
happens for truncated catalog systems).  Formula generators map coordinates
to coordinates; orbits iterate the formula exactly in coordinate space and
snap each visited point to the nearest sample point only for set-level
bookkeeping, so snap error does not accumulate across steps.  The snap
statistics are recorded and every at-scale verdict can be weighed against
them.

The definition of a semi-group action asks each translation map to be a
homeomorphism, but the catalog's own machines (the two-point collapse, the
contraction) are not injective.  Generators here may be arbitrary
continuous self-maps; actions built from non-bijective tables are flagged
``non_invertible`` and a strict ``invertible_only`` mode refuses them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    AxiomViolation,
    EmptyGeneratorSet,
    PointOutOfRange,
    SemigroupTooLarge,
    SizeOverflow,
    SnapExceeded,
    ValidationError,
)
from .relations import bool_mm
from .semidec import SemiDecomposition, make_semidecomposition
from .spaces import FiniteSpace, MetricSample, eps_closure

SEMIGROUP_BOUND = 4096
PRODUCT_POINT_BOUND = 4096


@dataclass(frozen=True, eq=False)
class TableGenerator:
    """Index-to-index self-map; -1 marks points with no image (truncation)."""

    table: np.ndarray
    name: str = "table"

    def __post_init__(self):
        self.table.setflags(write=False)

    @property
    def is_total(self) -> bool:
        return bool((self.table >= 0).all())

    @property
    def is_bijective(self) -> bool:
        t = self.table
        return self.is_total and len(np.unique(t)) == len(t)


@dataclass(frozen=True, eq=False)
class FormulaGenerator:
    """Coordinate self-map iterated exactly; images snap only for reporting."""

    fn: object                       # callable (k, d) coords -> (k, d) coords
    name: str = "formula"
    params: dict = field(default_factory=dict)

    def apply(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(coords), dtype=float)


def table_generator(mapping, name: str = "table") -> TableGenerator:
    t = np.asarray(mapping, dtype=int)
    return TableGenerator(table=t.copy(), name=name)


@dataclass(frozen=True, eq=False)
class OrbitTable:
    """Per-point orbit sets plus truncation and snapping metadata."""

    sets: np.ndarray                 # (n, n) bool; row x = orbit of x
    truncation: str                  # "exact-semigroup" or "depth=<d>"
    max_snap_error: float = 0.0
    boundary_hits: int = 0           # partial-map images that were dropped

    def __post_init__(self):
        self.sets.setflags(write=False)

    def orbit(self, x: int) -> np.ndarray:
        return self.sets[x].copy()


@dataclass(frozen=True, eq=False)
class SemiGroupAction:
    """Finite generator set acting on a finite space or a metric sample."""

    generators: tuple
    space: object                    # FiniteSpace or MetricSample
    depth: int = 64
    snap_tol: float = np.inf
    invertible_only: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.space.n if isinstance(self.space, FiniteSpace) else self.space.m

    @property
    def is_metric(self) -> bool:
        return isinstance(self.space, MetricSample)

    @cached_property
    def non_invertible(self) -> bool:
        return any(
            isinstance(g, TableGenerator) and not g.is_bijective for g in self.generators
        )

    @cached_property
    def orbit_table(self) -> OrbitTable:
        return _compute_orbits(self)

    @cached_property
    def word_images(self) -> np.ndarray:
        """Word images as index arrays, shape (w, n); entry -1 = undefined.

        Row 0 is the identity word.  For single-generator actions rows are
        the iterates f^k; with an inverse generator the negative iterates
        follow.  For table actions rows enumerate the distinct reachable
        transformations breadth-first, so in every case the rows double as
        the word set for modulus computations.
        """
        return self._word_data[0]

    @cached_property
    def word_snap_errors(self) -> np.ndarray:
        """Max snap distance per word row of ``word_images``."""
        return self._word_data[1]

    @cached_property
    def forward_word_rows(self) -> int:
        """Rows of ``word_images`` forming the identity+forward block.

        For a generator/inverse pair the backward iterates start at this
        row; for single-generator and table actions it is the whole table.
        """
        return self._word_data[3]

    @cached_property
    def _word_data(self):
        return _word_image_data(self)


def make_action(
    generators,
    space,
    depth: int = 64,
    snap_tol: float = np.inf,
    invertible_only: bool = False,
    meta: dict | None = None,
) -> SemiGroupAction:
    """Validate generators against the carrier and wrap them as an action."""
    gens = tuple(generators)
    if not gens:
        raise EmptyGeneratorSet("need at least one generator")
    n = space.n if isinstance(space, FiniteSpace) else space.m
    for g in gens:
        if isinstance(g, TableGenerator):
            t = g.table
            if t.shape != (n,):
                raise ValidationError(f"generator table has length {len(t)}, needs {n}")
            if (t >= n).any():
                raise PointOutOfRange(f"generator {g.name} maps outside the space")
            if invertible_only and not g.is_bijective:
                raise ValidationError(
                    f"generator {g.name} is not bijective (invertible_only mode)"
                )
        elif isinstance(g, FormulaGenerator):
            if not isinstance(space, MetricSample) or space.points is None:
                raise ValidationError("formula generators need a coordinate sample")
            img = g.apply(space.points)
            _, snap = space.snap(img)
            worst = float(snap.max())
            if worst > snap_tol:
                x = int(snap.argmax())
                raise SnapExceeded(
                    f"generator {g.name} image of point {x} is {worst:.3g} from the "
                    f"sample (snap_tol={snap_tol:.3g})",
                    point=x,
                    generator=g.name,
                    distance=worst,
                )
            if invertible_only:
                raise ValidationError("invertible_only mode accepts table generators only")
        else:
            raise ValidationError(f"unknown generator kind: {g!r}")
    action = SemiGroupAction(
        generators=gens,
        space=space,
        depth=int(depth),
        snap_tol=float(snap_tol),
        invertible_only=invertible_only,
        meta=dict(meta or {}),
    )
    return action


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

def _compute_orbits(A: SemiGroupAction) -> OrbitTable:
    if all(isinstance(g, TableGenerator) for g in A.generators):
        return _orbits_from_tables(A)
    return _orbits_from_formulas(A)


def _step_relation(t: np.ndarray, n: int) -> np.ndarray:
    """One-step relation of a table: rel[w, z] iff t[w] == z (t[w] >= 0)."""
    rel = np.zeros((n, n), dtype=bool)
    defined = t >= 0
    rel[np.flatnonzero(defined), t[defined]] = True
    return rel


def _orbits_from_tables(A: SemiGroupAction) -> OrbitTable:
    """Reflexive-transitive closure of the one-step relation; exact."""
    n = A.n
    partial = any(not g.is_total for g in A.generators)
    step = np.eye(n, dtype=bool)
    boundary = 0
    for g in A.generators:
        step |= _step_relation(g.table, n)
        boundary += int((g.table < 0).sum())
    sets = step
    while True:
        nxt = sets | bool_mm(sets, sets)
        if np.array_equal(nxt, sets):
            break
        sets = nxt
    trunc = "exact-semigroup" if not partial else "exact-closure;partial-maps"
    return OrbitTable(sets=sets, truncation=trunc, boundary_hits=boundary)


def _orbits_from_formulas(A: SemiGroupAction) -> OrbitTable:
    words, snap_err, _, _ = A._word_data
    n = A.n
    sets = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n)[None, :], words.shape[0], axis=0)
    defined = words >= 0
    sets[rows[defined], words[defined]] = True
    boundary = int((~defined).sum())
    return OrbitTable(
        sets=sets,
        truncation=f"depth={A.depth}",
        max_snap_error=float(snap_err.max()) if snap_err.size else 0.0,
        boundary_hits=boundary,
    )


def orbit(A: SemiGroupAction, x: int) -> np.ndarray:
    if not 0 <= x < A.n:
        raise PointOutOfRange(f"point {x} out of range")
    return A.orbit_table.orbit(x)


def induced_semidec(A: SemiGroupAction) -> SemiDecomposition:
    """Orbit semi-decomposition: member[y, x] iff x in orbit(y).

    Exact on the finite backend.  Under truncation the nesting axiom can
    fail; the resulting AxiomViolation means the depth is too small and
    carries the offending pair.
    """
    try:
        return make_semidecomposition(A.orbit_table.sets)
    except AxiomViolation as exc:
        raise AxiomViolation(
            f"truncated orbits violate nesting (depth={A.depth} too small): {exc}",
            witness=exc.witness,
        ) from exc


def orbit_semidecomposition(A: SemiGroupAction) -> SemiDecomposition:
    """Orbit semi-decomposition with truncation repaired by composition.

    Depth-truncated snapped orbits need not nest (the far end of a reach
    arc reaches further).  Compositions of word images are themselves word
    images of longer words, so closing the reach relation transitively
    only adds genuine orbit members and restores both axioms.  Exact table
    orbits are already closed and pass through unchanged.
    """
    sets = A.orbit_table.sets
    closed = _reach_closure(sets)
    F = make_semidecomposition(closed)
    return F


def _reach_closure(sets: np.ndarray) -> np.ndarray:
    import scipy.sparse as sp

    R = sp.csr_matrix(sets)
    while True:
        R2 = ((R @ R) + R).astype(bool)
        if R2.nnz == R.nnz:
            break
        R = R2.tocsr()
    return np.asarray(R.todense()).astype(bool)


# ---------------------------------------------------------------------------
# word images (shared by orbits and the modulus checkers)
# ---------------------------------------------------------------------------

def _word_image_data(A: SemiGroupAction):
    """(words, snap_err, coords): index images, per-word snap error, coords.

    ``words`` has shape (w, n): row = word, column = starting point, entry =
    snapped sample index of the word image (or -1 when the word is undefined
    at that point).  For formula generators ``coords`` keeps the exact
    coordinates with nan rows for undefined images; table generators carry
    no coordinates (None).
    """
    if all(isinstance(g, TableGenerator) for g in A.generators):
        if (
            len(A.generators) == 2
            and A.generators[1].name.endswith("_inverse")
        ):
            # map/inverse pair: the iterate words g^k, g^-k carry all the
            # reach; mixed words only shrink domains for partial maps
            words, fwd = _table_iterates(A)
            return words, np.zeros(len(words)), None, fwd
        words = _table_words(A)
        return words, np.zeros(len(words)), None, len(words)
    if len(A.generators) == 1:
        return _formula_words(A, forward=A.generators, backward=())
    # exactly two formula generators are accepted as a map/inverse pair
    # (one forward and one backward sweep); mixed word trees over unrelated
    # coordinate formulas are out of scope
    if (
        len(A.generators) == 2
        and all(isinstance(g, FormulaGenerator) for g in A.generators)
        and A.generators[1].name.endswith("_inverse")
    ):
        return _formula_words(A, forward=(A.generators[0],), backward=(A.generators[1],))
    raise ValidationError(
        "formula actions support a single generator or a generator/inverse pair"
    )


def _table_words(A: SemiGroupAction, bound: int = SEMIGROUP_BOUND) -> np.ndarray:
    """Distinct transformations reachable within depth, breadth-first.

    For total maps on a finite carrier this is the transformation semigroup
    (plus identity) once the closure stabilizes below the depth bound.
    Partial maps compose with -1 absorbing (undefined stays undefined).
    """
    n = A.n
    ident = np.arange(n)
    seen = {ident.tobytes()}
    rows = [ident]
    frontier = [ident]
    tables = [g.table for g in A.generators]
    for _ in range(A.depth):
        nxt = []
        for w in frontier:
            for t in tables:
                img = np.where(w >= 0, t[np.maximum(w, 0)], -1)
                key = img.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(img)
                    rows.append(img)
                    if len(rows) > bound:
                        raise SemigroupTooLarge(
                            f"more than {bound} distinct transformations"
                        )
        if not nxt:
            break
        frontier = nxt
    return np.array(rows, dtype=int)


def _table_iterates(A: SemiGroupAction):
    """Word rows g^1..g^depth then inverse^1..inverse^depth; -1 absorbing."""
    n = A.n
    rows = [np.arange(n)]
    fwd_rows = 1
    for g in A.generators:
        cur = np.arange(n)
        for _ in range(A.depth):
            cur = np.where(cur >= 0, g.table[np.maximum(cur, 0)], -1)
            if (cur < 0).all():
                break
            rows.append(cur.copy())
        if g is A.generators[0]:
            fwd_rows = len(rows)
    return np.array(rows, dtype=int), fwd_rows


def _formula_words(A: SemiGroupAction, forward, backward):
    """Iterate formulas exactly on coordinates; snap images per word."""
    M: MetricSample = A.space
    base = M.points
    n = A.n
    word_rows = [np.arange(n)]
    snap_rows = [0.0]
    coords_rows = [base.copy()]
    forward_rows = 1
    for gens in (forward, backward):
        if not gens:
            continue
        g = gens[0]
        cur = base.copy()
        alive = np.ones(n, dtype=bool)
        for _ in range(A.depth):
            nxt = g.apply(cur)
            alive &= np.isfinite(nxt).all(axis=1)
            if not alive.any():
                break
            cur = np.where(alive[:, None], nxt, cur)
            idx = np.full(n, -1, dtype=int)
            live_idx, live_snap = M.snap(cur[alive])
            worst = float(live_snap.max()) if live_snap.size else 0.0
            if worst > A.snap_tol:
                p = int(np.flatnonzero(alive)[live_snap.argmax()])
                raise SnapExceeded(
                    f"word image of point {p} is {worst:.3g} from the sample",
                    point=p,
                    generator=g.name,
                    distance=worst,
                )
            idx[alive] = live_idx
            word_rows.append(idx)
            snap_rows.append(worst)
            full = cur.copy()
            full[~alive] = np.nan
            coords_rows.append(full)
        if gens is forward:
            forward_rows = len(word_rows)
    return (np.array(word_rows, dtype=int), np.array(snap_rows), coords_rows,
            forward_rows)


# ---------------------------------------------------------------------------
# products and limit sets
# ---------------------------------------------------------------------------

def product_action(A: SemiGroupAction, k: int, max_points: int = PRODUCT_POINT_BOUND):
    """Diagonal action on the k-fold product (k <= 3).

    Returns (action, product_space).  Only table generators are supported;
    formula actions are snapped to tables first via ``as_table_action``.
    """
    from .spaces import product as space_product  # local to avoid cycle at import

    if k < 1 or k > 3:
        raise SizeOverflow(f"product power must be 1..3, got {k}")
    if k == 1:
        return A, A.space
    base = A
    if any(isinstance(g, FormulaGenerator) for g in A.generators):
        base = as_table_action(A)
    n = base.n
    if n ** k > max_points:
        raise SizeOverflow(f"product would have {n ** k} > {max_points} points")
    if isinstance(base.space, FiniteSpace):
        ps = base.space
        prod_space = space_product(ps, ps, max_points=max_points)
        if k == 3:
            prod_space = space_product(prod_space, ps, max_points=max_points)
    else:
        prod_space = product_metric_sample(base.space, k)
    gens = []
    for g in base.generators:
        t = g.table
        cur = t
        for _ in range(k - 1):
            m = len(cur)
            big = np.empty(m * n, dtype=int)
            for i in range(m):
                if cur[i] < 0:
                    big[i * n:(i + 1) * n] = -1
                else:
                    block = t.copy()
                    big[i * n:(i + 1) * n] = np.where(block >= 0, cur[i] * n + block, -1)
            cur = big
        gens.append(TableGenerator(table=cur, name=f"{g.name}^x{k}"))
    return (
        make_action(gens, prod_space, depth=base.depth, snap_tol=base.snap_tol,
                    meta=dict(base.meta, product_power=k)),
        prod_space,
    )


def as_table_action(A: SemiGroupAction) -> SemiGroupAction:
    """Snap each generator to an index table (documented downgrade)."""
    if all(isinstance(g, TableGenerator) for g in A.generators):
        return A
    M: MetricSample = A.space
    gens = []
    for g in A.generators:
        if isinstance(g, TableGenerator):
            gens.append(g)
            continue
        img = g.apply(M.points)
        idx, snap = M.snap(img)
        gens.append(TableGenerator(table=idx.astype(int), name=f"{g.name}@table"))
    return make_action(
        gens, M, depth=A.depth, snap_tol=A.snap_tol,
        meta=dict(A.meta, snapped_tables=True),
    )


def product_metric_sample(M: MetricSample, k: int) -> MetricSample:
    """k-fold product sample under the max metric (materialized)."""
    from .spaces import make_metric_sample

    m = M.m
    if m ** k > PRODUCT_POINT_BOUND:
        raise SizeOverflow(f"product sample would have {m ** k} points")
    D = M.dist
    if k == 2:
        Dp = np.maximum(
            np.repeat(np.repeat(D, m, axis=0), m, axis=1),
            np.tile(D, (m, m)),
        )
    else:
        idx = np.stack(np.meshgrid(*([np.arange(m)] * k), indexing="ij"), axis=-1)
        flat = idx.reshape(-1, k)
        Dp = np.zeros((m ** k, m ** k))
        for a in range(k):
            Dp = np.maximum(Dp, D[np.ix_(flat[:, a], flat[:, a])])
    return make_metric_sample(
        matrix=Dp, metric="matrix", scales=M.scales.copy(), tol=M.tol,
        meta=dict(M.meta, product_power=k),
    )


def omega_limit(
    map_gen,
    x: int,
    burn: int,
    window: int,
    M: MetricSample,
    eps: float,
) -> np.ndarray:
    """eps-closure of the trajectory segment after burn-in, at one scale."""
    eps = M.require_scale(eps)
    if isinstance(map_gen, TableGenerator):
        cur = x
        seg = []
        for step in range(burn + window):
            nxt = int(map_gen.table[cur]) if cur >= 0 else -1
            cur = nxt
            if cur < 0:
                break
            if step >= burn:
                seg.append(cur)
        if not seg:
            return np.zeros(M.m, dtype=bool)
        return eps_closure(M, sorted(set(seg)), eps)
    cur = M.points[x:x + 1].copy()
    seg_idx = set()
    for step in range(burn + window):
        cur = map_gen.apply(cur)
        if step >= burn:
            idx, _ = M.snap(cur)
            seg_idx.add(int(idx[0]))
    if not seg_idx:
        return np.zeros(M.m, dtype=bool)
    return eps_closure(M, sorted(seg_idx), eps)
