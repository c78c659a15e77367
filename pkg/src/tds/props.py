"""Property checkers for semi-decompositions and actions, on both backends.

Finite backend: every checker is exact, computed from the specialization
pre-order by boolean matrix algebra.

Metric backend: every checker is at-scale.  The convention, fixed once and
reported with every verdict, is an inflation factor c (default 2): a limit
step performed at scale eps may land anywhere within c * eps.  For example
characteristic 0 at scale eps requires the scale-eps prolongation to stay
inside the (c * eps)-closure of the element.  Per-scale verdicts for the
whole ladder are always attached; the summary flag is the verdict at a
designated report scale (catalog entries pin the scale their claim lives
at, defaulting to the k=6 dyadic scale), falling back to the nearest
coarser non-vacuous scale when the sample cannot resolve the report scale.

Pointwise almost periodicity needs care.  On the finite backend the checker
computes two forms independently: the definitional one (every element
closure is minimal, equivalently the element closure relation R is an
equivalence relation) and the symmetry of R.  Minimality always implies
symmetry; the converse holds whenever the space is T1 (on finite spaces,
discrete) but genuinely fails on non-T1 spaces, where R can be symmetric
without being transitive.  The primary verdict is the definitional form.
A disagreement on a T1 space raises InternalDisagreement (there it is a
theorem, so disagreement means a checker bug); on non-T1 spaces both forms
are recorded in the verdict data.  The metric backend uses the symmetry
form with inflation, which is robust to orbit truncation.

Weak almost periodicity on the metric backend uses the compact-space
equivalence: on a compact Hausdorff carrier, WAP holds iff the structure is
pointwise almost periodic and R-closed (R-closedness plus compact element
closures gives WAP; conversely WAP on a Hausdorff space is R-closed).
Finite samples are compact, so the at-scale WAP verdict is the conjunction
of the two at-scale verdicts at the report scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import SemiGroupAction, TableGenerator, _table_words
from .errors import InternalDisagreement, SizeMismatch, ValidationError
from .instance import Instance
from .relations import bool_mm
from .semidec import (
    ClassPartition,
    SemiDecomposition,
    class_partition,
    element_closures,
    prolongations,
)
from .spaces import (
    FiniteSpace,
    MetricSample,
    SeparationFlags,
    product as space_product,
    closure_fin,
    quotient as space_quotient,
    separation_axioms,
)
from .verdicts import Certificate, ModulusCurve, ScaleVerdict, Verdict

DEFAULT_INFLATION = 2.0
# the closedness-of-R check composes one more eps-move than the
# prolongation check (two product-neighborhood steps plus the R-membership
# step), so its inflation allows three moves where char-0 allows two
R_CLOSED_INFLATION = 3.0
DEFAULT_REPORT_EXPONENT = 6          # dyadic scale diam / 2^6
MAX_EXACT_POINTS = 1200
LADDER_EXPONENTS = range(2, 11)


# ---------------------------------------------------------------------------
# finite backend
# ---------------------------------------------------------------------------

def _finite(F: SemiDecomposition, S: FiniteSpace):
    if F.n != S.n:
        raise SizeMismatch(f"structure on {F.n} points, space on {S.n}")
    C = element_closures(F, S)     # row x = closure of F(x); this is also R
    D = prolongations(F, S)
    return C, D


def is_r_closed(F: SemiDecomposition, space, inflation: float = DEFAULT_INFLATION,
                report_exponent: int | None = None) -> Verdict:
    """Closedness of R = {(x, y) : y in cl F(x)} in the product space.

    Finite: R is closed iff it is a down-set of the componentwise
    specialization order; cross-checked against direct closed-set membership
    in the product space whenever the product is small enough to build.
    """
    if isinstance(space, MetricSample):
        infl = R_CLOSED_INFLATION if inflation == DEFAULT_INFLATION else inflation
        return r_closed_at_scale(F, space, infl, report_exponent)
    S = space
    C, _ = _finite(F, S)
    R = C
    down = bool_mm(bool_mm(S.leq, R), S.leq.T)
    closed = bool(np.array_equal(down, R))
    if S.n * S.n <= 256:
        direct = _r_closed_direct(F, S)
        if direct != closed:
            raise InternalDisagreement(
                "down-set criterion and product-space closure disagree on R-closedness"
            )
    if closed:
        return Verdict("r_closed", True, "exact")
    bad = down & ~R
    x, y = map(int, np.argwhere(bad)[0])
    cert = Certificate(
        "r_closed", "exact",
        witness={"pair": [x, y],
                 "note": "pair lies in the product closure of R but not in R"},
    )
    return Verdict("r_closed", False, "exact", certificate=cert)


def _r_closed_direct(F: SemiDecomposition, S: FiniteSpace) -> bool:
    """Independent route: build the product space and test closedness there."""
    C = element_closures(F, S)
    P = space_product(S, S, max_points=max(256, S.n * S.n))
    flat = C.reshape(-1)
    return bool(np.array_equal(closure_fin(P, flat), flat))


def is_characteristic_zero(F: SemiDecomposition, space,
                           inflation: float = DEFAULT_INFLATION,
                           report_exponent: int | None = None) -> Verdict:
    """Every element closure equals the prolongation at every point."""
    if isinstance(space, MetricSample):
        return char_zero_at_scale(F, space, inflation, report_exponent)
    C, D = _finite(F, space)
    diff = (C != D).any(axis=1)
    if not diff.any():
        return Verdict("char_zero", True, "exact")
    x = int(np.flatnonzero(diff)[0])
    cert = Certificate(
        "char_zero", "exact",
        witness={"point": x,
                 "element_closure": np.flatnonzero(C[x]).tolist(),
                 "prolongation": np.flatnonzero(D[x]).tolist()},
    )
    return Verdict("char_zero", False, "exact", certificate=cert)


def is_pointwise_ap(F: SemiDecomposition, space,
                    inflation: float = DEFAULT_INFLATION,
                    report_exponent: int | None = None) -> Verdict:
    """Every element closure minimal; symmetry of R computed independently."""
    if isinstance(space, MetricSample):
        return pap_at_scale(F, space, inflation, report_exponent)
    S = space
    C, _ = _finite(F, S)
    R = C
    symmetric = bool(np.array_equal(R, R.T))
    minimality, min_witness = _pap_minimality_form(C)
    flags = separation_axioms(S) if S.n <= 12 else None
    if flags is not None and flags.t1 and minimality != symmetric:
        raise InternalDisagreement(
            "PAP minimality and symmetry forms disagree on a T1 space"
        )
    data = {"minimality_form": minimality, "symmetry_form": symmetric,
            "forms_agree": minimality == symmetric}
    if minimality:
        return Verdict("pointwise_ap", True, "exact", data=data)
    cert = Certificate("pointwise_ap", "exact", witness=min_witness)
    return Verdict("pointwise_ap", False, "exact", certificate=cert, data=data)


def _pap_minimality_form(C: np.ndarray):
    """Definitional minimality: y in cl F(x) forces cl F(y) = cl F(x).

    (Invariance of the closure follows, since each F(y) sits inside its own
    closure.)  Equivalently R is an equivalence relation.
    """
    n = C.shape[0]
    for x in range(n):
        for y in np.flatnonzero(C[x]):
            if not np.array_equal(C[y], C[x]):
                return False, {
                    "point": int(x),
                    "non_returning_point": int(y),
                    "element_closure": np.flatnonzero(C[x]).tolist(),
                    "other_closure": np.flatnonzero(C[int(y)]).tolist(),
                    "note": "closure of F(x) is not minimal",
                }
    return True, {}


def is_weakly_ap(F: SemiDecomposition, space,
                 inflation: float = DEFAULT_INFLATION,
                 report_exponent: int | None = None) -> Verdict:
    """PAP plus: saturated closures of closed sets stay closed."""
    if isinstance(space, MetricSample):
        return wap_at_scale(F, space, inflation, report_exponent)
    S = space
    pap = is_pointwise_ap(F, S)
    if not pap.value:
        cert = Certificate("weakly_ap", "exact",
                           witness=dict(pap.certificate.witness, via="not pointwise ap"))
        return Verdict("weakly_ap", False, "exact", certificate=cert)
    C, _ = _finite(F, S)
    for A in S.down_sets:
        if not A.any():
            continue
        sat_cl = bool_mm(A[None, :], C).ravel()
        closure = closure_fin(S, sat_cl)
        if not np.array_equal(closure, sat_cl):
            esc = int(np.flatnonzero(closure & ~sat_cl)[0])
            cert = Certificate(
                "weakly_ap", "exact",
                witness={"closed_set": np.flatnonzero(A).tolist(),
                         "escaping_point": esc,
                         "note": "union of element closures over the closed set "
                                 "is not closed"},
            )
            return Verdict("weakly_ap", False, "exact", certificate=cert)
    return Verdict("weakly_ap", True, "exact")


def is_minimal_sd(F: SemiDecomposition, space,
                  report_exponent: int | None = None) -> Verdict:
    """The whole carrier equals every element closure."""
    if isinstance(space, MetricSample):
        return minimal_at_scale(F, space, report_exponent)
    C, _ = _finite(F, space)
    bad = ~C.all(axis=1)
    if not bad.any():
        return Verdict("minimal", True, "exact")
    x = int(np.flatnonzero(bad)[0])
    cert = Certificate("minimal", "exact",
                       witness={"point": x,
                                "element_closure": np.flatnonzero(C[x]).tolist()})
    return Verdict("minimal", False, "exact", certificate=cert)


def is_weakly_usc(parts: ClassPartition, S: FiniteSpace) -> Verdict:
    """Closed elements, each with arbitrarily tight open invariant nbhds."""
    n = S.n
    part_mat = np.zeros((len(parts.classes), n), dtype=bool)
    for ci, p in enumerate(parts.classes):
        part_mat[ci, list(p)] = True
    for ci, row in enumerate(part_mat):
        if not S.is_closed(row):
            cert = Certificate("weakly_usc_classes", "exact",
                               witness={"class": np.flatnonzero(row).tolist(),
                                        "note": "class is not closed"})
            return Verdict("weakly_usc_classes", False, "exact", certificate=cert)
    ups = S.up_sets
    # saturated opens: unions of classes
    sat = ups[
        (bool_mm(bool_mm(ups, part_mat.T), part_mat) == ups).all(axis=1)
    ]
    for row in part_mat:
        covers = ups[~(row & ~ups).any(axis=1)]
        for U in covers:
            ok = False
            for V in sat:
                if not (row & ~V).any() and not (V & ~U).any():
                    ok = True
                    break
            if not ok:
                cert = Certificate(
                    "weakly_usc_classes", "exact",
                    witness={"class": np.flatnonzero(row).tolist(),
                             "open_set": np.flatnonzero(U).tolist(),
                             "note": "no open invariant neighborhood inside"},
                )
                return Verdict("weakly_usc_classes", False, "exact", certificate=cert)
    return Verdict("weakly_usc_classes", True, "exact")


def is_usc(parts: ClassPartition, S: FiniteSpace) -> Verdict:
    """Upper semi-continuity; compactness is automatic on a finite space."""
    w = is_weakly_usc(parts, S)
    return Verdict("usc_classes", w.value, "exact", certificate=w.certificate,
                   note="compactness automatic on finite spaces")


def quotient_separation(F: SemiDecomposition, S: FiniteSpace) -> SeparationFlags:
    """Separation flags of the class space X / F-hat."""
    parts = class_partition(F, S)
    q = space_quotient(S, parts.classes)
    return separation_axioms(q.space)


# ---------------------------------------------------------------------------
# metric backend at-scale checkers
# ---------------------------------------------------------------------------

class MetricContext:
    """Shared precomputation for at-scale checks of one (F, sample) pair.

    Pair grids larger than ``max_exact`` points are decimated by a
    deterministic index stride; element sets always stay complete, only the
    grid of checked pairs shrinks, and witnesses are therefore valid on the
    full instance.
    """

    def __init__(self, F: SemiDecomposition, M: MetricSample,
                 max_exact: int = MAX_EXACT_POINTS):
        if F.n != M.m:
            raise SizeMismatch(f"structure on {F.n} points, sample on {M.m}")
        self.F, self.M = F, M
        m = M.m
        if m <= max_exact:
            self.kept = np.arange(m)
        else:
            stride = int(math.ceil(m / max_exact))
            self.kept = np.arange(0, m, stride)
        self.k = len(self.kept)
        self.decimated = self.k < m
        self.Dkk = M.dist[np.ix_(self.kept, self.kept)]
        self._ps = None

    @property
    def ps(self) -> np.ndarray:
        """ps[i, j] = d(sample[kept[j]], F(kept[i])); element sets complete."""
        if self._ps is None:
            D = self.M.dist
            ps = np.empty((self.k, self.k))
            for i, x in enumerate(self.kept):
                idx = np.flatnonzero(self.F.member[x])
                ps[i] = D[np.ix_(self.kept, idx)].min(axis=1)
            self._ps = ps
        return self._ps

    def neighbors(self, eps: float) -> np.ndarray:
        return self.Dkk <= eps

    def nonvacuous(self, eps: float) -> bool:
        N = self.neighbors(eps)
        return bool((N & ~np.eye(self.k, dtype=bool)).any())

    def note(self, inflation: float) -> str:
        s = f"inflation={inflation:g}; non-strict eps-closures"
        if self.decimated:
            s += f"; pair grid decimated to {self.k}/{self.M.m} points"
        return s


def _ladder(M: MetricSample):
    return [float(s) for s in M.scales]


def _report_scale(M: MetricSample, report_exponent: int | None) -> float:
    k = DEFAULT_REPORT_EXPONENT if report_exponent is None else report_exponent
    ladder = list(LADDER_EXPONENTS)
    if len(M.scales) == len(ladder) and k in ladder:
        return float(M.scales[ladder.index(k)])
    # custom ladder: take the scale closest to diam / 2^k
    target = M.diameter / 2.0 ** k
    return float(M.scales[int(np.abs(M.scales - target).argmin())])


def _flag_at_report(prop: str, rows: list[ScaleVerdict], report: float,
                    note: str) -> Verdict:
    """Summary flag = verdict at the report scale.

    A vacuous report-scale row falls back to the nearest coarser
    non-vacuous row; all rows stay attached for inspection.
    """
    by_scale = sorted(rows, key=lambda r: r.scale, reverse=True)
    chosen = None
    for r in by_scale:
        if r.scale >= report - 1e-12 and not r.vacuous:
            chosen = r                      # coarsest-to-finest; keep last
    if chosen is None:
        usable = [r for r in by_scale if not r.vacuous]
        chosen = usable[0] if usable else None
    if chosen is None:
        return Verdict(prop, True, "at-scale", scales=rows,
                       note=note + "; vacuous at every ladder scale")
    if chosen.passed:
        return Verdict(prop, True, "at-scale", scale=chosen.scale,
                       scales=rows, note=note)
    cert = Certificate(prop, "at-scale", witness=chosen.witness or {},
                       scale=chosen.scale, note=note)
    return Verdict(prop, False, "at-scale", scale=chosen.scale,
                   certificate=cert, scales=rows, note=note)


def _rows_cached(ctx: MetricContext, key: str, builder):
    cache = getattr(ctx, "_row_cache", None)
    if cache is None:
        cache = {}
        ctx._row_cache = cache
    if key not in cache:
        cache[key] = builder()
    return cache[key]


def r_closed_at_scale(F: SemiDecomposition, M: MetricSample,
                      inflation: float = R_CLOSED_INFLATION,
                      report_exponent: int | None = None,
                      ctx: MetricContext | None = None) -> Verdict:
    """No pair sequence along the ladder escapes the eps-closure of R."""
    ctx = ctx or MetricContext(F, M)
    rows = _rows_cached(ctx, f"r_closed:{inflation}",
                        lambda: _r_closed_rows(ctx, inflation))
    return _flag_at_report("r_closed", rows, _report_scale(M, report_exponent),
                           ctx.note(inflation))


def _r_closed_rows(ctx: MetricContext, inflation: float):
    PS = ctx.ps
    rows = []
    for eps in _ladder(ctx.M):
        N = ctx.neighbors(eps).astype(np.float32)
        Re = (PS <= eps).astype(np.float32)
        closure = (N @ Re @ N) > 0
        bad = closure & (PS > inflation * eps)
        vac = not ctx.nonvacuous(eps)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            rows.append(ScaleVerdict(eps, False, vacuous=False, witness={
                "pair": [int(ctx.kept[i]), int(ctx.kept[j])],
                "distance_to_element": float(PS[i, j]),
                "allowed": float(inflation * eps),
                "note": "limit pair escapes the inflated element closure",
            }))
        else:
            rows.append(ScaleVerdict(eps, True, vacuous=vac))
    return rows


def char_zero_at_scale(F: SemiDecomposition, M: MetricSample,
                       inflation: float = DEFAULT_INFLATION,
                       report_exponent: int | None = None,
                       ctx: MetricContext | None = None) -> Verdict:
    """Scale-eps prolongation stays inside the inflated element closure."""
    ctx = ctx or MetricContext(F, M)
    rows = _rows_cached(ctx, f"char_zero:{inflation}",
                        lambda: _char_zero_rows(ctx, inflation))
    return _flag_at_report("char_zero", rows, _report_scale(M, report_exponent),
                           ctx.note(inflation))


def _char_zero_rows(ctx: MetricContext, inflation: float):
    PS = ctx.ps
    rows = []
    for eps in _ladder(ctx.M):
        N = ctx.neighbors(eps).astype(np.float32)
        Be = (PS <= eps).astype(np.float32)
        # prolongation membership: exists y in ball(x) with z near F(y)
        prolong = (N @ Be) > 0
        bad = prolong & (PS > inflation * eps)
        vac = not ctx.nonvacuous(eps)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            rows.append(ScaleVerdict(eps, False, vacuous=False, witness={
                "point": int(ctx.kept[i]),
                "prolongation_point": int(ctx.kept[j]),
                "distance_to_element": float(PS[i, j]),
                "allowed": float(inflation * eps),
            }))
        else:
            rows.append(ScaleVerdict(eps, True, vacuous=vac))
    return rows


def pap_at_scale(F: SemiDecomposition, M: MetricSample,
                 inflation: float = DEFAULT_INFLATION,
                 report_exponent: int | None = None,
                 ctx: MetricContext | None = None) -> Verdict:
    """Symmetry of R with inflation (truncation-robust PAP surrogate)."""
    ctx = ctx or MetricContext(F, M)
    rows = _rows_cached(ctx, f"pap:{inflation}",
                        lambda: _pap_rows(ctx, inflation))
    return _flag_at_report("pointwise_ap", rows, _report_scale(M, report_exponent),
                           ctx.note(inflation))


def _pap_rows(ctx: MetricContext, inflation: float):
    PS = ctx.ps
    rows = []
    for eps in _ladder(ctx.M):
        Re = PS <= eps
        bad = Re & (PS.T > inflation * eps)
        vac = not Re.any()
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            rows.append(ScaleVerdict(eps, False, vacuous=False, witness={
                "pair": [int(ctx.kept[i]), int(ctx.kept[j])],
                "forward_distance": float(PS[i, j]),
                "backward_distance": float(PS[j, i]),
                "allowed": float(inflation * eps),
                "note": "nested element closures: y is near cl F(x) but x "
                        "is far from cl F(y)",
            }))
        else:
            rows.append(ScaleVerdict(eps, True, vacuous=vac))
    return rows


def minimal_at_scale(F: SemiDecomposition, M: MetricSample,
                     report_exponent: int | None = None,
                     ctx: MetricContext | None = None) -> Verdict:
    """Every element closure is eps-dense in the sample."""
    ctx = ctx or MetricContext(F, M)
    rows = _rows_cached(ctx, "minimal", lambda: _minimal_rows(ctx))
    return _flag_at_report("minimal", rows, _report_scale(M, report_exponent),
                           ctx.note(1.0))


def _minimal_rows(ctx: MetricContext):
    PS = ctx.ps
    rows = []
    for eps in _ladder(ctx.M):
        bad = PS > eps
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            rows.append(ScaleVerdict(eps, False, vacuous=False, witness={
                "point": int(ctx.kept[i]),
                "uncovered_point": int(ctx.kept[j]),
                "distance": float(PS[i, j]),
            }))
        else:
            rows.append(ScaleVerdict(eps, True))
    return rows


def wap_at_scale(F: SemiDecomposition, M: MetricSample,
                 inflation: float = DEFAULT_INFLATION,
                 report_exponent: int | None = None,
                 ctx: MetricContext | None = None,
                 pap: Verdict | None = None,
                 rcl: Verdict | None = None) -> Verdict:
    """PAP and R-closed at scale (compact-carrier equivalence of WAP)."""
    ctx = ctx or MetricContext(F, M)
    if pap is None:
        pap = pap_at_scale(F, M, inflation, report_exponent, ctx)
    if rcl is None:
        rcl = r_closed_at_scale(F, M, R_CLOSED_INFLATION, report_exponent, ctx)
    value = bool(pap.value) and bool(rcl.value)
    note = ("via compact-carrier equivalence: weakly almost periodic iff "
            "pointwise almost periodic and R-closed; " + ctx.note(inflation))
    if value:
        return Verdict("weakly_ap", True, "at-scale", scale=pap.scale, note=note,
                       data={"pointwise_ap": pap.value, "r_closed": rcl.value})
    failing = pap if not pap.value else rcl
    cert = Certificate("weakly_ap", "at-scale",
                       witness=dict(failing.certificate.witness,
                                    via=failing.property),
                       scale=failing.scale, note=note)
    return Verdict("weakly_ap", False, "at-scale", scale=failing.scale,
                   certificate=cert, note=note,
                   data={"pointwise_ap": pap.value, "r_closed": rcl.value})


# ---------------------------------------------------------------------------
# moduli (metric backend)
# ---------------------------------------------------------------------------

def _pair_arrays(ctx: MetricContext, delta_max: float):
    """Kept-grid pairs (i < j) with starting distance <= delta_max, sorted."""
    iu = np.triu_indices(ctx.k, k=1)
    d0 = ctx.Dkk[iu]
    keep = d0 <= delta_max
    I, J, d0 = iu[0][keep], iu[1][keep], d0[keep]
    order = np.argsort(d0, kind="stable")
    return I[order], J[order], d0[order]


def _curve_from_pairs(name: str, d0: np.ndarray, vals: np.ndarray,
                      scales, meta: dict) -> ModulusCurve:
    """Cumulative max of per-pair values against ascending ladder deltas."""
    deltas = np.sort(np.asarray(list(scales), dtype=float))
    if len(d0):
        cum = np.maximum.accumulate(vals)
        idx = np.searchsorted(d0, deltas, side="right") - 1
        values = np.where(idx >= 0, cum[np.clip(idx, 0, None)], 0.0)
    else:
        values = np.zeros_like(deltas)
    return ModulusCurve(name=name, deltas=deltas, values=values, meta=meta)


def _modulus_flag(prop: str, curve: ModulusCurve, mesh: float, note: str) -> Verdict:
    """Uniform-modulus verdict from a curve.

    Fails when (a) some target scale eps has every usable delta with value
    above eps (no modulus exists on the ladder), or (b) some usable delta
    already pumps pairs beyond the coarsest ladder scale (blow-up).  Usable
    means the delta resolves at least one distinct pair.  A ladder with no
    usable delta is vacuously uniform (the sample resolves no close pairs).
    """
    usable = curve.deltas >= mesh - 1e-15
    if not usable.any():
        return Verdict(prop, True, "at-scale",
                       note=note + "; no ladder scale resolves a pair")
    eps_macro = float(curve.deltas.max())
    vals = curve.values[usable]
    blow = vals > eps_macro + 1e-12
    fail_targets = [float(e) for e in curve.deltas
                    if (vals > e + 1e-12).all()]
    if blow.any():
        d = float(curve.deltas[usable][int(np.argmax(blow))])
        cert = Certificate(prop, "at-scale", scale=d, note=note, witness={
            "delta": d, "value": curve.value_at(d), "exceeds": eps_macro,
            "rule": "modulus exceeds the coarsest ladder scale"})
        return Verdict(prop, False, "at-scale", scale=d, certificate=cert,
                       note=note, data={"curve": curve.as_dict()})
    if fail_targets:
        e = fail_targets[0]
        cert = Certificate(prop, "at-scale", scale=e, note=note, witness={
            "target": e, "rule": "every usable delta has modulus above target"})
        return Verdict(prop, False, "at-scale", scale=e, certificate=cert,
                       note=note, data={"curve": curve.as_dict()})
    return Verdict(prop, True, "at-scale", note=note,
                   data={"curve": curve.as_dict()})


def equicontinuity_modulus(A: SemiGroupAction, M: MetricSample | None = None,
                           max_exact: int = MAX_EXACT_POINTS):
    """E(delta) = max over words w and pairs d(x,y) <= delta of d(w x, w y).

    Word images are snapped to the sample; the weak modulus below uses the
    same snapped data, which makes the domination W <= E exact even on
    truncated orbits.  Returns (curve, verdict).
    """
    M = M or A.space
    if not isinstance(M, MetricSample):
        raise ValidationError("equicontinuity modulus needs a metric sample")
    F = SemiDecomposition(A.orbit_table.sets.copy())
    ctx = MetricContext(F, M, max_exact=max_exact)
    words = A.word_images[:, ctx.kept]
    I, J, d0 = _pair_arrays(ctx, float(M.scales.max()))
    vals = np.zeros(len(I))
    D = M.dist
    chunk = max(1, int(2_000_000 / max(1, words.shape[0])))
    for s in range(0, len(I), chunk):
        wi = words[:, I[s:s + chunk]]
        wj = words[:, J[s:s + chunk]]
        defined = (wi >= 0) & (wj >= 0)
        dv = D[np.clip(wi, 0, None), np.clip(wj, 0, None)]
        dv[~defined] = 0.0
        vals[s:s + chunk] = dv.max(axis=0)
    meta = {"words": int(words.shape[0]), "pairs": int(len(I)),
            "max_snap_error": float(A.word_snap_errors.max())
            if len(A.word_snap_errors) else 0.0,
            "decimated_to": int(ctx.k), "sample_points": int(M.m)}
    curve = _curve_from_pairs("equicontinuity", d0, vals, M.scales, meta)
    verdict = _modulus_flag("equicontinuous", curve, float(ctx.Dkk[ctx.Dkk > 0].min())
                            if (ctx.Dkk > 0).any() else np.inf,
                            "snapped word images; " + ctx.note(1.0))
    return curve, verdict


def weak_equicontinuity_modulus(F: SemiDecomposition, M: MetricSample,
                                max_exact: int = MAX_EXACT_POINTS):
    """W(delta) = max over pairs d(x,y) <= delta of d_H(F(x), F(y)).

    Returns (curve, verdict).  Element sets are the stored (snapped) sets,
    so W is dominated by the equicontinuity modulus of any action whose
    orbit semi-decomposition F is.
    """
    ctx = MetricContext(F, M, max_exact=max_exact)
    D = M.dist
    # ps2[i, a] = d(sample[a], F(kept[i])) with full columns
    ps2 = np.empty((ctx.k, M.m))
    for i, x in enumerate(ctx.kept):
        idx = np.flatnonzero(F.member[x])
        ps2[i] = D[:, idx].min(axis=1)
    # directed[i, j] = max_{a in F(kept[i])} d(a, F(kept[j]))
    directed = np.empty((ctx.k, ctx.k))
    for i, x in enumerate(ctx.kept):
        idx = np.flatnonzero(F.member[x])
        directed[:, i] = ps2[:, idx].max(axis=1)
    dh = np.maximum(directed, directed.T)
    I, J, d0 = _pair_arrays(ctx, float(M.scales.max()))
    vals = dh[I, J]
    meta = {"pairs": int(len(I)), "decimated_to": int(ctx.k),
            "sample_points": int(M.m)}
    curve = _curve_from_pairs("weak_equicontinuity", d0, vals, M.scales, meta)
    verdict = _modulus_flag("weakly_equicontinuous", curve,
                            float(ctx.Dkk[ctx.Dkk > 0].min())
                            if (ctx.Dkk > 0).any() else np.inf,
                            "hausdorff distance of stored element sets; "
                            + ctx.note(1.0))
    return curve, verdict


# ---------------------------------------------------------------------------
# distal / regular / recurrence reports
# ---------------------------------------------------------------------------

DISTAL_MAX_POINTS = 768
DISTAL_MAX_WORDS = 512


def distal_report(A: SemiGroupAction, tau: float | None = None,
                  rho: float | None = None,
                  max_exact: int = DISTAL_MAX_POINTS,
                  max_words: int = DISTAL_MAX_WORDS,
                  max_pairs_reported: int = 8) -> Verdict:
    """Search the word set for proximal pairs.

    A pair x != y with d(x, y) >= rho is proximal when some word brings the
    two points within tau.  Distal at scale iff no such pair exists.  On a
    finite-space action the discrete reading is used: a pair is proximal
    when some word image pair has intersecting point closures.
    """
    if isinstance(A.space, FiniteSpace):
        return _distal_finite(A, max_pairs_reported)
    M: MetricSample = A.space
    tau = float(M.scales[min(6, len(M.scales) - 1)]) if tau is None else float(tau)
    rho = float(M.scales[0]) if rho is None else float(rho)
    F = SemiDecomposition(A.orbit_table.sets.copy())
    ctx = MetricContext(F, M, max_exact=max_exact)
    words = A.word_images
    word_stride = max(1, -(-words.shape[0] // max_words))
    words = words[::word_stride, ctx.kept] if word_stride > 1 else words[:, ctx.kept]
    I, J = np.triu_indices(ctx.k, k=1)
    far = ctx.Dkk[I, J] >= rho
    I, J = I[far], J[far]
    D = M.dist
    minima = np.full(len(I), np.inf)
    chunk = max(1, int(2_000_000 / max(1, words.shape[0])))
    for s in range(0, len(I), chunk):
        wi = words[:, I[s:s + chunk]]
        wj = words[:, J[s:s + chunk]]
        defined = (wi >= 0) & (wj >= 0)
        dv = D[np.clip(wi, 0, None), np.clip(wj, 0, None)]
        dv[~defined] = np.inf
        minima[s:s + chunk] = dv.min(axis=0)
    prox = minima < tau
    note = f"tau={tau:g}, rho={rho:g}; words={words.shape[0]}"
    if word_stride > 1:
        note += f" (stride {word_stride} over the word set)"
    note += "; " + ctx.note(1.0)
    if not prox.any():
        return Verdict("distal", True, "at-scale", scale=tau, note=note,
                       data={"pairs_checked": int(len(I))})
    order = np.flatnonzero(prox)[:max_pairs_reported]
    pairs = [{"pair": [int(ctx.kept[I[t]]), int(ctx.kept[J[t]])],
              "initial_distance": float(ctx.Dkk[I[t], J[t]]),
              "min_word_distance": float(minima[t])} for t in order]
    cert = Certificate("distal", "at-scale", scale=tau, note=note,
                       witness={"proximal_pairs": pairs})
    return Verdict("distal", False, "at-scale", scale=tau, certificate=cert,
                   note=note, data={"proximal_count": int(prox.sum()),
                                    "pairs_checked": int(len(I))})


def _distal_finite(A: SemiGroupAction, max_pairs_reported: int) -> Verdict:
    S: FiniteSpace = A.space
    words = A.word_images
    n = S.n
    pairs = []
    for x in range(n):
        for y in range(x + 1, n):
            wx, wy = words[:, x], words[:, y]
            ok = (wx >= 0) & (wy >= 0)
            # closures of the two image points intersect for some word
            meet = (S.leq[:, wx[ok]] & S.leq[:, wy[ok]]).any(axis=0)
            if meet.any():
                w = int(np.flatnonzero(ok)[np.argmax(meet)])
                pairs.append({"pair": [x, y], "word_index": w,
                              "images": [int(words[w, x]), int(words[w, y])]})
    if not pairs:
        return Verdict("distal", True, "exact")
    cert = Certificate("distal", "exact",
                       witness={"proximal_pairs": pairs[:max_pairs_reported]})
    return Verdict("distal", False, "exact", certificate=cert,
                   data={"proximal_count": len(pairs)})


def regular_report(A: SemiGroupAction, S: FiniteSpace | None = None) -> Verdict:
    """Regularity of every point, via the maximal admissible subset P*.

    For a point x and open U, any P with cl(P(x)) inside U is contained in
    P* = {w : cl{w(x)} inside U}, and the neighborhood condition is
    monotone in P, so checking P* suffices.  Exact transformation words are
    required, hence finite backend only.
    """
    S = S if S is not None else A.space
    if not isinstance(S, FiniteSpace):
        raise ValidationError("regularity is finite-backend only")
    if not all(isinstance(g, TableGenerator) for g in A.generators):
        raise ValidationError("regularity needs table generators")
    words = _table_words(A)
    ups = S.up_sets
    for x in range(S.n):
        imgs = words[:, x]
        for U in ups:
            # P* rows: words whose image-point closure stays inside U
            ok = imgs >= 0
            star = np.flatnonzero(ok)[
                ~ (S.leq[:, imgs[ok]] & ~U[:, None]).any(axis=0)
            ]
            if not len(star):
                continue
            found = False
            for V in ups:
                if not V[x]:
                    continue
                imgV = words[np.ix_(star, np.flatnonzero(V))]
                inside = (imgV < 0) | U[np.clip(imgV, 0, None)]
                if inside.all():
                    found = True
                    break
            if not found:
                cert = Certificate(
                    "regular_action", "exact",
                    witness={"point": int(x), "open_set": np.flatnonzero(U).tolist(),
                             "admissible_words": [int(w) for w in star]},
                )
                return Verdict("regular_action", False, "exact", certificate=cert)
    return Verdict("regular_action", True, "exact",
                   data={"semigroup_size": int(words.shape[0])})


def regular_report_bruteforce(A: SemiGroupAction, S: FiniteSpace | None = None,
                              max_words: int = 12) -> Verdict:
    """Oracle: quantify over every subset P of the word set (small systems)."""
    from itertools import combinations

    S = S if S is not None else A.space
    words = _table_words(A)
    if words.shape[0] > max_words:
        raise ValidationError(f"brute force capped at {max_words} words")
    ups = S.up_sets
    all_idx = range(words.shape[0])
    for x in range(S.n):
        for U in ups:
            for r in range(len(list(all_idx)) + 1):
                for P in combinations(all_idx, r):
                    imgs = words[list(P), x] if P else np.empty(0, dtype=int)
                    imgs = imgs[imgs >= 0]
                    if len(imgs) and (S.leq[:, imgs] & ~U[:, None]).any():
                        continue  # not admissible
                    good = False
                    for V in ups:
                        if not V[x]:
                            continue
                        img = words[np.ix_(list(P), np.flatnonzero(V))] if P else None
                        if img is None:
                            good = True
                            break
                        inside = (img < 0) | U[np.clip(img, 0, None)]
                        if inside.all():
                            good = True
                            break
                    if not good:
                        return Verdict("regular_action", False, "exact",
                                       certificate=Certificate(
                                           "regular_action", "exact",
                                           witness={"point": int(x),
                                                    "open_set": np.flatnonzero(U).tolist(),
                                                    "subset": list(map(int, P))}))
    return Verdict("regular_action", True, "exact")


def return_report(A: SemiGroupAction, burn: int = 0,
                  report_exponent: int | None = None,
                  prop: str = "pointwise_periodic",
                  directions: str = "forward") -> Verdict:
    """Every point returns within eps of itself after >= max(burn, 1) steps.

    ``directions="forward"`` inspects the forward iterates (the periodic
    flag); ``"both"`` also accepts backward returns, matching recurrence as
    membership in the forward or backward limit set.
    """
    M = A.space
    if not isinstance(M, MetricSample):
        raise ValidationError("return report needs a metric sample")
    F = SemiDecomposition(A.orbit_table.sets.copy())
    ctx = MetricContext(F, M)
    nf = A.forward_word_rows
    blocks = [A.word_images[1 + burn:nf, ctx.kept]]
    if directions == "both":
        back = A.word_images[nf:, ctx.kept]
        if len(back):
            blocks.append(back[burn:])
    if not any(len(b) for b in blocks):
        raise ValidationError("depth too small for the requested burn-in")
    D = M.dist
    best = np.full(ctx.k, np.inf)
    for block in blocks:
        for row in block:
            ok = row >= 0
            d = np.full(ctx.k, np.inf)
            d[ok] = D[row[ok], ctx.kept[ok]]
            best = np.minimum(best, d)
    rows = []
    for eps in _ladder(M):
        bad = best > eps
        if bad.any():
            x = int(ctx.kept[int(np.argmax(bad))])
            rows.append(ScaleVerdict(eps, False, witness={
                "point": x, "best_return": float(best[int(np.argmax(bad))])}))
        else:
            rows.append(ScaleVerdict(eps, True))
    return _flag_at_report(prop, rows, _report_scale(M, report_exponent),
                           f"burn={burn}; forward iterates; " + ctx.note(1.0))


# ---------------------------------------------------------------------------
# profiles and the implication edge table
# ---------------------------------------------------------------------------

@dataclass
class PropertyProfile:
    instance_name: str
    verdicts: dict                        # property -> Verdict
    space_flags: dict                     # hausdorff / normal / t0 / t1 / ...
    class_space: SeparationFlags | None = None
    curves: dict = field(default_factory=dict)
    structure_flags: dict = field(default_factory=dict)

    def value(self, prop: str):
        v = self.verdicts.get(prop)
        return None if v is None else v.value

    def certificates(self) -> list[Certificate]:
        return [v.certificate for v in self.verdicts.values()
                if v is not None and v.certificate is not None]

    def as_dict(self) -> dict:
        return {
            "instance": self.instance_name,
            "profile": {k: v.as_dict() for k, v in sorted(self.verdicts.items())},
            "space_flags": dict(sorted(self.space_flags.items())),
            "structure_flags": dict(sorted(self.structure_flags.items())),
            "class_space": None if self.class_space is None else self.class_space.as_dict(),
            "curves": {k: c.as_dict() for k, c in sorted(self.curves.items())},
        }


def property_profile(inst: Instance,
                     inflation: float = DEFAULT_INFLATION,
                     report_exponents: dict | None = None,
                     properties: list | None = None) -> PropertyProfile:
    """Evaluate every applicable property of the instance.

    ``report_exponents`` pins the dyadic report scale per property on the
    metric backend (catalog entries supply theirs).  ``properties`` limits
    evaluation to the named ones.
    """
    rexp = dict(report_exponents or {})
    F = inst.semidec
    want = None if properties is None else set(properties)

    def wanted(name):
        return want is None or name in want

    verdicts: dict[str, Verdict] = {}
    curves: dict[str, ModulusCurve] = {}
    class_space = None

    if inst.has_finite:
        S = inst.finite_space
        flags = separation_axioms(S)
        space_flags = dict(flags.as_dict(), metrizable_backend=inst.has_metric,
                           compact_closures=True)
        if wanted("r_closed"):
            verdicts["r_closed"] = is_r_closed(F, S)
        if wanted("char_zero"):
            verdicts["char_zero"] = is_characteristic_zero(F, S)
        if wanted("pointwise_ap"):
            verdicts["pointwise_ap"] = is_pointwise_ap(F, S)
        if wanted("weakly_ap"):
            verdicts["weakly_ap"] = is_weakly_ap(F, S)
        if wanted("minimal"):
            verdicts["minimal"] = is_minimal_sd(F, S)
        parts = class_partition(F, S)
        if wanted("weakly_usc_classes"):
            verdicts["weakly_usc_classes"] = is_weakly_usc(parts, S)
        if wanted("usc_classes"):
            verdicts["usc_classes"] = is_usc(parts, S)
        class_space = quotient_separation(F, S)
    else:
        M = inst.metric_sample
        # metric carriers are metrizable, hence T1..T4 as spaces
        space_flags = dict(t0=True, t1=True, hausdorff=True, regular=True,
                           normal=True, completely_regular_skipped=True,
                           metrizable_backend=True, compact_closures=True)
        ctx = MetricContext(F, M)
        if wanted("r_closed"):
            verdicts["r_closed"] = r_closed_at_scale(
                F, M, R_CLOSED_INFLATION, rexp.get("r_closed"), ctx)
        if wanted("char_zero"):
            verdicts["char_zero"] = char_zero_at_scale(
                F, M, inflation, rexp.get("char_zero"), ctx)
        if wanted("pointwise_ap"):
            verdicts["pointwise_ap"] = pap_at_scale(
                F, M, inflation, rexp.get("pointwise_ap"), ctx)
        if wanted("weakly_ap"):
            verdicts["weakly_ap"] = wap_at_scale(
                F, M, inflation, rexp.get("weakly_ap"), ctx)
        if wanted("minimal"):
            verdicts["minimal"] = minimal_at_scale(F, M, rexp.get("minimal"), ctx)
        for name in ("weakly_usc_classes", "usc_classes"):
            if wanted(name):
                verdicts[name] = Verdict(name, None, "skipped",
                                         note="finite backend only")

    metricM = inst.metric_sample
    if metricM is not None and wanted("weakly_equicontinuous"):
        # moduli pair with the action's word data: use the raw truncated
        # orbit sets, so the domination by the uniform modulus is exact
        Fmod = F if inst.action is None else SemiDecomposition(
            inst.action.orbit_table.sets.copy())
        curve, v = weak_equicontinuity_modulus(Fmod, metricM)
        curves["weak_equicontinuity"] = curve
        verdicts["weakly_equicontinuous"] = v
    A = inst.action
    if A is not None and metricM is not None:
        if wanted("equicontinuous"):
            act = A if A.is_metric else _with_sample(A, metricM)
            curve, v = equicontinuity_modulus(act, metricM)
            curves["equicontinuity"] = curve
            verdicts["equicontinuous"] = v
        if wanted("distal"):
            act = A if A.is_metric else _with_sample(A, metricM)
            verdicts["distal"] = distal_report(act)
        if wanted("pointwise_periodic") and A.is_metric:
            verdicts["pointwise_periodic"] = return_report(
                A, burn=0, report_exponent=rexp.get("pointwise_periodic"))
        if wanted("pointwise_recurrent") and A.is_metric:
            verdicts["pointwise_recurrent"] = return_report(
                A, burn=max(1, A.depth // 4),
                report_exponent=rexp.get("pointwise_recurrent"),
                prop="pointwise_recurrent", directions="both")
    elif A is not None and wanted("distal"):
        verdicts["distal"] = distal_report(A)
    if A is not None and inst.has_finite and wanted("regular_action"):
        if all(isinstance(g, TableGenerator) for g in A.generators):
            verdicts["regular_action"] = regular_report(A, inst.finite_space)
    structure_flags = {
        "decomposition": F.is_decomposition,
        "r_symmetric": _r_symmetric_flag(verdicts, F, inst),
        "r_full": _r_full_flag(F, inst),
        "non_invertible_generators": bool(A.non_invertible) if A is not None else None,
    }
    return PropertyProfile(
        instance_name=inst.name,
        verdicts=verdicts,
        space_flags=space_flags,
        class_space=class_space,
        curves=curves,
        structure_flags=structure_flags,
    )


def _with_sample(A: SemiGroupAction, M: MetricSample) -> SemiGroupAction:
    """Re-house a finite-backend table action on the attached metric sample."""
    from .actions import make_action

    return make_action(A.generators, M, depth=A.depth, snap_tol=A.snap_tol,
                       meta=dict(A.meta))


def _r_symmetric_flag(verdicts, F, inst):
    v = verdicts.get("pointwise_ap")
    if v is None:
        return None
    if inst.has_finite:
        return bool(v.data.get("symmetry_form"))
    return v.value   # the metric PAP check is the symmetry form


def _r_full_flag(F, inst):
    if inst.has_finite:
        C = element_closures(F, inst.finite_space)
        return bool(C.all())
    return None


@dataclass(frozen=True)
class Edge:
    """One guarded implication edge of the relation diagrams.

    ``lhs`` / ``rhs`` are profile flag names (rhs may be a tuple for a
    conjunction); ``kind`` is "implies" or "iff"; ``guard`` names the
    space/structure hypotheses that must hold for the edge to apply.
    """

    name: str
    lhs: str
    rhs: tuple
    kind: str = "implies"
    guard: tuple = ()
    source: str = ""


IMPLICATION_EDGES: tuple[Edge, ...] = (
    Edge("char0_iff_r_closed", "char_zero", ("r_closed",), "iff",
         guard=("hausdorff",),
         source="characteristic 0 and R-closedness coincide on Hausdorff spaces"),
    Edge("pap_iff_symmetric_r", "pointwise_ap", ("r_symmetric",), "iff",
         guard=("hausdorff",),
         source="minimal element closures correspond to a symmetric element "
                "closure relation (diagram context: metrizable carriers; the "
                "two sides genuinely differ on non-T1 spaces)"),
    Edge("wap_iff_pap_and_wusc", "weakly_ap",
         ("pointwise_ap", "weakly_usc_classes"), "iff",
         source="weak almost periodicity is pointwise almost periodicity plus "
                "weak upper semi-continuity of the class decomposition"),
    Edge("wap_implies_class_hausdorff", "weakly_ap", ("class_space_hausdorff",),
         guard=("normal",),
         source="class space of a weakly almost periodic structure on a "
                "normal space is Hausdorff"),
    Edge("wap_implies_r_closed", "weakly_ap", ("r_closed",),
         guard=("hausdorff",),
         source="weak almost periodicity implies R-closedness on Hausdorff spaces"),
    Edge("minimal_implies_core", "minimal",
         ("char_zero", "r_closed", "weakly_ap", "r_full"),
         source="minimal structures are characteristic 0, R-closed, weakly "
                "almost periodic, with full element closure relation"),
    Edge("weak_equicontinuous_implies_char0", "weakly_equicontinuous",
         ("char_zero",), guard=("metrizable_backend",),
         source="weak equicontinuity implies characteristic 0 on metrizable "
                "carriers"),
    Edge("weak_equicontinuous_implies_r_closed", "weakly_equicontinuous",
         ("r_closed",), guard=("metrizable_backend",),
         source="weak equicontinuity implies R-closedness on metrizable carriers"),
    Edge("equicontinuous_implies_weak", "equicontinuous",
         ("weakly_equicontinuous",), guard=("metrizable_backend",),
         source="a uniform modulus for the action dominates the Hausdorff "
                "modulus of its orbit elements"),
    Edge("r_closed_decomposition_implies_wap", "r_closed", ("weakly_ap",),
         guard=("hausdorff", "compact_closures", "decomposition"),
         source="R-closed decompositions with compact element closures on "
                "Hausdorff spaces are weakly almost periodic"),
    Edge("t3_char0_iff_pap_class_hausdorff", "char_zero",
         ("pointwise_ap", "class_space_hausdorff"), "iff",
         guard=("t3", "decomposition"),
         source="on T3 carriers, for decompositions: characteristic 0 iff "
                "pointwise almost periodic with Hausdorff class space"),
)


def _edge_flag(profile: PropertyProfile, name: str):
    if name == "r_symmetric":
        return profile.structure_flags.get("r_symmetric")
    if name == "r_full":
        return profile.structure_flags.get("r_full")
    if name == "class_space_hausdorff":
        return None if profile.class_space is None else profile.class_space.hausdorff
    return profile.value(name)


def _guard_holds(profile: PropertyProfile, guard: tuple):
    sf = profile.space_flags
    for g in guard:
        if g == "t3":
            ok = sf.get("t1") and sf.get("regular")
        elif g == "decomposition":
            ok = profile.structure_flags.get("decomposition")
        else:
            ok = sf.get(g)
        if not ok:
            return False, g
    return True, None


def verify_implications(profile: PropertyProfile,
                        edges: tuple = IMPLICATION_EDGES) -> dict:
    """Check every guarded edge against the profile.

    Returns {"violations": [...], "guards": [...]}: one guard record per
    edge saying whether it applied, was skipped (failed guard or flags not
    evaluated), held, or was violated.  Violations carry the flag values.
    """
    violations = []
    guards = []
    for e in edges:
        applies, failed = _guard_holds(profile, e.guard)
        if not applies:
            guards.append({"edge": e.name, "status": "skipped",
                           "reason": f"guard '{failed}' does not hold"})
            continue
        lhs = _edge_flag(profile, e.lhs)
        rhs_vals = [_edge_flag(profile, r) for r in e.rhs]
        if lhs is None or any(v is None for v in rhs_vals):
            missing = [n for n, v in zip((e.lhs, *e.rhs), (lhs, *rhs_vals))
                       if v is None]
            guards.append({"edge": e.name, "status": "skipped",
                           "reason": f"flags not evaluated: {missing}"})
            continue
        rhs = all(rhs_vals)
        ok = (lhs == rhs) if e.kind == "iff" else ((not lhs) or rhs)
        if ok:
            guards.append({"edge": e.name, "status": "holds"})
        else:
            guards.append({"edge": e.name, "status": "violated"})
            violations.append({
                "edge": e.name,
                "kind": e.kind,
                "lhs": {e.lhs: lhs},
                "rhs": {r: v for r, v in zip(e.rhs, rhs_vals)},
                "source": e.source,
            })
    return {"violations": violations, "guards": guards}
