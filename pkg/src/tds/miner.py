"""Exhaustive verification of the implication edges on small instances.

Every pair (space, structure) with both components drawn from the pre-orders
on n labeled points is evaluated: the space pre-order fixes the topology,
the structure pre-order fixes the semi-decomposition.  The enumerator
composes set partitions with partial orders on the blocks (a pre-order is
exactly an equivalence with a poset on its classes), which makes
completeness easy to audit; an independent brute-force validator filters
every candidate matrix and must report the same counts (1, 4, 29, 355,
6942 for n = 1..5).

The scan is vectorized per space over all structures and checks the same
guarded edge table the profile verifier uses.  Besides violations (expected:
none) it tallies, per implication edge, how often the converse fails, with
a concrete witness each - reproducing the strictness annotations of the
relation diagrams - and it records the empirical status of two questions
the theory leaves open on finite carriers: whether characteristic 0 and
R-closedness ever part ways off Hausdorff spaces, and how often a symmetric
element closure relation fails to be an equivalence there.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from functools import lru_cache
import numpy as np

from .errors import BudgetExceeded
from .props import IMPLICATION_EDGES, Edge
from .relations import bool_mm, subsets_matrix

LABELED_COUNTS = {1: 1, 2: 4, 3: 29, 4: 355, 5: 6942}
DEFAULT_MAX_N = 4
BIG_MAX_N = 5


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _set_partitions(items: tuple):
    """All partitions of ``items`` into nonempty blocks, canonical order."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + ((first,) + part[i],) + part[i + 1:]
        yield ((first,),) + part


@lru_cache(maxsize=None)
def _posets(k: int) -> np.ndarray:
    """All partial orders on k labeled points, (count, k, k) bool array."""
    if k == 0:
        return np.zeros((1, 0, 0), dtype=bool)
    idx = [(i, j) for i in range(k) for j in range(k) if i != j]
    bits = np.arange(1 << len(idx), dtype=np.int64)
    out = []
    batch = 1 << 18
    for s in range(0, len(bits), batch):
        chunk = bits[s:s + batch]
        mats = np.zeros((len(chunk), k, k), dtype=bool)
        mats[:, np.arange(k), np.arange(k)] = True
        for b, (i, j) in enumerate(idx):
            mats[:, i, j] = (chunk >> b) & 1
        m8 = mats.astype(np.uint8)
        transitive = (((m8 @ m8 > 0) | mats) == mats).all(axis=(1, 2))
        antisym = ~((mats & mats.transpose(0, 2, 1))
                    & ~np.eye(k, dtype=bool)).any(axis=(1, 2))
        out.append(mats[transitive & antisym])
    return np.concatenate(out)


def enumerate_preorders(n: int) -> np.ndarray:
    """Every pre-order on n labeled points exactly once, (count, n, n).

    A pre-order is an equivalence (mutual comparability) plus a partial
    order on the classes; enumerate partitions x block posets and expand.
    """
    mats = []
    for part in _set_partitions(tuple(range(n))):
        k = len(part)
        block_of = np.empty(n, dtype=int)
        for bi, block in enumerate(part):
            for x in block:
                block_of[x] = bi
        for P in _posets(k):
            mats.append(P[np.ix_(block_of, block_of)])
    A = np.array(mats)
    return A


def preorder_count_bruteforce(n: int) -> int:
    """Independent validator: filter all 2^(n^2-n) candidate matrices."""
    idx = [(i, j) for i in range(n) for j in range(n) if i != j]
    total = 1 << len(idx)
    count = 0
    batch = 1 << 18
    for s in range(0, total, batch):
        chunk = np.arange(s, min(s + batch, total), dtype=np.int64)
        mats = np.zeros((len(chunk), n, n), dtype=bool)
        mats[:, np.arange(n), np.arange(n)] = True
        for b, (i, j) in enumerate(idx):
            mats[:, i, j] = (chunk >> b) & 1
        m8 = mats.astype(np.uint8)
        count += int((((m8 @ m8 > 0) | mats) == mats).all(axis=(1, 2)).sum())
    return count


# ---------------------------------------------------------------------------
# per-space vectorized evaluation
# ---------------------------------------------------------------------------

def _bmm3(A, B):
    """Batched boolean matmul for (m, n, n) against (n, n) or batched."""
    return (A.astype(np.uint8) @ B.astype(np.uint8)) > 0


@dataclass
class _SpaceData:
    S: np.ndarray
    ups: np.ndarray
    downs: np.ndarray
    hausdorff: bool
    t0: bool
    normal: bool
    regular: bool


def _space_data(S: np.ndarray) -> _SpaceData:
    n = S.shape[0]
    eye = np.eye(n, dtype=bool)
    subs = subsets_matrix(n)
    ups = subs[(bool_mm(subs, S) == subs).all(axis=1)]
    downs = subs[(bool_mm(subs, S.T) == subs).all(axis=1)]
    hausdorff = bool(np.array_equal(S, eye))
    t0 = bool(((S & S.T) == eye).all())

    def separated(A, B):
        ca = ups[~(A & ~ups).any(axis=1)]
        cb = ups[~(B & ~ups).any(axis=1)]
        if not len(ca) or not len(cb):
            return False
        return bool((~bool_mm(ca, cb.T)).any())

    regular = all(
        separated(F, eye[x])
        for F in downs for x in range(n) if not F[x]
    )
    normal = all(
        separated(F, G)
        for i, F in enumerate(downs) for G in downs[i + 1:]
        if not (F & G).any()
    )
    return _SpaceData(S=S, ups=ups, downs=downs, hausdorff=hausdorff,
                      t0=t0, normal=normal, regular=regular)


def evaluate_flags(sd: _SpaceData, structures: np.ndarray) -> dict:
    """All edge-relevant flags for every structure on one space.

    Returns a dict of bool arrays indexed like ``structures``; the flag
    names match the profile verifier's edge table.
    """
    S, ups, downs = sd.S, sd.ups, sd.downs
    m, n, _ = structures.shape
    M = structures.transpose(0, 2, 1)           # member matrices
    C = _bmm3(M, S.T)                           # row x = closure of F(x) = R
    R = C
    Sat = (S[None].astype(np.uint8) @ M.astype(np.uint8)) > 0
    D = _bmm3(Sat, S.T)
    char_zero = (C == D).all(axis=(1, 2))
    prolong_ok = (~(C & ~D)).all(axis=(1, 2))
    down_cl = (S.astype(np.uint8)[None] @ R.astype(np.uint8) @
               S.T.astype(np.uint8)[None]) > 0
    r_closed = (down_cl == R).all(axis=(1, 2))
    r_symmetric = (R == R.transpose(0, 2, 1)).all(axis=(1, 2))
    r_transitive = (~(_bmm3(R, R) & ~R)).all(axis=(1, 2))
    pointwise_ap = r_symmetric & r_transitive   # every element closure minimal
    # weakly almost periodic: PAP and closed saturated closures
    if len(downs):
        satcl = np.einsum("jx,ixz->ijz", downs.astype(np.uint8),
                          C.astype(np.uint8)) > 0
        dcsat = np.einsum("zw,ijw->ijz", S.astype(np.uint8),
                          satcl.astype(np.uint8)) > 0
        closed_sat = (dcsat == satcl).all(axis=(1, 2))
    else:
        closed_sat = np.ones(m, dtype=bool)
    weakly_ap = pointwise_ap & closed_sat
    # classes by closure equality
    eq = (C[:, :, None, :] == C[:, None, :, :]).all(axis=-1)
    eq_dc = _bmm3(eq, S.T)
    closed_elems = (eq_dc == eq).all(axis=(1, 2))
    clsat = np.einsum("vx,ixz->ivz", ups.astype(np.uint8),
                      eq.astype(np.uint8)) > 0
    sat_open = (clsat == ups[None]).all(axis=2)          # (m, #ups)
    in_open = (np.einsum("ixz,uz->ixu", eq.astype(np.uint8),
                         (~ups).astype(np.uint8)) == 0)  # class subset open
    usub = ~((ups[:, None, :] & ~ups[None, :, :]).any(axis=2))
    covered = np.einsum("iv,ixv,vu->ixu", sat_open.astype(np.uint8),
                        in_open.astype(np.uint8),
                        usub.astype(np.uint8)) > 0
    weakly_usc = closed_elems & (~(in_open & ~covered)).all(axis=(1, 2))
    sep = np.einsum("iv,vx,vy->ixy", sat_open.astype(np.uint8),
                    ups.astype(np.uint8), (~ups).astype(np.uint8)) > 0
    class_space_hausdorff = (eq | sep).all(axis=(1, 2))
    minimal = C.all(axis=(1, 2))
    r_full = R.all(axis=(1, 2))
    decomposition = (structures == structures.transpose(0, 2, 1)).all(axis=(1, 2))
    return {
        "char_zero": char_zero,
        "r_closed": r_closed,
        "pointwise_ap": pointwise_ap,
        "weakly_ap": weakly_ap,
        "weakly_usc_classes": weakly_usc,
        "usc_classes": weakly_usc,
        "minimal": minimal,
        "r_symmetric": r_symmetric,
        "r_full": r_full,
        "class_space_hausdorff": class_space_hausdorff,
        "decomposition": decomposition,
        "prolongation_lemma": prolong_ok,
    }


# ---------------------------------------------------------------------------
# scanning
# ---------------------------------------------------------------------------

_FINITE_GUARDS = ("hausdorff", "normal", "t3", "compact_closures",
                  "metrizable_backend", "decomposition")


@dataclass
class ScanReport:
    n: int
    pairs: int
    violations: list = field(default_factory=list)
    edge_stats: dict = field(default_factory=dict)
    strictness: dict = field(default_factory=dict)
    property_counts: dict = field(default_factory=dict)
    open_questions: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "pairs": self.pairs,
            "ok": self.ok,
            "violations": self.violations,
            "edge_stats": {k: dict(sorted(v.items()))
                           for k, v in sorted(self.edge_stats.items())},
            "strictness": {k: dict(sorted(v.items()))
                           for k, v in sorted(self.strictness.items())},
            "property_counts": dict(sorted(self.property_counts.items())),
            "open_questions": {k: dict(sorted(v.items()))
                               for k, v in sorted(self.open_questions.items())},
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def _edge_guard_mask(edge: Edge, sd: _SpaceData, flags: dict, m: int):
    mask = np.ones(m, dtype=bool)
    for g in edge.guard:
        if g == "hausdorff":
            mask &= sd.hausdorff
        elif g == "normal":
            mask &= sd.normal
        elif g == "t3":
            mask &= sd.hausdorff and sd.regular   # finite T1 = discrete
        elif g == "compact_closures":
            pass                                  # automatic on finite carriers
        elif g == "metrizable_backend":
            mask &= sd.hausdorff                  # finite metrizable = discrete
        elif g == "decomposition":
            mask &= flags["decomposition"]
        else:
            mask &= False
    return mask


def scan(n: int, edges: tuple = IMPLICATION_EDGES, big: bool = False,
         budget_ms: float | None = None, max_witnesses: int = 4) -> ScanReport:
    """Evaluate every (space, structure) pre-order pair at size n."""
    limit = BIG_MAX_N if big else DEFAULT_MAX_N
    if n < 1 or n > limit:
        raise BudgetExceeded(
            f"n={n} outside the allowed range 1..{limit}"
            + ("" if big else " (pass big=True / --big for n=5)"))
    if budget_ms is None:
        env = os.environ.get("TDS_BUDGET_MS")
        budget_ms = float(env) if env else None
    t0 = time.time()
    pres = enumerate_preorders(n)
    m = len(pres)
    report = ScanReport(n=n, pairs=m * m)
    edge_stats = {e.name: {"checked": 0, "held": 0, "violated": 0, "skipped": 0}
                  for e in edges}
    strict = {e.name: {"converse_failures": 0, "witnesses": []}
              for e in edges if e.kind == "implies"}
    # strict-inclusion annotations of the relation diagrams
    strict["wap_strictly_above_minimal"] = {"converse_failures": 0, "witnesses": []}
    strict["pap_strictly_above_wap"] = {"converse_failures": 0, "witnesses": []}
    counts: dict[str, int] = {}
    oq = {
        "char0_vs_r_closed_off_hausdorff": {"disagreements": 0, "witnesses": []},
        "symmetric_r_not_equivalence_off_hausdorff": {"count": 0, "witnesses": []},
        "prolongation_lemma_failures": {"count": 0},
    }
    for si in range(m):
        if budget_ms is not None and (time.time() - t0) * 1000 > budget_ms:
            raise BudgetExceeded(
                f"scan exceeded budget of {budget_ms:g} ms at space {si}/{m}")
        sd = _space_data(pres[si])
        flags = evaluate_flags(sd, pres)
        for name, arr in flags.items():
            counts[name] = counts.get(name, 0) + int(arr.sum())
        counts["hausdorff_pairs"] = counts.get("hausdorff_pairs", 0) + (
            m if sd.hausdorff else 0)
        # open questions
        dis = flags["char_zero"] != flags["r_closed"]
        if not sd.hausdorff and dis.any():
            rec = oq["char0_vs_r_closed_off_hausdorff"]
            rec["disagreements"] += int(dis.sum())
            for li in np.flatnonzero(dis)[:max_witnesses]:
                if len(rec["witnesses"]) < max_witnesses:
                    rec["witnesses"].append(_witness(pres, si, int(li), flags))
        symnt = flags["r_symmetric"] & ~flags["pointwise_ap"]
        if not sd.hausdorff and symnt.any():
            rec = oq["symmetric_r_not_equivalence_off_hausdorff"]
            rec["count"] += int(symnt.sum())
            for li in np.flatnonzero(symnt)[:max_witnesses]:
                if len(rec["witnesses"]) < max_witnesses:
                    rec["witnesses"].append(_witness(pres, si, int(li), flags))
        oq["prolongation_lemma_failures"]["count"] += int(
            (~flags["prolongation_lemma"]).sum())
        for key, arr in (
            ("wap_strictly_above_minimal", flags["weakly_ap"] & ~flags["minimal"]),
            ("pap_strictly_above_wap", flags["pointwise_ap"] & ~flags["weakly_ap"]),
        ):
            rec = strict[key]
            rec["converse_failures"] += int(arr.sum())
            for li in np.flatnonzero(arr)[:max_witnesses]:
                if len(rec["witnesses"]) < max_witnesses:
                    rec["witnesses"].append(_witness(pres, si, int(li), flags))
        # edges
        for e in edges:
            st = edge_stats[e.name]
            lhs = flags.get(e.lhs)
            rhs_arrays = [flags.get(r) for r in e.rhs]
            if lhs is None or any(a is None for a in rhs_arrays):
                st["skipped"] += m
                continue
            mask = _edge_guard_mask(e, sd, flags, m)
            st["skipped"] += int((~mask).sum())
            st["checked"] += int(mask.sum())
            rhs = rhs_arrays[0]
            for a in rhs_arrays[1:]:
                rhs = rhs & a
            if e.kind == "iff":
                viol = mask & (lhs != rhs)
            else:
                viol = mask & lhs & ~rhs
                conv = mask & rhs & ~lhs
                rec = strict[e.name]
                rec["converse_failures"] += int(conv.sum())
                for li in np.flatnonzero(conv)[:max_witnesses]:
                    if len(rec["witnesses"]) < max_witnesses:
                        rec["witnesses"].append(
                            _witness(pres, si, int(li), flags))
            nv = int(viol.sum())
            st["violated"] += nv
            st["held"] += int(mask.sum()) - nv
            if nv:
                for li in np.flatnonzero(viol)[:max_witnesses]:
                    if len(report.violations) < 64:
                        w = _witness(pres, si, int(li), flags)
                        w["edge"] = e.name
                        report.violations.append(w)
    report.edge_stats = edge_stats
    report.strictness = strict
    report.property_counts = counts
    report.open_questions = oq
    report.elapsed_seconds = time.time() - t0
    return report


def _witness(pres: np.ndarray, si: int, li: int, flags: dict) -> dict:
    return {
        "space_index": si,
        "structure_index": li,
        "space_leq": pres[si].astype(int).tolist(),
        "structure_leq": pres[li].astype(int).tolist(),
        "flags": {k: bool(v[li]) for k, v in sorted(flags.items())},
    }


def count_report(n: int, big: bool = False) -> dict:
    """Property counts over all pairs at size n (stable across runs)."""
    rep = scan(n, big=big)
    return {
        "n": n,
        "pairs": rep.pairs,
        "property_counts": dict(sorted(rep.property_counts.items())),
    }
