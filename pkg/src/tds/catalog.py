"""Builders for the example systems, each with its expected profile.

Every entry records only the properties actually claimed for it (tri-state:
True / False / None-unclaimed) together with the dyadic report exponent the
claim is checked at.  Scale pins matter: witnesses live at specific scales
(the sphere system fails R-closedness through near-equator limits that only
coarse scales resolve), and density claims hold from some scale upward.

Numerical conventions fixed here:
  * the toral speed profile reads the first coordinate through cos(2*pi*x)
    so it is well-defined on the unit torus; speeds stay in [1, 3];
  * the sphere rotation speed is z^2 (zero exactly on the equator, one at
    the poles, which are fixed anyway);
  * the circle-with-inserted-intervals system stores the same-interval
    endpoint gaps exactly as the defining lengths 1/(1+n^2), so iterated
    endpoint distances are reproducible to the bit;
  * maps of truncated systems are partial: images that would leave the
    sample are dropped and the truncation is recorded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import FormulaGenerator, SemiGroupAction, TableGenerator, make_action
from .errors import UnknownEntry, ValidationError
from .instance import Instance
from .spaces import (
    CircleMetric,
    CubicMetric,
    EuclideanMetric,
    TorusMetric,
    default_scale_ladder,
    discrete_space,
    make_metric_sample,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    summary: str
    builder: object
    defaults: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)      # property -> True/False/None
    report_exponents: dict = field(default_factory=dict)
    notes: str = ""

    def build(self, **params) -> Instance:
        merged = dict(self.defaults)
        for k, v in params.items():
            if k not in self.defaults:
                raise ValidationError(f"unknown parameter {k!r} for {self.name}")
            merged[k] = type(self.defaults[k])(v)
        inst = self.builder(**merged)
        inst.params = merged
        return inst


# ---------------------------------------------------------------------------
# finite machine
# ---------------------------------------------------------------------------

def two_point_machine() -> Instance:
    """Two discrete points with the collapse map f(0) = f(1) = 0."""
    S = discrete_space(2)
    M = make_metric_sample(
        points=np.array([[0.0], [1.0]]),
        metric="matrix",
        matrix=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )
    A = make_action([TableGenerator(np.array([0, 0]), name="collapse")], S, depth=8)
    return Instance(name="two_point_machine", finite_space=S, metric_sample=M,
                    action=A)


# ---------------------------------------------------------------------------
# contraction
# ---------------------------------------------------------------------------

def contraction(C: float = 0.5, m: int = 64, depth: int = 96) -> Instance:
    """x -> C x on the geometric sample {C^k} plus the fixed point 0."""
    if not 0.0 < C < 1.0:
        raise ValidationError("contraction factor must lie in (0, 1)")
    pts = np.array([C ** k for k in range(m - 1)] + [0.0])
    M = make_metric_sample(points=pts, metric="euclidean")
    gen = FormulaGenerator(fn=lambda c: C * c, name="contract", params={"C": C})
    A = make_action([gen], M, depth=depth)
    return Instance(name="contraction", metric_sample=M, action=A)


# ---------------------------------------------------------------------------
# toral flow and its time-one map
# ---------------------------------------------------------------------------

def _torus_grid(grid: int):
    xs = np.arange(grid) / grid
    px, py = np.meshgrid(xs, xs, indexing="ij")
    return np.stack([px.ravel(), py.ravel()], axis=1)


def _torus_snapper(grid: int, metric: TorusMetric):
    def snap(coords):
        c = np.mod(coords, 1.0)
        ij = np.mod(np.rint(c * grid).astype(int), grid)
        idx = ij[:, 0] * grid + ij[:, 1]
        res = np.abs(c - ij / grid)
        res = np.minimum(res, 1.0 - res)
        return idx, np.sqrt((res ** 2).sum(axis=1))
    return snap


def _toral_speed(x):
    return 2.0 + np.cos(2.0 * math.pi * x)


def _toral_step(dt: float):
    def step(c):
        x, y = c[:, 0], c[:, 1]
        return np.stack([x, np.mod(y + _toral_speed(x) * dt, 1.0)], axis=1)
    return step


def toral_flow(grid: int = 64, dt: float = 0.01, depth: int = 1000) -> Instance:
    """Vertical flow on the unit torus with fiber-dependent speed.

    Each vertical fiber is rotated rigidly at speed 2 + cos(2 pi x), so all
    orbits are periodic circles while nearby fibers drift apart linearly in
    time.
    """
    if grid < 16:
        raise ValidationError("grid must be at least 16")
    pts = _torus_grid(grid)
    tm = TorusMetric([1.0, 1.0])
    D = tm.pairwise(pts, pts)
    M = make_metric_sample(points=pts, metric="matrix", matrix=D,
                           coord_metric=tm, snapper=_torus_snapper(grid, tm),
                           meta={"grid": grid})
    gens = [
        FormulaGenerator(fn=_toral_step(dt), name="flow_step", params={"dt": dt}),
        FormulaGenerator(fn=_toral_step(-dt), name="flow_step_inverse",
                         params={"dt": -dt}),
    ]
    A = make_action(gens, M, depth=depth, meta={"dt": dt})
    return Instance(name="toral_flow", metric_sample=M, action=A)


def time_one_toral_map(grid: int = 64, depth: int = 1000) -> Instance:
    """Time-one map of the toral flow (fiberwise rotation by 2 + cos 2 pi x)."""
    if grid < 16:
        raise ValidationError("grid must be at least 16")
    pts = _torus_grid(grid)
    tm = TorusMetric([1.0, 1.0])
    D = tm.pairwise(pts, pts)
    M = make_metric_sample(points=pts, metric="matrix", matrix=D,
                           coord_metric=tm, snapper=_torus_snapper(grid, tm),
                           meta={"grid": grid})
    gens = [
        FormulaGenerator(fn=_toral_step(1.0), name="time_one"),
        FormulaGenerator(fn=_toral_step(-1.0), name="time_one_inverse"),
    ]
    A = make_action(gens, M, depth=depth)
    return Instance(name="time_one_toral_map", metric_sample=M, action=A)


# ---------------------------------------------------------------------------
# sphere flow
# ---------------------------------------------------------------------------

def _sphere_points(lat_grid: int, lon_grid: int):
    lats = [-math.pi / 2 + j * math.pi / lat_grid for j in range(lat_grid + 1)]
    pts = [(0.0, 0.0, -1.0)]
    ring_of = [0]          # ring index per point, poles get their own codes
    for j, phi in enumerate(lats):
        if j in (0, lat_grid):
            continue
        for s in range(lon_grid):
            lam = 2.0 * math.pi * s / lon_grid
            pts.append((math.cos(phi) * math.cos(lam),
                        math.cos(phi) * math.sin(lam),
                        math.sin(phi)))
            ring_of.append(j)
    pts.append((0.0, 0.0, 1.0))
    ring_of.append(lat_grid)
    return np.array(pts), np.array(ring_of)


def _sphere_snapper(lat_grid: int, lon_grid: int, points: np.ndarray):
    def snap(coords):
        z = np.clip(coords[:, 2], -1.0, 1.0)
        phi = np.arcsin(z)
        j = np.clip(np.rint((phi + math.pi / 2) / (math.pi / lat_grid)).astype(int),
                    0, lat_grid)
        lam = np.mod(np.arctan2(coords[:, 1], coords[:, 0]), 2.0 * math.pi)
        s = np.mod(np.rint(lam / (2.0 * math.pi / lon_grid)).astype(int), lon_grid)
        idx = np.where(j == 0, 0,
                       np.where(j == lat_grid, len(points) - 1,
                                1 + (j - 1) * lon_grid + s))
        d = np.sqrt(((coords - points[idx]) ** 2).sum(axis=1))
        return idx, d
    return snap


def _sphere_step(dt: float):
    def step(c):
        x, y, z = c[:, 0], c[:, 1], c[:, 2]
        a = z * z * dt                  # rotation speed vanishes on the equator
        ca, sa = np.cos(a), np.sin(a)
        return np.stack([x * ca - y * sa, x * sa + y * ca, z], axis=1)
    return step


def sphere_flow(lat_grid: int = 16, lon_grid: int = 32, dt: float = 0.05,
                depth: int = 1000) -> Instance:
    """Latitude-preserving rotation flow on the unit sphere.

    Rotation speed z^2: the poles and the whole equator are fixed, every
    other latitude circle rotates, faster toward the poles.  Chordal metric.
    """
    if lat_grid < 16 or lon_grid < 16:
        raise ValidationError("grids must be at least 16")
    pts, rings = _sphere_points(lat_grid, lon_grid)
    M = make_metric_sample(points=pts, metric="euclidean",
                           coord_metric=EuclideanMetric(),
                           snapper=_sphere_snapper(lat_grid, lon_grid, pts),
                           meta={"lat_grid": lat_grid, "lon_grid": lon_grid,
                                 "rings": rings.tolist()})
    gens = [
        FormulaGenerator(fn=_sphere_step(dt), name="rotate", params={"dt": dt}),
        FormulaGenerator(fn=_sphere_step(-dt), name="rotate_inverse",
                         params={"dt": -dt}),
    ]
    A = make_action(gens, M, depth=depth, meta={"dt": dt})
    return Instance(name="sphere_flow", metric_sample=M, action=A)


# ---------------------------------------------------------------------------
# circle with inserted intervals (minimal Cantor-like system)
# ---------------------------------------------------------------------------

def denjoy(r: float = GOLDEN, N: int = 32, depth: int = 96) -> Instance:
    """Irrational rotation blown up along one orbit, truncated to |n| <= N.

    An interval of length 1/(1+n^2) is inserted at the n-th rotation image
    of 0; the sample is the set of inserted-interval endpoints and the map
    sends the endpoints of the n-th interval to those of the (n+1)-st,
    undefined past the truncation boundary.  Same-interval endpoint gaps
    are stored exactly as the defining lengths.
    """
    if N < 8:
        raise ValidationError("need N >= 8")
    ns = list(range(-N, N + 1))
    lens = {n: 1.0 / (1.0 + n * n) for n in ns}
    pos0 = {n: (n * r) % 1.0 for n in ns}
    left = {}
    for n in ns:
        left[n] = pos0[n] + sum(lens[m] for m in ns if pos0[m] < pos0[n])
    circumference = 1.0 + sum(lens.values())
    pts, names = [], []
    index = {}
    for n in ns:
        index[("L", n)] = len(pts)
        pts.append(left[n])
        names.append(f"L{n}")
        index[("R", n)] = len(pts)
        pts.append(left[n] + lens[n])
        names.append(f"R{n}")
    pts = np.array(pts)
    cm = CircleMetric(circumference)
    D = cm.pairwise(pts, pts)
    for n in ns:
        i, j = index[("L", n)], index[("R", n)]
        D[i, j] = D[j, i] = lens[n]     # defining gap, exact by construction
    M = make_metric_sample(points=pts, metric="matrix", matrix=D,
                           coord_metric=cm,
                           meta={"N": N, "rotation": r,
                                 "circumference": circumference,
                                 "labels": names,
                                 "inserted_length_total": circumference - 1.0})
    m = len(pts)
    fwd = np.full(m, -1, dtype=int)
    bwd = np.full(m, -1, dtype=int)
    for n in ns:
        for side in ("L", "R"):
            if n + 1 in lens:
                fwd[index[(side, n)]] = index[(side, n + 1)]
            if n - 1 in lens:
                bwd[index[(side, n)]] = index[(side, n - 1)]
    A = make_action(
        [TableGenerator(fwd, name="rotate"), TableGenerator(bwd, name="rotate_inverse")],
        M, depth=depth,
        meta={"truncation": f"images past |n|={N} dropped"},
    )
    inst = Instance(name="denjoy", metric_sample=M, action=A)
    inst.meta["endpoint_index"] = {f"{s}{n}": i for (s, n), i in index.items()}
    return inst


# ---------------------------------------------------------------------------
# cantor set with the cube-distorted metric and translation
# ---------------------------------------------------------------------------

def _cantor_level(level: int) -> np.ndarray:
    vals = [0.0]
    for i in range(level):
        step = 2.0 / 3.0 ** (i + 1)
        vals = [v for v in vals] + [v + step for v in vals]
    return np.sort(np.array(vals))


def cubic_metric_shift(level: int = 5, N: int = 8, depth: int = 16) -> Instance:
    """Translation x -> x + 2 on Cantor-set translates, metric |x^3 - y^3|.

    The metric is the pullback of the line metric under x -> x^3, so far
    translates are hugely magnified; the translation is an isometry of the
    plain line but not of this metric.
    """
    if level > 8 or N > 16:
        raise ValidationError("level <= 8 and N <= 16")
    base = _cantor_level(level)
    k = len(base)
    pts = np.concatenate([base + 2.0 * n for n in range(-N, N + 1)])
    M = make_metric_sample(points=pts, metric="cubic",
                           coord_metric=CubicMetric(),
                           meta={"level": level, "N": N})
    m = len(pts)
    fwd = np.full(m, -1, dtype=int)
    bwd = np.full(m, -1, dtype=int)
    for t in range(2 * N + 1):
        sl = slice(t * k, (t + 1) * k)
        if t + 1 <= 2 * N:
            fwd[sl] = np.arange((t + 1) * k, (t + 2) * k)
        if t - 1 >= 0:
            bwd[sl] = np.arange((t - 1) * k, t * k)
    A = make_action(
        [TableGenerator(fwd, name="shift"), TableGenerator(bwd, name="shift_inverse")],
        M, depth=depth,
        meta={"truncation": f"images past |n|={N} dropped"},
    )
    return Instance(name="cubic_metric_shift", metric_sample=M, action=A)


# ---------------------------------------------------------------------------
# punctured irrational flow
# ---------------------------------------------------------------------------

def _punctured_field(theta: float, sigma: float, p0):
    p0 = np.asarray(p0)

    def field(c):
        d = np.abs(c - p0)
        d = np.minimum(d, 1.0 - d)
        damp = 1.0 - np.exp(-(d ** 2).sum(axis=1) / sigma ** 2)
        return damp[:, None] * np.array([1.0, theta])
    return field


def _rk4_step(field, dt: float):
    def step(c):
        k1 = field(c)
        k2 = field(np.mod(c + 0.5 * dt * k1, 1.0))
        k3 = field(np.mod(c + 0.5 * dt * k2, 1.0))
        k4 = field(np.mod(c + dt * k3, 1.0))
        return np.mod(c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 1.0)
    return step


def punctured_irrational_flow(theta: float = GOLDEN, grid: int = 32,
                              dt: float = 0.02, depth: int = 2500,
                              sigma: float = 0.06) -> Instance:
    """Irrational-slope torus flow slowed to a halt at one point.

    The constant field (1, theta) is damped by 1 - exp(-d^2 / sigma^2)
    around the marked point, which becomes the unique fixed point; all
    other orbits stay dense.  Fourth-order fixed-step integration.
    """
    if grid < 32:
        raise ValidationError("grid must be at least 32")
    pts = _torus_grid(grid)
    tm = TorusMetric([1.0, 1.0])
    D = tm.pairwise(pts, pts)
    p0 = (0.5, 0.5)
    M = make_metric_sample(points=pts, metric="matrix", matrix=D,
                           coord_metric=tm, snapper=_torus_snapper(grid, tm),
                           meta={"grid": grid, "fixed_point": list(p0)})
    field = _punctured_field(theta, sigma, p0)
    gens = [
        FormulaGenerator(fn=_rk4_step(field, dt), name="flow_step",
                         params={"dt": dt}),
        FormulaGenerator(fn=_rk4_step(field, -dt), name="flow_step_inverse",
                         params={"dt": -dt}),
    ]
    A = make_action(gens, M, depth=depth, meta={"dt": dt, "sigma": sigma})
    inst = Instance(name="punctured_irrational_flow", metric_sample=M, action=A)
    inst.meta["fixed_point_index"] = int((0.5 * grid) * grid + 0.5 * grid)
    return inst


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

ENTRIES: dict[str, CatalogEntry] = {}


def _register(entry: CatalogEntry):
    ENTRIES[entry.name] = entry
    return entry


_register(CatalogEntry(
    name="two_point_machine",
    summary="collapse map on two discrete points",
    builder=lambda: two_point_machine(),
    defaults={},
    expected={"equicontinuous": True, "r_closed": True, "char_zero": True,
              "distal": False, "pointwise_ap": False, "weakly_ap": False,
              "regular_action": True},
))

_register(CatalogEntry(
    name="contraction",
    summary="linear contraction on a geometric sample with its fixed point",
    builder=contraction,
    defaults={"C": 0.5, "m": 64, "depth": 96},
    expected={"equicontinuous": True, "distal": False, "pointwise_ap": False,
              "weakly_ap": False, "r_closed": True, "char_zero": True,
              "minimal": False},
))

_register(CatalogEntry(
    name="toral_flow",
    summary="fiberwise periodic toral flow with fiber-dependent speed",
    builder=toral_flow,
    defaults={"grid": 64, "dt": 0.01, "depth": 1000},
    expected={"distal": True, "r_closed": True, "pointwise_periodic": True,
              "equicontinuous": False, "weakly_ap": True},
    report_exponents={"r_closed": 5, "char_zero": 5, "pointwise_ap": 5,
                      "weakly_ap": 5},
))

_register(CatalogEntry(
    name="time_one_toral_map",
    summary="time-one map of the toral flow",
    builder=time_one_toral_map,
    defaults={"grid": 64, "depth": 1000},
    expected={"r_closed": False},
    report_exponents={"r_closed": 5, "char_zero": 5, "pointwise_ap": 5,
                      "weakly_ap": 5},
))

_register(CatalogEntry(
    name="sphere_flow",
    summary="latitude rotation flow on the sphere, equator and poles fixed",
    builder=sphere_flow,
    defaults={"lat_grid": 16, "lon_grid": 32, "dt": 0.05, "depth": 1000},
    expected={"distal": True, "r_closed": False, "pointwise_ap": True,
              "equicontinuous": False},
    report_exponents={"r_closed": 3, "char_zero": 3, "pointwise_ap": 5,
                      "weakly_ap": 5},
    notes="the non-closedness witness needs the coarse scale that sees "
          "latitude limits onto the equator; the almost-periodicity claim "
          "lives at the scale where single latitude circles are resolved",
))

_register(CatalogEntry(
    name="denjoy",
    summary="irrational rotation blown up along an orbit, endpoint sample",
    builder=denjoy,
    defaults={"r": GOLDEN, "N": 32, "depth": 96},
    expected={"minimal": True, "r_closed": True, "weakly_ap": True,
              "distal": False, "weakly_equicontinuous": None},
    report_exponents={"minimal": 6, "r_closed": 6, "pointwise_ap": 6,
                      "weakly_ap": 6},
    notes="weak-equicontinuity verdict left unclaimed: truncated orbits "
          "interleave densely, so the modulus may stay small at small "
          "depth; the curve is emitted for inspection",
))

_register(CatalogEntry(
    name="cubic_metric_shift",
    summary="translation on Cantor-set translates under the cube metric",
    builder=cubic_metric_shift,
    defaults={"level": 5, "N": 8, "depth": 16},
    expected={"r_closed": True, "weakly_equicontinuous": False},
    report_exponents={"r_closed": 3, "char_zero": 3, "pointwise_ap": 3,
                      "weakly_ap": 3},
    notes="fine scales distort translate alignment (the cube metric "
          "magnifies far translates), so the closedness claim is pinned "
          "at a coarse scale",
))

_register(CatalogEntry(
    name="punctured_irrational_flow",
    summary="irrational torus flow damped to a halt at one marked point",
    builder=punctured_irrational_flow,
    defaults={"theta": GOLDEN, "grid": 32, "dt": 0.02, "depth": 2500,
              "sigma": 0.06},
    expected={"pointwise_recurrent": True, "pointwise_ap": False},
    report_exponents={"pointwise_ap": 4, "pointwise_recurrent": 4,
                      "r_closed": 4, "char_zero": 4, "weakly_ap": 4},
))


def entry_names() -> list[str]:
    return sorted(ENTRIES)


def lookup(name: str) -> CatalogEntry:
    if name not in ENTRIES:
        raise UnknownEntry(f"no catalog entry named {name!r}; "
                           f"known: {', '.join(entry_names())}")
    return ENTRIES[name]


def build(name: str, **params) -> Instance:
    return lookup(name).build(**params)


def expected_profiles() -> dict[str, dict]:
    """Machine-readable expectations, consumed by the acceptance suite."""
    return {
        name: {
            "expected": dict(e.expected),
            "report_exponents": dict(e.report_exponents),
            "defaults": dict(e.defaults),
            "notes": e.notes,
        }
        for name, e in sorted(ENTRIES.items())
    }
