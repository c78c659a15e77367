"""Verdict, certificate, and modulus-curve containers for property checks.

Finite-backend verdicts are exact booleans.  Metric-backend verdicts are
"at-scale": each ladder scale gets its own pass/fail with a vacuity marker
(a scale below the sample resolution cannot witness anything), and the
summary flag never extrapolates beyond the ladder.  Every False carries a
Certificate whose payload suffices to re-derive the failure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass(frozen=True)
class Certificate:
    property: str
    kind: str                     # "exact" or "at-scale"
    witness: dict = field(default_factory=dict)
    scale: float | None = None
    note: str = ""

    def as_dict(self) -> dict:
        d = {
            "property": self.property,
            "kind": self.kind,
            "witness": _jsonable(self.witness),
        }
        if self.scale is not None:
            d["scale"] = float(self.scale)
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class ScaleVerdict:
    scale: float
    passed: bool
    vacuous: bool = False
    witness: dict | None = None

    def as_dict(self) -> dict:
        d = {"scale": float(self.scale), "passed": bool(self.passed),
             "vacuous": bool(self.vacuous)}
        if self.witness is not None:
            d["witness"] = _jsonable(self.witness)
        return d


@dataclass
class Verdict:
    """Outcome of one property check.

    ``value`` is True/False, or None when the check was skipped (with the
    reason in ``note``) or deliberately left unclaimed.
    """

    property: str
    value: bool | None
    kind: str                     # "exact" | "at-scale" | "skipped"
    scale: float | None = None
    certificate: Certificate | None = None
    note: str = ""
    data: dict = field(default_factory=dict)
    scales: list = field(default_factory=list)   # list[ScaleVerdict]

    def __bool__(self):
        return bool(self.value)

    def as_dict(self) -> dict:
        d = {"property": self.property, "value": self.value, "kind": self.kind}
        if self.scale is not None:
            d["scale"] = float(self.scale)
        if self.note:
            d["note"] = self.note
        if self.certificate is not None:
            d["certificate"] = self.certificate.as_dict()
        if self.data:
            d["data"] = _jsonable(self.data)
        if self.scales:
            d["scales"] = [s.as_dict() for s in self.scales]
        return d


def aggregate_scales(prop: str, rows: list[ScaleVerdict], kind_note: str = "") -> Verdict:
    """Summary flag over ladder scales.

    Fails at the coarsest failing scale; passes when every non-vacuous
    scale passes; a ladder that is vacuous throughout passes with a note.
    """
    failing = [r for r in rows if not r.vacuous and not r.passed]
    if failing:
        worst = failing[0]
        cert = Certificate(
            property=prop, kind="at-scale", witness=worst.witness or {},
            scale=worst.scale, note=kind_note,
        )
        return Verdict(prop, False, "at-scale", scale=worst.scale,
                       certificate=cert, scales=rows, note=kind_note)
    if all(r.vacuous for r in rows):
        return Verdict(prop, True, "at-scale", scales=rows,
                       note=(kind_note + " " if kind_note else "")
                       + "vacuous at every ladder scale")
    return Verdict(prop, True, "at-scale", scales=rows, note=kind_note)


@dataclass
class ModulusCurve:
    """Pairs (delta, value) over the scale ladder, nondecreasing in delta."""

    name: str
    deltas: np.ndarray            # ascending
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if (np.diff(self.deltas) <= 0).any():
            raise ValueError("curve deltas must be ascending")
        if (np.diff(self.values) < -1e-12).any():
            raise ValueError("modulus curve must be nondecreasing in delta")
        if (self.values < 0).any():
            raise ValueError("modulus values must be nonnegative")

    def value_at(self, delta: float) -> float:
        i = int(np.searchsorted(self.deltas, delta, side="right")) - 1
        if i < 0:
            return 0.0
        return float(self.values[i])

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "pairs": [[float(d), float(v)] for d, v in zip(self.deltas, self.values)],
            "meta": _jsonable(self.meta),
        }

    def csv_rows(self):
        yield "delta,value"
        for d, v in zip(self.deltas, self.values):
            yield f"{d!r},{v!r}"
