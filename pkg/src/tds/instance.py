"""Instance bundle: a carrier space plus the structure living on it.

An instance always has a semi-decomposition (given directly or induced as
the orbit semi-decomposition of an action).  It may carry a finite space,
a metric sample, or both; the two-point machine, for example, is exact as
a finite space but also ships a discrete metric so the modulus checkers
apply to it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actions import SemiGroupAction, orbit_semidecomposition
from .errors import ValidationError
from .semidec import SemiDecomposition
from .spaces import FiniteSpace, MetricSample


@dataclass(eq=False)
class Instance:
    name: str = "instance"
    finite_space: FiniteSpace | None = None
    metric_sample: MetricSample | None = None
    action: SemiGroupAction | None = None
    semidec: SemiDecomposition | None = None
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.finite_space is None and self.metric_sample is None:
            raise ValidationError("instance needs a finite space or a metric sample")
        if self.semidec is None:
            if self.action is None:
                raise ValidationError("instance needs a semi-decomposition or an action")
            self.semidec = orbit_semidecomposition(self.action)
        n = self.semidec.n
        if self.finite_space is not None and self.finite_space.n != n:
            raise ValidationError("finite space size differs from structure size")
        if self.metric_sample is not None and self.metric_sample.m != n:
            raise ValidationError("metric sample size differs from structure size")

    @property
    def n(self) -> int:
        return self.semidec.n

    @property
    def has_finite(self) -> bool:
        return self.finite_space is not None

    @property
    def has_metric(self) -> bool:
        return self.metric_sample is not None

    def __repr__(self):
        backends = "+".join(
            b for b, ok in (("finite", self.has_finite), ("metric", self.has_metric)) if ok
        )
        return f"Instance({self.name!r}, n={self.n}, {backends})"
