"""Result rows shared by the audits and the CSV writers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def safe_ratio(lhs: float, rhs: float) -> float:
    """lhs / rhs with 0/0 -> 0 (a vanishing commutator against vanishing data)."""
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


@dataclass
class AuditRecord:
    """One evaluation of an inequality: lhs, named right-hand factors, and their ratio."""

    estimate: str
    lhs: float
    factors: dict[str, float]
    rhs: float
    seed: int | None = None
    params: dict = field(default_factory=dict)
    ratio_lower: float | None = None
    ratio: float = field(init=False)

    def __post_init__(self):
        self.ratio = safe_ratio(self.lhs, self.rhs)

    def row(self) -> dict:
        out = {"estimate": self.estimate, "seed": self.seed}
        out.update(self.params)
        out["lhs"] = self.lhs
        out.update(self.factors)
        out["rhs"] = self.rhs
        out["ratio"] = self.ratio
        if self.ratio_lower is not None:
            out["ratio_lower"] = self.ratio_lower
        return out
