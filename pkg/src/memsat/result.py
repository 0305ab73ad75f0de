from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .formula import Assignment


@dataclass(frozen=True)
class RunResult:
    """Outcome of one solver run."""

    engine: str  # "float" or "fixed"
    num_vars: int
    num_clauses: int
    seed: int
    solved: bool
    steps: int
    wall_time: float
    assignment: Optional[Assignment]
    instance_seed: Optional[int] = None
    instance_id: Optional[str] = None

    def to_dict(self, include_assignment: bool = True) -> dict:
        d = asdict(self)
        if self.assignment is not None and include_assignment:
            d["assignment"] = [1 if b else -1 for b in self.assignment]
        else:
            d["assignment"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunResult:
        d = dict(d)
        if d.get("assignment") is not None:
            d["assignment"] = tuple(x > 0 for x in d["assignment"])
        return cls(**d)
