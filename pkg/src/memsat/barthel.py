"""Planted-solution random 3-SAT instances (Barthel et al. construction).

A hidden assignment is drawn first; every clause is then built so that it
contains ``t`` literals satisfied by the hidden assignment, with class ``t``
chosen from per-pattern probabilities ``(p0, p1, p2, p3)``. With ``p0 = 0``
the planted assignment satisfies every clause. The defaults
``(0, 1/6, 1/6, 0)`` make a random literal equally likely to agree or
disagree with the planted value, so local field statistics carry no
information about it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

from .formula import Assignment, Formula, evaluate
from .rng import SplitMix64

DEFAULT_RATIO = Fraction(43, 10)


def default_type_probs() -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Zero-bias probabilities with ``p0 = p3 = 0`` and ``p1 = p2``.

    From ``3 p1 + 3 p2 = 1`` and ``3 p1 + 6 p2 = 3/2``: ``p2 = 1/6``, ``p1 = 1/6``.
    """
    return (Fraction(0), Fraction(1, 6), Fraction(1, 6), Fraction(0))


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        # 4.3 should mean 43/10, not the nearest binary double
        return Fraction(repr(x))
    return Fraction(x)


def num_clauses_for(num_vars: int, ratio) -> int:
    """``round(ratio * N)`` with ties rounded up."""
    x = as_fraction(ratio) * num_vars
    return int((x + Fraction(1, 2)).__floor__())


@dataclass(frozen=True)
class GeneratorConfig:
    num_vars: int
    ratio: Fraction = DEFAULT_RATIO
    seed: int = 0
    type_probs: tuple[Fraction, Fraction, Fraction, Fraction] = field(
        default_factory=default_type_probs
    )

    def __post_init__(self):
        object.__setattr__(self, "ratio", as_fraction(self.ratio))
        object.__setattr__(
            self, "type_probs", tuple(as_fraction(p) for p in self.type_probs)
        )
        self.validate()

    def validate(self) -> None:
        if self.num_vars < 3:
            raise ValueError(f"need N >= 3, got {self.num_vars}")
        if self.ratio <= 0:
            raise ValueError(f"ratio must be positive, got {self.ratio}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        probs = self.type_probs
        if len(probs) != 4 or any(p < 0 for p in probs):
            raise ValueError(f"type_probs must be 4 non-negative values, got {probs}")
        if probs[0] != 0:
            raise ValueError("p0 must be 0 so the planted assignment satisfies every clause")
        if sum(comb(3, t) * p for t, p in enumerate(probs)) != 1:
            raise ValueError("type_probs violate normalization 3*p1 + 3*p2 + p3 = 1")

    @property
    def num_clauses(self) -> int:
        return num_clauses_for(self.num_vars, self.ratio)


@dataclass(frozen=True)
class PlantedInstance:
    formula: Formula
    planted: Assignment
    seed: int
    ratio: Fraction = DEFAULT_RATIO

    def sidecar(self) -> dict:
        """JSON-ready metadata written next to the DIMACS file."""
        return {
            "seed": self.seed,
            "N": self.formula.num_vars,
            "M": self.formula.num_clauses,
            "ratio": str(self.ratio),
            "planted": [1 if b else -1 for b in self.planted],
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=2) + "\n"


def _class_table(probs) -> tuple[list[int], int]:
    """Integer weights ``C(3,t) * p_t`` over a common denominator."""
    weights = [comb(3, t) * p for t, p in enumerate(probs)]
    denom = lcm(*(w.denominator for w in weights))
    return [int(w * denom) for w in weights], denom


# satisfied-position subsets for each class t, in a fixed order
_PATTERNS = {
    t: [tuple(i in chosen for i in range(3)) for chosen in _subsets]
    for t, _subsets in (
        (0, [()]),
        (1, [(0,), (1,), (2,)]),
        (2, [(0, 1), (0, 2), (1, 2)]),
        (3, [(0, 1, 2)]),
    )
}


def generate(cfg: GeneratorConfig) -> PlantedInstance:
    """Draw one planted instance; output depends only on ``cfg``.

    Draw order from the seeded stream: N planted bits, then per clause three
    distinct variables (rejection), the class ``t`` and the pattern index.
    """
    cfg.validate()
    rng = SplitMix64(cfg.seed)
    n = cfg.num_vars
    planted = tuple(rng.bit() for _ in range(n))
    weights, denom = _class_table(cfg.type_probs)

    clauses = []
    for _ in range(cfg.num_clauses):
        vars_: list[int] = []
        while len(vars_) < 3:
            v = rng.below(n)
            if v not in vars_:
                vars_.append(v)
        r = rng.below(denom)
        t = 0
        while r >= weights[t]:
            r -= weights[t]
            t += 1
        pattern = _PATTERNS[t][rng.below(len(_PATTERNS[t]))]
        clause = []
        for v, sat in zip(vars_, pattern):
            agree = 1 if planted[v] else -1
            clause.append((v, agree if sat else -agree))
        clauses.append(clause)

    formula = Formula(n, clauses)
    ok, _ = evaluate(formula, planted)
    assert ok, "planted assignment must satisfy its instance"
    return PlantedInstance(formula, planted, cfg.seed, cfg.ratio)


def satisfied_literal_counts(inst: PlantedInstance) -> list[int]:
    """Per clause, how many literals agree with the planted assignment."""
    out = []
    for clause in inst.formula.clauses:
        out.append(sum((lit.sign > 0) == inst.planted[lit.var] for lit in clause))
    return out
