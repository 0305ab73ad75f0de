"""Digital memcomputing 3-SAT solvers: float reference and bit-exact Q14 engine."""
from .barthel import GeneratorConfig, PlantedInstance, default_type_probs, generate
from .dynamics import FloatState, Params, solve
from .fixedpoint import FixedParams, FixedState, solve_q14
from .formula import Formula, Literal, emit_dimacs, evaluate, parse_dimacs
from .harness import estimate_resources, fit_power_law, median, run_ensemble
from .result import RunResult

__all__ = [
    "FixedParams", "FixedState", "FloatState", "Formula", "GeneratorConfig",
    "Literal", "Params", "PlantedInstance", "RunResult", "default_type_probs",
    "emit_dimacs", "estimate_resources", "evaluate", "fit_power_law", "generate",
    "median", "parse_dimacs", "run_ensemble", "solve", "solve_q14",
]
