"""Ensemble experiments: median steps-to-solution, power-law fits and the
FPGA resource/time projection."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dynamics, fixedpoint
from .barthel import GeneratorConfig, as_fraction, generate
from .result import RunResult
from .rng import derive_seed

ENGINES = ("float", "fixed")

# FPGA projection constants (VCU118 / XCVU9P build)
LUT_INTERCEPT = -204_557
LUT_PER_VAR = 9_559
DSP_PER_VAR = 43
VCU118_LUTS = 1_182_240
VCU118_DSPS = 6_840
STEP_NS = 96
LUT_FIT_MIN_N = 40

CSV_COLUMNS = ("engine", "N", "instance_seed", "solved", "steps", "wall_time_s")


def median(values: Sequence):
    """Lower median: the ``(n-1)//2``-th order statistic."""
    if len(values) == 0:
        raise ValueError("median of an empty sequence")
    return sorted(values)[(len(values) - 1) // 2]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    exponent_stderr: Optional[float]  # None with only two points
    num_points: int

    def predict(self, n: float) -> float:
        return self.prefactor * n**self.exponent


def fit_power_law(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Least-squares line through ``(log N, log y)``; slope is the exponent."""
    if len({n for n, _ in points}) < 2:
        raise ValueError("power-law fit needs at least 2 distinct sizes")
    if any(y <= 0 or n <= 0 for n, y in points):
        raise ValueError("power-law fit needs positive sizes and values")
    x = np.log(np.array([n for n, _ in points], dtype=float))
    y = np.log(np.array([v for _, v in points], dtype=float))
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    stderr = None
    if len(points) > 2:
        resid = y - (intercept + slope * x)
        stderr = math.sqrt(float((resid**2).sum()) / (len(points) - 2) / sxx)
    return PowerLawFit(slope, math.exp(intercept), stderr, len(points))


@dataclass(frozen=True)
class ResourceEstimate:
    n_vars: int
    luts: int
    dsps: int
    fits_vcu118: bool
    in_domain: bool  # LUT fit is linear only from N = 40 on
    projected_step_ns: int = STEP_NS
    projected_time_ns: Optional[int] = None

    @property
    def projected_time_s(self) -> Optional[float]:
        if self.projected_time_ns is None:
            return None
        return self.projected_time_ns * 1e-9


def estimate_resources(n_vars: int, steps: Optional[int] = None) -> ResourceEstimate:
    luts = LUT_INTERCEPT + LUT_PER_VAR * n_vars
    dsps = DSP_PER_VAR * n_vars
    return ResourceEstimate(
        n_vars=n_vars,
        luts=luts,
        dsps=dsps,
        fits_vcu118=luts <= VCU118_LUTS and dsps <= VCU118_DSPS,
        in_domain=n_vars >= LUT_FIT_MIN_N,
        projected_time_ns=None if steps is None else steps * STEP_NS,
    )


@dataclass
class SizeSummary:
    n_vars: int
    runs: int
    solved: int
    median_steps: Optional[int]
    median_wall_time: Optional[float]

    @property
    def unsolved_fraction(self) -> float:
        return 1.0 - self.solved / self.runs


@dataclass
class ScalingReport:
    config: dict
    sizes: list[SizeSummary]
    fit: Optional[PowerLawFit]
    excluded_sizes: list[int] = field(default_factory=list)
    runs: list[RunResult] = field(default_factory=list)

    @property
    def medians(self) -> dict[int, Optional[int]]:
        return {s.n_vars: s.median_steps for s in self.sizes}

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "sizes": [
                {**asdict(s), "unsolved_fraction": s.unsolved_fraction} for s in self.sizes
            ],
            "fit": None if self.fit is None else asdict(self.fit),
            "excluded_sizes": list(self.excluded_sizes),
            "runs": [r.to_dict() for r in self.runs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScalingReport:
        sizes = []
        for s in d["sizes"]:
            s = dict(s)
            s.pop("unsolved_fraction", None)
            sizes.append(SizeSummary(**s))
        return cls(
            config=d["config"],
            sizes=sizes,
            fit=None if d["fit"] is None else PowerLawFit(**d["fit"]),
            excluded_sizes=list(d["excluded_sizes"]),
            runs=[RunResult.from_dict(r) for r in d["runs"]],
        )

    def __eq__(self, other):
        if not isinstance(other, ScalingReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def instance_seed(base_seed: int, n_vars: int, index: int) -> int:
    return derive_seed(base_seed, n_vars, index)


def solver_seed(base_seed: int, n_vars: int, index: int) -> int:
    return derive_seed(base_seed, n_vars, index, 1)


def run_one(engine: str, cfg: GeneratorConfig, seed: int, max_steps: int,
            params=None, trace_path: Optional[Path] = None,
            instance_id: Optional[str] = None) -> RunResult:
    inst = generate(cfg)
    if engine == "float":
        p = replace(params or dynamics.Params(), max_steps=max_steps)
        res = dynamics.solve(inst.formula, p, seed)
    elif engine == "fixed":
        fp = replace(params or fixedpoint.FixedParams(), max_steps=max_steps)
        res = fixedpoint.solve_q14(inst.formula, fp, seed, trace_path=trace_path)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return replace(res, instance_seed=cfg.seed, instance_id=instance_id)


def run_ensemble(
    sizes: Sequence[int],
    runs_per_size: int,
    base_seed: int = 0,
    engine: str = "fixed",
    ratio=Fraction(43, 10),
    max_steps: int = 10**8,
    params=None,
    jobs: int = 1,
    trace_dir: Optional[Path] = None,
    template: Optional[GeneratorConfig] = None,
) -> ScalingReport:
    """Solve ``runs_per_size`` fresh instances at each size and summarize.

    Instance ``i`` at size ``N`` uses generator seed
    ``derive_seed(base_seed, N, i)`` and solver seed
    ``derive_seed(base_seed, N, i, 1)``. Results are keyed by ``(N, i)``,
    so the report does not depend on ``jobs`` or completion order.
    """
    if not sizes:
        raise ValueError("no sizes given")
    if runs_per_size < 1:
        raise ValueError("runs_per_size must be >= 1")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "fixed" and params is not None and not isinstance(params, fixedpoint.FixedParams):
        raise TypeError("fixed engine needs FixedParams")
    if engine == "float" and params is not None and not isinstance(params, dynamics.Params):
        raise TypeError("float engine needs Params")
    if trace_dir is not None and engine != "fixed":
        raise ValueError("traces are only produced by the fixed engine")

    ratio = template.ratio if template is not None else as_fraction(ratio)
    tasks = []
    for n in sizes:
        for i in range(runs_per_size):
            cfg = GeneratorConfig(n, ratio, instance_seed(base_seed, n, i),
                                  *(() if template is None else (template.type_probs,)))
            trace = None if trace_dir is None else Path(trace_dir) / f"N{n}_i{i}.trace"
            tasks.append((engine, cfg, solver_seed(base_seed, n, i), max_steps, params,
                          trace, f"N{n}/{i}"))

    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    if jobs <= 1:
        results = [run_one(*t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda t: run_one(*t), tasks))

    summaries, excluded, points = [], [], []
    for k, n in enumerate(sizes):
        chunk = results[k * runs_per_size:(k + 1) * runs_per_size]
        solved = [r for r in chunk if r.solved]
        med = median([r.steps for r in solved]) if solved else None
        med_t = median([r.wall_time for r in solved]) if solved else None
        summaries.append(SizeSummary(n, len(chunk), len(solved), med, med_t))
        if med is None or med <= 0:
            excluded.append(n)
        else:
            points.append((n, med))
    fit = fit_power_law(points) if len({n for n, _ in points}) >= 2 else None

    config = {
        "engine": engine,
        "sizes": list(sizes),
        "runs_per_size": runs_per_size,
        "base_seed": base_seed,
        "ratio": str(ratio),
        "max_steps": max_steps,
    }
    return ScalingReport(config, summaries, fit, excluded, results)


def export(report: ScalingReport, fmt: str) -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.runs:
            w.writerow([r.engine, r.num_vars, r.instance_seed, int(r.solved), r.steps,
                        repr(r.wall_time)])
        return buf.getvalue().encode("ascii")
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2) + "\n").encode("ascii")
    raise ValueError(f"unknown export format {fmt!r}")


def load_report(data: bytes | str) -> ScalingReport:
    return ScalingReport.from_dict(json.loads(data))


def read_size_medians_csv(text: str) -> list[tuple[float, float]]:
    """Read ``(N, median)`` rows for re-fitting.

    Accepts a two-column file (header optional) or a run CSV as written by
    :func:`export`, in which case medians over solved runs are computed.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError("empty CSV")
    header = [h.strip().lower() for h in rows[0]]
    if header[: len(CSV_COLUMNS)] == [c.lower() for c in CSV_COLUMNS]:
        by_n: dict[int, list[int]] = {}
        for r in rows[1:]:
            if int(r[3]):
                by_n.setdefault(int(r[1]), []).append(int(r[4]))
        return [(n, median(v)) for n, v in sorted(by_n.items())]
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    return [(float(r[0]), float(r[1])) for r in rows]
