"""Floating-point memcomputing dynamics integrated by forward Euler.

State per variable ``n``: ``v[n]`` in [-1, 1]. State per clause ``m``: short
memory ``xs[m]`` in [0, 1] and long memory ``xl[m]`` in [1, cap * M].

    C_m  = 1/2 min_k (1 - q_k v_k)
    G_nm = 1/2 q_n min over the two other literals of (1 - q v)
    R_nm = 1/2 (q_n - v_n)  if C_m == 1/2 (1 - q_n v_n)  else 0

    dv_n  = sum_{m ∋ n} xl_m xs_m G_nm + (1 + zeta xl_m)(1 - xs_m) R_nm
    dxs_m = beta (xs_m + epsilon)(C_m - gamma)
    dxl_m = alpha (C_m - delta)

Every Euler step evaluates all derivatives from the current state before
writing anything (Jacobi update), then clamps each component to its range.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .formula import Formula, evaluate
from .result import RunResult
from .rng import SplitMix64

Q14_ONE = 1 << 14


@dataclass(frozen=True)
class Params:
    alpha: float = 4.0
    beta: float = 16.0
    gamma: float = 2.0**-2
    delta: float = 819 * 2.0**-14
    epsilon: float = 2.0**-10
    zeta: float = 2.0**-10
    dt: float = 2.0**-4
    max_steps: int = 10**8
    xl_cap_factor: float = 1e4

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "dt", "xl_cap_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")

    def xl_cap(self, num_clauses: int) -> float:
        return self.xl_cap_factor * num_clauses


@dataclass
class FloatState:
    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray
    step: int = 0

    def copy(self) -> FloatState:
        return FloatState(self.v.copy(), self.xs.copy(), self.xl.copy(), self.step)

    def within_bounds(self, xl_cap: float) -> bool:
        return bool(
            np.all(np.abs(self.v) <= 1.0)
            and np.all((self.xs >= 0.0) & (self.xs <= 1.0))
            and np.all((self.xl >= 1.0) & (self.xl <= xl_cap))
        )


def initial_v_q14(num_vars: int, seed: int) -> np.ndarray:
    """Initial voltages on the Q14 grid, uniform over ``[-2**14, 2**14]``.

    Both engines start from this draw so that paired runs share the same
    initial point (the float engine divides by 2**14).
    """
    rng = SplitMix64(seed)
    return np.array(
        [rng.randint(-Q14_ONE, Q14_ONE) for _ in range(num_vars)], dtype=np.int64
    )


def initial_state(f: Formula, seed: int) -> FloatState:
    v = initial_v_q14(f.num_vars, seed).astype(np.float64) / Q14_ONE
    m = f.num_clauses
    return FloatState(v, np.full(m, 0.5), np.ones(m), 0)


# -- scalar reference terms (per clause / per variable) --------------------


def _position(f: Formula, m: int, n: int) -> int:
    for k, lit in enumerate(f.clauses[m]):
        if lit.var == n:
            return k
    raise ValueError(f"variable {n} does not occur in clause {m}")


def clause_value(f: Formula, m: int, v) -> float:
    return 0.5 * min(1.0 - lit.sign * v[lit.var] for lit in f.clauses[m])


def gradient_term(f: Formula, m: int, n: int, v) -> float:
    k = _position(f, m, n)
    clause = f.clauses[m]
    others = [1.0 - lit.sign * v[lit.var] for i, lit in enumerate(clause) if i != k]
    return 0.5 * clause[k].sign * min(others)


def rigidity_term(f: Formula, m: int, n: int, v) -> float:
    lit = f.clauses[m][_position(f, m, n)]
    own = 0.5 * (1.0 - lit.sign * v[n])
    if clause_value(f, m, v) == own:
        return 0.5 * (lit.sign - v[n])
    return 0.0


# -- compiled kernels --------------------------------------------------------


@njit(cache=True, nogil=True)
def _derivatives_kernel(lit_var, lit_sign, v, xs, xl,
                        alpha, beta, gamma, delta, epsilon, zeta,
                        dv, dxs, dxl):
    dv[:] = 0.0
    for m in range(lit_var.shape[0]):
        a, b, c = lit_var[m, 0], lit_var[m, 1], lit_var[m, 2]
        qa, qb, qc = lit_sign[m, 0], lit_sign[m, 1], lit_sign[m, 2]
        ta = 1.0 - qa * v[a]
        tb = 1.0 - qb * v[b]
        tc = 1.0 - qc * v[c]
        tmin = min(ta, tb, tc)
        cm = 0.5 * tmin
        w_g = xl[m] * xs[m]
        w_r = (1.0 + zeta * xl[m]) * (1.0 - xs[m])

        g = 0.5 * qa * min(tb, tc)
        r = 0.5 * (qa - v[a]) if cm == 0.5 * ta else 0.0
        dv[a] += w_g * g + w_r * r
        g = 0.5 * qb * min(ta, tc)
        r = 0.5 * (qb - v[b]) if cm == 0.5 * tb else 0.0
        dv[b] += w_g * g + w_r * r
        g = 0.5 * qc * min(ta, tb)
        r = 0.5 * (qc - v[c]) if cm == 0.5 * tc else 0.0
        dv[c] += w_g * g + w_r * r

        dxs[m] = beta * (xs[m] + epsilon) * (cm - gamma)
        dxl[m] = alpha * (cm - delta)


@njit(cache=True, nogil=True)
def _apply_step(v, xs, xl, dv, dxs, dxl, dt, xl_cap):
    for n in range(v.shape[0]):
        x = v[n] + dt * dv[n]
        v[n] = -1.0 if x < -1.0 else (1.0 if x > 1.0 else x)
    for m in range(xs.shape[0]):
        x = xs[m] + dt * dxs[m]
        xs[m] = 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)
        x = xl[m] + dt * dxl[m]
        xl[m] = 1.0 if x < 1.0 else (xl_cap if x > xl_cap else x)


@njit(cache=True, nogil=True)
def _all_satisfied(lit_var, lit_sign, v):
    for m in range(lit_var.shape[0]):
        ok = False
        for k in range(3):
            if (v[lit_var[m, k]] >= 0) == (lit_sign[m, k] > 0):
                ok = True
                break
        if not ok:
            return False
    return True


@njit(cache=True, nogil=True)
def _run_float(lit_var, lit_sign, v, xs, xl,
               alpha, beta, gamma, delta, epsilon, zeta, dt, xl_cap, max_steps):
    dv = np.empty_like(v)
    dxs = np.empty_like(xs)
    dxl = np.empty_like(xl)
    if _all_satisfied(lit_var, lit_sign, v):
        return 0, True
    for step in range(1, max_steps + 1):
        _derivatives_kernel(lit_var, lit_sign, v, xs, xl,
                            alpha, beta, gamma, delta, epsilon, zeta, dv, dxs, dxl)
        _apply_step(v, xs, xl, dv, dxs, dxl, dt, xl_cap)
        if _all_satisfied(lit_var, lit_sign, v):
            return step, True
    return max_steps, False


# -- public API --------------------------------------------------------------


def derivatives(f: Formula, p: Params, s: FloatState):
    """Return ``(dv, dxs, dxl)`` evaluated at ``s``."""
    dv = np.empty(f.num_vars)
    dxs = np.empty(f.num_clauses)
    dxl = np.empty(f.num_clauses)
    _derivatives_kernel(f.lit_var, f.lit_sign,
                        np.asarray(s.v, dtype=np.float64),
                        np.asarray(s.xs, dtype=np.float64),
                        np.asarray(s.xl, dtype=np.float64),
                        p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.zeta,
                        dv, dxs, dxl)
    return dv, dxs, dxl


def euler_step(f: Formula, p: Params, s: FloatState) -> FloatState:
    """One clamped forward-Euler step; ``s`` is left untouched."""
    dv, dxs, dxl = derivatives(f, p, s)
    out = s.copy()
    _apply_step(out.v, out.xs, out.xl, dv, dxs, dxl, p.dt, p.xl_cap(f.num_clauses))
    out.step += 1
    return out


def boolean_projection(s: FloatState | np.ndarray) -> tuple[bool, ...]:
    v = s.v if isinstance(s, FloatState) else np.asarray(s)
    return tuple(bool(x) for x in v >= 0)


def run(f: Formula, p: Params, s: FloatState) -> tuple[int, bool]:
    """Integrate ``s`` in place until solved or ``p.max_steps`` more steps."""
    steps, solved = _run_float(f.lit_var, f.lit_sign, s.v, s.xs, s.xl,
                               p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.zeta,
                               p.dt, p.xl_cap(f.num_clauses), p.max_steps)
    s.step += steps
    return steps, solved


def solve(f: Formula, p: Params | None = None, seed: int = 0) -> RunResult:
    p = p or Params()
    s = initial_state(f, seed)
    # zero-step call: JIT dispatch/compile stays outside the timed region
    run(f, replace(p, max_steps=0), s.copy())
    t0 = time.perf_counter()
    steps, solved = run(f, p, s)
    wall = time.perf_counter() - t0
    assignment = boolean_projection(s)
    if solved:
        ok, unsat = evaluate(f, assignment)
        if not ok:
            raise AssertionError(f"engine reported a solution with {unsat} unsatisfied clauses")
    return RunResult(
        engine="float",
        num_vars=f.num_vars,
        num_clauses=f.num_clauses,
        seed=seed,
        solved=solved,
        steps=steps,
        wall_time=wall,
        assignment=assignment if solved else None,
    )


def with_max_steps(p: Params, max_steps: int) -> Params:
    return replace(p, max_steps=max_steps)
