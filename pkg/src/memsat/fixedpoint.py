"""Bit-exact Q14 integer engine.

All state is stored as signed integers scaled by 2**14. Products of two Q14
values are renormalized with ``>> 14``; the power-of-two constants become
shifts (``zeta = 2**-10`` is ``>> 10``, ``dt = 2**-4`` is ``>> 4``). Every
right shift is arithmetic, i.e. floor division, in both the compiled kernel
and the arbitrary-precision reference :func:`step_q14_reference`.

The rigidity guard compares the unshifted terms, so two terms one ulp
apart never tie after the ``>> 1``.

Per clause ``m`` with literal terms ``T_k = 2**14 - q_k V_k``::

    C'   = min(T_a, T_b, T_c) >> 1
    G'_k = q_k * (min of the two other T) >> 1
    R'_k = (q_k * 2**14 - V_k) >> 1   if T_k == min(T)   else 0

    dV[n]  += (((Xl*Xs) >> 14) * G') >> 14
            + ((((2**14 + (Xl >> 10)) * (2**14 - Xs)) >> 14) * R') >> 14
    dXs[m]  = (beta * (Xs + eps) * (C' - gamma)) >> 14
    dXl[m]  = alpha * (C' - delta)

    V' = clamp(V + (dV >> dt_shift)),  likewise Xs', Xl'
"""
from __future__ import annotations

import struct
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import BinaryIO

import numpy as np
from numba import njit

from .dynamics import FloatState, Params, derivatives as float_derivatives, initial_v_q14
from .formula import Formula, evaluate
from .result import RunResult

SCALE_SHIFT = 14
ONE = 1 << SCALE_SHIFT
INT64_MAX = (1 << 63) - 1

TRACE_MAGIC = b"MEMSATQ1"


@dataclass(frozen=True)
class FixedParams:
    alpha_int: int = 4
    beta_int: int = 16
    gamma_q14: int = 4096
    delta_q14: int = 819
    epsilon_q14: int = 16
    zeta_shift: int = 10
    dt_shift: int = 4
    scale_shift: int = SCALE_SHIFT
    max_steps: int = 10**8
    xl_cap_factor: int = 10_000

    def __post_init__(self):
        if self.scale_shift != SCALE_SHIFT:
            raise ValueError("only Q14 is supported")
        if self.dt_shift < 0 or self.zeta_shift < 0:
            raise ValueError("shift amounts must be non-negative")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")

    def xl_cap_q14(self, num_clauses: int) -> int:
        return self.xl_cap_factor * num_clauses * ONE

    def to_float(self, **overrides) -> Params:
        """The real-valued parameters these integers encode."""
        p = Params(
            alpha=float(self.alpha_int),
            beta=float(self.beta_int),
            gamma=self.gamma_q14 / ONE,
            delta=self.delta_q14 / ONE,
            epsilon=self.epsilon_q14 / ONE,
            zeta=2.0**-self.zeta_shift,
            dt=2.0**-self.dt_shift,
            max_steps=self.max_steps,
            xl_cap_factor=float(self.xl_cap_factor),
        )
        return replace(p, **overrides)


@dataclass
class FixedState:
    V: np.ndarray
    Xs: np.ndarray
    Xl: np.ndarray
    step: int = 0

    def copy(self) -> FixedState:
        return FixedState(self.V.copy(), self.Xs.copy(), self.Xl.copy(), self.step)

    def within_bounds(self, xl_cap_q14: int) -> bool:
        return bool(
            np.all(np.abs(self.V) <= ONE)
            and np.all((self.Xs >= 0) & (self.Xs <= ONE))
            and np.all((self.Xl >= ONE) & (self.Xl <= xl_cap_q14))
        )

    def dequantize(self) -> FloatState:
        return FloatState(self.V / ONE, self.Xs / ONE, self.Xl / ONE, self.step)


def quantize(x) -> np.ndarray:
    """Real values to Q14, rounding toward minus infinity."""
    return np.floor(np.asarray(x, dtype=np.float64) * ONE).astype(np.int64)


def quantize_state(s: FloatState) -> FixedState:
    return FixedState(quantize(s.v), quantize(s.xs), quantize(s.xl), s.step)


def initial_state_q14(f: Formula, seed: int) -> FixedState:
    m = f.num_clauses
    return FixedState(
        initial_v_q14(f.num_vars, seed),
        np.full(m, ONE >> 1, dtype=np.int64),
        np.full(m, ONE, dtype=np.int64),
        0,
    )


def width_ledger(f: Formula, fp: FixedParams) -> dict[str, int]:
    """Worst-case magnitudes of every intermediate in the derivative datapath."""
    cap = fp.xl_cap_q14(f.num_clauses)
    degree = int(np.diff(f.inc_ptr).max())
    g_max = ONE  # |G'| <= (2 * ONE) >> 1
    r_max = ONE  # |R'| <= (2 * ONE) >> 1
    prod_g = cap * ONE
    term_g = ((prod_g >> SCALE_SHIFT) * g_max) >> SCALE_SHIFT
    prod_r = (ONE + (cap >> fp.zeta_shift)) * ONE
    term_r = ((prod_r >> SCALE_SHIFT) * r_max) >> SCALE_SHIFT
    return {
        "xl_cap": cap,
        "xl_xs": prod_g,
        "xl_xs_g": (prod_g >> SCALE_SHIFT) * g_max,
        "rigidity_weight": prod_r,
        "rigidity_weight_r": (prod_r >> SCALE_SHIFT) * r_max,
        "dv_sum": degree * (term_g + term_r),
        "dxs": fp.beta_int * (ONE + fp.epsilon_q14) * 2 * ONE,
        "dxl": fp.alpha_int * 2 * ONE,
    }


def check_width(f: Formula, fp: FixedParams) -> None:
    worst = max(width_ledger(f, fp).values())
    if worst > INT64_MAX:
        raise OverflowError(
            f"formula too large for the 64-bit datapath (worst intermediate {worst:#x})"
        )


# -- compiled kernels --------------------------------------------------------


@njit(cache=True, nogil=True)
def _derivatives_q14(lit_var, lit_sign, V, Xs, Xl,
                     alpha, beta, gamma, delta, eps, zeta_shift,
                     dV, dXs, dXl):
    one = 16384
    dV[:] = 0
    for m in range(lit_var.shape[0]):
        a, b, c = lit_var[m, 0], lit_var[m, 1], lit_var[m, 2]
        qa, qb, qc = lit_sign[m, 0], lit_sign[m, 1], lit_sign[m, 2]
        ta = one - qa * V[a]
        tb = one - qb * V[b]
        tc = one - qc * V[c]
        tmin = min(ta, tb, tc)
        cm = tmin >> 1
        w_g = (Xl[m] * Xs[m]) >> 14
        w_r = ((one + (Xl[m] >> zeta_shift)) * (one - Xs[m])) >> 14

        g = qa * (min(tb, tc) >> 1)
        r = ((qa * one - V[a]) >> 1) if ta == tmin else 0
        dV[a] += ((w_g * g) >> 14) + ((w_r * r) >> 14)
        g = qb * (min(ta, tc) >> 1)
        r = ((qb * one - V[b]) >> 1) if tb == tmin else 0
        dV[b] += ((w_g * g) >> 14) + ((w_r * r) >> 14)
        g = qc * (min(ta, tb) >> 1)
        r = ((qc * one - V[c]) >> 1) if tc == tmin else 0
        dV[c] += ((w_g * g) >> 14) + ((w_r * r) >> 14)

        dXs[m] = (beta * (Xs[m] + eps) * (cm - gamma)) >> 14
        dXl[m] = alpha * (cm - delta)


@njit(cache=True, nogil=True)
def _apply_q14(V, Xs, Xl, dV, dXs, dXl, dt_shift, xl_cap):
    one = 16384
    for n in range(V.shape[0]):
        x = V[n] + (dV[n] >> dt_shift)
        V[n] = -one if x < -one else (one if x > one else x)
    for m in range(Xs.shape[0]):
        x = Xs[m] + (dXs[m] >> dt_shift)
        Xs[m] = 0 if x < 0 else (one if x > one else x)
        x = Xl[m] + (dXl[m] >> dt_shift)
        Xl[m] = one if x < one else (xl_cap if x > xl_cap else x)


@njit(cache=True, nogil=True)
def _all_satisfied_q14(lit_var, lit_sign, V):
    for m in range(lit_var.shape[0]):
        ok = False
        for k in range(3):
            if (V[lit_var[m, k]] >= 0) == (lit_sign[m, k] > 0):
                ok = True
                break
        if not ok:
            return False
    return True


@njit(cache=True, nogil=True)
def _run_q14(lit_var, lit_sign, V, Xs, Xl,
             alpha, beta, gamma, delta, eps, zeta_shift, dt_shift, xl_cap, max_steps):
    dV = np.empty_like(V)
    dXs = np.empty_like(Xs)
    dXl = np.empty_like(Xl)
    if _all_satisfied_q14(lit_var, lit_sign, V):
        return 0, True
    for step in range(1, max_steps + 1):
        _derivatives_q14(lit_var, lit_sign, V, Xs, Xl,
                         alpha, beta, gamma, delta, eps, zeta_shift, dV, dXs, dXl)
        _apply_q14(V, Xs, Xl, dV, dXs, dXl, dt_shift, xl_cap)
        if _all_satisfied_q14(lit_var, lit_sign, V):
            return step, True
    return max_steps, False


def _kernel_args(fp: FixedParams):
    return (fp.alpha_int, fp.beta_int, fp.gamma_q14, fp.delta_q14,
            fp.epsilon_q14, fp.zeta_shift)


# -- public API --------------------------------------------------------------


def clause_value_q14(f: Formula, m: int, V) -> int:
    return min(ONE - lit.sign * int(V[lit.var]) for lit in f.clauses[m]) >> 1


def derivatives_q14(f: Formula, fp: FixedParams, s: FixedState):
    """Return integer ``(dV, dXs, dXl)`` before the ``dt`` shift."""
    dV = np.empty(f.num_vars, dtype=np.int64)
    dXs = np.empty(f.num_clauses, dtype=np.int64)
    dXl = np.empty(f.num_clauses, dtype=np.int64)
    _derivatives_q14(f.lit_var, f.lit_sign,
                     np.asarray(s.V, dtype=np.int64),
                     np.asarray(s.Xs, dtype=np.int64),
                     np.asarray(s.Xl, dtype=np.int64),
                     *_kernel_args(fp), dV, dXs, dXl)
    return dV, dXs, dXl


def step_q14(f: Formula, fp: FixedParams, s: FixedState) -> FixedState:
    dV, dXs, dXl = derivatives_q14(f, fp, s)
    out = s.copy()
    _apply_q14(out.V, out.Xs, out.Xl, dV, dXs, dXl, fp.dt_shift,
               fp.xl_cap_q14(f.num_clauses))
    out.step += 1
    return out


def step_q14_reference(f: Formula, fp: FixedParams, s: FixedState, track: dict | None = None):
    """Pure-Python big-integer version of :func:`step_q14`.

    Works per variable over its incidence list rather than per clause. When
    ``track`` is given, the largest magnitude seen at each datapath node is
    recorded in it.
    """
    V = [int(x) for x in s.V]
    Xs = [int(x) for x in s.Xs]
    Xl = [int(x) for x in s.Xl]
    cap = fp.xl_cap_q14(f.num_clauses)

    def note(key, x):
        if track is not None:
            track[key] = max(track.get(key, 0), abs(x))
        return x

    terms = [[ONE - lit.sign * V[lit.var] for lit in c] for c in f.clauses]
    tmins = [min(t) for t in terms]
    cvals = [t >> 1 for t in tmins]

    dV = []
    for n in range(f.num_vars):
        acc = 0
        for m, k in f.incidence(n):
            q = f.clauses[m][k].sign
            t = terms[m]
            others = [t[i] for i in range(3) if i != k]
            g = q * (min(others) >> 1)
            r = (q * ONE - V[n]) >> 1 if t[k] == tmins[m] else 0
            wg = note("xl_xs", Xl[m] * Xs[m]) >> SCALE_SHIFT
            wr = note("rigidity_weight", (ONE + (Xl[m] >> fp.zeta_shift)) * (ONE - Xs[m])) >> SCALE_SHIFT
            acc += (note("xl_xs_g", wg * g) >> SCALE_SHIFT) + (note("rigidity_weight_r", wr * r) >> SCALE_SHIFT)
            note("dv_sum", acc)
        dV.append(acc)
    dXs = [note("dxs", fp.beta_int * (Xs[m] + fp.epsilon_q14) * (cvals[m] - fp.gamma_q14)) >> SCALE_SHIFT
           for m in range(f.num_clauses)]
    dXl = [fp.alpha_int * (cvals[m] - fp.delta_q14) for m in range(f.num_clauses)]

    def clamp(x, lo, hi):
        return lo if x < lo else hi if x > hi else x

    sh = fp.dt_shift
    return FixedState(
        np.array([clamp(V[n] + (dV[n] >> sh), -ONE, ONE) for n in range(f.num_vars)], dtype=np.int64),
        np.array([clamp(Xs[m] + (dXs[m] >> sh), 0, ONE) for m in range(f.num_clauses)], dtype=np.int64),
        np.array([clamp(Xl[m] + (dXl[m] >> sh), ONE, cap) for m in range(f.num_clauses)], dtype=np.int64),
        s.step + 1,
    ), (dV, dXs, dXl)


def boolean_projection_q14(s: FixedState | np.ndarray) -> tuple[bool, ...]:
    V = s.V if isinstance(s, FixedState) else np.asarray(s)
    return tuple(bool(x) for x in V >= 0)


class TraceWriter:
    """Binary per-step state dump.

    Layout, all little-endian int64: a header ``MEMSATQ1`` (8 bytes), N, M;
    then one record per step (the initial state is step 0) holding
    ``step, V[0..N), Xs[0..M), Xl[0..M)``.
    """

    def __init__(self, fh: BinaryIO, num_vars: int, num_clauses: int):
        self.fh = fh
        fh.write(TRACE_MAGIC + struct.pack("<qq", num_vars, num_clauses))

    def write(self, s: FixedState) -> None:
        self.fh.write(struct.pack("<q", s.step))
        for arr in (s.V, s.Xs, s.Xl):
            self.fh.write(np.ascontiguousarray(arr, dtype="<i8").tobytes())


def read_trace(path: str | Path) -> tuple[int, int, list[FixedState]]:
    data = Path(path).read_bytes()
    if data[:8] != TRACE_MAGIC:
        raise ValueError("not a memsat trace file")
    n, m = struct.unpack_from("<qq", data, 8)
    rec = 1 + n + 2 * m
    body = np.frombuffer(data, dtype="<i8", offset=24)
    if body.size % rec:
        raise ValueError("truncated trace file")
    states = []
    for row in body.reshape(-1, rec):
        states.append(FixedState(row[1:1 + n].copy(), row[1 + n:1 + n + m].copy(),
                                 row[1 + n + m:].copy(), int(row[0])))
    return n, m, states


def run_q14(f: Formula, fp: FixedParams, s: FixedState, trace: TraceWriter | None = None):
    """Integrate ``s`` in place; returns ``(steps, solved)``."""
    cap = fp.xl_cap_q14(f.num_clauses)
    if trace is None:
        steps, solved = _run_q14(f.lit_var, f.lit_sign, s.V, s.Xs, s.Xl,
                                 *_kernel_args(fp), fp.dt_shift, cap, fp.max_steps)
        s.step += steps
        return steps, solved

    dV = np.empty_like(s.V)
    dXs = np.empty_like(s.Xs)
    dXl = np.empty_like(s.Xl)
    trace.write(s)
    if _all_satisfied_q14(f.lit_var, f.lit_sign, s.V):
        return 0, True
    for step in range(1, fp.max_steps + 1):
        _derivatives_q14(f.lit_var, f.lit_sign, s.V, s.Xs, s.Xl,
                         *_kernel_args(fp), dV, dXs, dXl)
        _apply_q14(s.V, s.Xs, s.Xl, dV, dXs, dXl, fp.dt_shift, cap)
        s.step += 1
        trace.write(s)
        if _all_satisfied_q14(f.lit_var, f.lit_sign, s.V):
            return step, True
    return fp.max_steps, False


def solve_q14(f: Formula, fp: FixedParams | None = None, seed: int = 0,
              trace_path: str | Path | None = None) -> RunResult:
    fp = fp or FixedParams()
    check_width(f, fp)
    s = initial_state_q14(f, seed)
    run_q14(f, replace(fp, max_steps=0), s.copy())
    t0 = time.perf_counter()
    if trace_path is None:
        steps, solved = run_q14(f, fp, s)
    else:
        with open(trace_path, "wb") as fh:
            steps, solved = run_q14(f, fp, s, TraceWriter(fh, f.num_vars, f.num_clauses))
    wall = time.perf_counter() - t0
    assignment = boolean_projection_q14(s)
    if solved:
        ok, unsat = evaluate(f, assignment)
        if not ok:
            raise AssertionError(f"engine reported a solution with {unsat} unsatisfied clauses")
    return RunResult(
        engine="fixed",
        num_vars=f.num_vars,
        num_clauses=f.num_clauses,
        seed=seed,
        solved=solved,
        steps=steps,
        wall_time=wall,
        assignment=assignment if solved else None,
    )


def derivative_deviation(f: Formula, s_float: FloatState, fp: FixedParams | None = None):
    """Per-component max |float derivative - fixed derivative / 2**14|.

    Returns ``(dv_dev, dxs_dev, dxl_dev)``; the float side is evaluated at
    ``s_float`` and the integer side at its floor quantization.
    """
    fp = fp or FixedParams()
    p = fp.to_float()
    fdv, fdxs, fdxl = float_derivatives(f, p, s_float)
    qdv, qdxs, qdxl = derivatives_q14(f, fp, quantize_state(s_float))
    return tuple(
        float(np.max(np.abs(a - b / ONE))) for a, b in ((fdv, qdv), (fdxs, qdxs), (fdxl, qdxl))
    )


def quantization_check(f: Formula, s_float: FloatState, fp: FixedParams | None = None) -> float:
    return max(derivative_deviation(f, s_float, fp))
