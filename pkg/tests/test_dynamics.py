import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memsat import dynamics as dyn
from memsat.barthel import GeneratorConfig, generate
from memsat.formula import Formula, evaluate

from conftest import random_grid_state

P = dyn.Params()


def test_default_params():
    assert (P.alpha, P.beta, P.gamma, P.epsilon, P.zeta, P.dt) == (4, 16, 0.25, 2**-10, 2**-10, 0.0625)
    assert P.delta == 819 / 16384
    assert P.max_steps == 10**8
    with pytest.raises(ValueError):
        dyn.Params(dt=0)


@pytest.mark.parametrize(
    "v, expected",
    [((-1, -1, -1), 1.0), ((1, -1, -1), 0.0), ((0.5, -0.5, 0.0), 0.25)],
)
def test_clause_value(single_clause, v, expected):
    assert dyn.clause_value(single_clause, 0, np.array(v, dtype=float)) == expected


def test_gradient_term():
    # q_n = +1, other terms (1 - q v) = (2, 2)
    f = Formula(3, [[(0, 1), (1, 1), (2, 1)]])
    assert dyn.gradient_term(f, 0, 0, np.array([0.3, -1.0, -1.0])) == 1.0
    g = Formula(3, [[(0, -1), (1, 1), (2, 1)]])
    assert dyn.gradient_term(g, 0, 0, np.array([0.3, -1.0, -1.0])) == -1.0
    # other terms (0.5, 1.5)
    assert dyn.gradient_term(f, 0, 0, np.array([0.0, 0.5, -0.5])) == 0.25
    with pytest.raises(ValueError):
        dyn.gradient_term(Formula(4, [[(0, 1), (1, 1), (2, 1)]]), 0, 3, np.zeros(4))


def test_rigidity_term(single_clause):
    v = np.array([-1.0, -1.0, -1.0])
    assert [dyn.rigidity_term(single_clause, 0, n, v) for n in range(3)] == [1.0, 1.0, 1.0]
    v = np.array([0.5, -0.5, 0.0])
    assert [dyn.rigidity_term(single_clause, 0, n, v) for n in range(3)] == [0.25, 0.0, 0.0]
    v = np.array([1.0, -0.2, 0.3])
    assert dyn.rigidity_term(single_clause, 0, 0, v) == 0.0


def test_derivatives_single_clause_example(single_clause):
    s = dyn.FloatState(np.array([-1.0, -1.0, -1.0]), np.array([1.0]), np.array([1.0]))
    dv, dxs, dxl = dyn.derivatives(single_clause, P, s)
    assert dv.tolist() == [1.0, 1.0, 1.0]
    assert dxs[0] == P.beta * (1 + P.epsilon) * (1 - P.gamma)
    assert dxl[0] == P.alpha * (1 - P.delta)


def test_satisfied_clause_relaxes_long_memory(single_clause):
    s = dyn.FloatState(np.array([1.0, -1.0, -1.0]), np.array([0.3]), np.array([5.0]))
    _, _, dxl = dyn.derivatives(single_clause, P, s)
    assert dxl[0] == -P.alpha * P.delta


def test_isolated_variable_has_zero_velocity():
    f = Formula(4, [[(0, 1), (1, -1), (2, 1)]])
    s = dyn.FloatState(np.array([0.1, 0.2, -0.3, 0.7]), np.array([0.5]), np.array([3.0]))
    dv, _, _ = dyn.derivatives(f, P, s)
    assert dv[3] == 0.0


def _derivatives_oracle(f, p, v, xs, xl):
    """Per-variable sum over incidence using the scalar reference terms."""
    dv = np.zeros(f.num_vars)
    for n in range(f.num_vars):
        for m, _ in f.incidence(n):
            g = dyn.gradient_term(f, m, n, v)
            r = dyn.rigidity_term(f, m, n, v)
            dv[n] += xl[m] * xs[m] * g + (1 + p.zeta * xl[m]) * (1 - xs[m]) * r
    c = np.array([dyn.clause_value(f, m, v) for m in range(f.num_clauses)])
    return dv, p.beta * (xs + p.epsilon) * (c - p.gamma), p.alpha * (c - p.delta)


@pytest.mark.parametrize("seed", range(5))
def test_kernel_matches_scalar_oracle(seed, barthel20):
    rng = np.random.default_rng(seed)
    f = barthel20.formula
    v = rng.uniform(-1, 1, f.num_vars)
    if seed % 2:
        # force exact ties inside clauses
        v = np.round(v * 2) / 2
    xs = rng.uniform(0, 1, f.num_clauses)
    xl = rng.uniform(1, 50, f.num_clauses)
    got = dyn.derivatives(f, P, dyn.FloatState(v, xs, xl))
    want = _derivatives_oracle(f, P, v, xs, xl)
    for a, b in zip(got, want):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_clause_value_range_and_strict_satisfaction(barthel20):
    f = barthel20.formula
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.uniform(-1, 1, f.num_vars)
        for m, clause in enumerate(f.clauses):
            c = dyn.clause_value(f, m, v)
            assert 0.0 <= c <= 1.0
            assert (c < 0.5) == any(l.sign * v[l.var] > 0 for l in clause)


def test_rigidity_min_always_attained(barthel20):
    f = barthel20.formula
    rng = np.random.default_rng(1)
    v = np.round(rng.uniform(-1, 1, f.num_vars) * 4) / 4
    for m, clause in enumerate(f.clauses):
        own = [0.5 * (1 - l.sign * v[l.var]) for l in clause]
        attains = [o == dyn.clause_value(f, m, v) for o in own]
        assert any(attains)
        rs = [dyn.rigidity_term(f, m, l.var, v) for l in clause]
        if all(r == 0 for r in rs):
            assert all(v[l.var] == l.sign for l, a in zip(clause, attains) if a)


def test_locality(barthel20):
    f = barthel20.formula
    rng = np.random.default_rng(2)
    v = rng.uniform(-1, 1, f.num_vars)
    xs = rng.uniform(0, 1, f.num_clauses)
    xl = rng.uniform(1, 10, f.num_clauses)
    dv0, _, _ = dyn.derivatives(f, P, dyn.FloatState(v, xs, xl))
    m = 5
    xs2, xl2 = xs.copy(), xl.copy()
    xs2[m], xl2[m] = 0.123, 7.5
    dv1, _, _ = dyn.derivatives(f, P, dyn.FloatState(v, xs2, xl2))
    touched = {l.var for l in f.clauses[m]}
    for n in range(f.num_vars):
        if n not in touched:
            assert dv1[n] == dv0[n]


def test_euler_step_examples(single_clause):
    s = dyn.FloatState(np.array([-1.0, -1.0, -1.0]), np.array([0.5]), np.array([1.0]))
    s1 = dyn.euler_step(single_clause, P, s)
    # 1 + dt * alpha * (1 - delta); the rounded figure with delta ~ 0.05 is 1.2375
    assert s1.xl[0] == 1 + 0.0625 * 4 * (1 - 819 / 16384)
    assert s1.xl[0] == pytest.approx(1.2375, abs=5e-6)
    assert s1.step == 1 and s.step == 0
    assert s.xl[0] == 1.0  # input untouched

    sat = dyn.FloatState(np.array([1.0, 1.0, 1.0]), np.array([0.0]), np.array([1.0]))
    out = dyn.euler_step(single_clause, P, sat)
    assert out.v.tolist() == [1.0, 1.0, 1.0]  # clamped at +1


def test_euler_step_fixed_point():
    # v at the satisfied corner with xs = 0: both force terms vanish
    f = Formula(3, [[(0, 1), (1, 1), (2, 1)]])
    s = dyn.FloatState(np.array([1.0, 1.0, 1.0]), np.array([0.0]), np.array([1.0]))
    dv, dxs, dxl = dyn.derivatives(f, P, s)
    assert np.all(dv == 0)
    out = dyn.euler_step(f, P, s)
    # xs and xl sit at their floors with negative derivatives, so clamping keeps them
    assert np.array_equal(out.v, s.v) and np.array_equal(out.xs, s.xs) and np.array_equal(out.xl, s.xl)
    assert out.step == s.step + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 40))
def test_bounds_preserved(seed, steps):
    inst = generate(GeneratorConfig(20, seed=seed))
    f = inst.formula
    rng = np.random.default_rng(seed)
    v, xs, xl = random_grid_state(rng, f.num_vars, f.num_clauses, 200.0)
    s = dyn.FloatState(v, xs, xl)
    cap = P.xl_cap(f.num_clauses)
    for _ in range(steps):
        s = dyn.euler_step(f, P, s)
        assert s.within_bounds(cap)


def test_xl_cap_enforced(single_clause):
    p = dyn.Params(xl_cap_factor=2.0)
    s = dyn.FloatState(np.array([-1.0, -1.0, -1.0]), np.array([0.5]), np.array([1.95]))
    assert dyn.euler_step(single_clause, p, s).xl[0] == 2.0


def test_boolean_projection():
    assert dyn.boolean_projection(np.array([-0.3, 0.7])) == (False, True)
    assert dyn.boolean_projection(np.array([0.0, -1e-300])) == (True, False)
    v = np.random.default_rng(0).uniform(-1, 1, 50)
    assert dyn.boolean_projection(v) == dyn.boolean_projection(v * 3.7)


def test_solve_single_clause(single_clause):
    for seed in range(10):
        r = dyn.solve(single_clause, P, seed)
        assert r.solved and r.steps < 100
        assert evaluate(single_clause, r.assignment) == (True, 0)


def test_solve_barthel20(barthel20):
    r = dyn.solve(barthel20.formula, P, seed=3)
    assert r.solved and r.steps > 0
    assert evaluate(barthel20.formula, r.assignment) == (True, 0)
    assert r.engine == "float"


def test_solve_zero_budget(barthel20):
    f = barthel20.formula
    for seed in range(20):
        r = dyn.solve(f, dyn.Params(max_steps=0), seed)
        init = dyn.boolean_projection(dyn.initial_state(f, seed))
        assert r.solved == evaluate(f, init)[0]
        assert r.steps == 0


def test_solve_budget_exhausted(barthel60):
    r = dyn.solve(barthel60.formula, dyn.Params(max_steps=1), seed=0)
    assert not r.solved and r.steps == 1 and r.assignment is None


def test_solve_deterministic(barthel60):
    a = dyn.solve(barthel60.formula, P, seed=9)
    b = dyn.solve(barthel60.formula, P, seed=9)
    assert (a.steps, a.assignment) == (b.steps, b.assignment)
    s1 = dyn.initial_state(barthel60.formula, 9)
    s2 = dyn.initial_state(barthel60.formula, 9)
    for _ in range(25):
        s1 = dyn.euler_step(barthel60.formula, P, s1)
        s2 = dyn.euler_step(barthel60.formula, P, s2)
    assert np.array_equal(s1.v, s2.v) and np.array_equal(s1.xl, s2.xl)


def test_run_matches_repeated_euler_steps(barthel20):
    f = barthel20.formula
    p = dyn.Params(max_steps=15)
    s = dyn.initial_state(f, 4)
    stepped = s.copy()
    steps, solved = dyn.run(f, p, s)
    for _ in range(steps):
        stepped = dyn.euler_step(f, p, stepped)
    assert np.array_equal(s.v, stepped.v)
    assert np.array_equal(s.xs, stepped.xs)
    assert np.array_equal(s.xl, stepped.xl)


def test_initial_state():
    f = Formula(5, [[(0, 1), (1, 1), (2, 1)], [(2, 1), (3, -1), (4, 1)]])
    s = dyn.initial_state(f, 123)
    assert s.xs.tolist() == [0.5, 0.5] and s.xl.tolist() == [1.0, 1.0]
    assert np.all(np.abs(s.v) <= 1)
    assert np.array_equal(s.v * 16384, np.round(s.v * 16384))
