import math

import numpy as np
import pytest

from newtonflow.flow import (
    Direction,
    FlowFailure,
    FlowOptions,
    FlowStatus,
    Trajectory,
    decay_drift,
    direction_deviation,
    integrate,
    newton_field,
    solve_inverse,
)
from newtonflow.maps import builtin

ZAMP = builtin("zampieri-ex5")
F_ORIGIN = (1.0, 0.0)  # f(0,0) for the planar oracle map


def _bisect_root(g, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_newton_field_closed_form():
    got = newton_field(ZAMP, (1.0, 1.0), F_ORIGIN)
    expected = (math.exp(-1) / math.sqrt(2) - 1.0, -math.sqrt(2) * math.exp(-1))
    np.testing.assert_allclose(got, expected, rtol=1e-12)
    # against the shipped companion formula on random points
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.uniform(-3, 3, size=2)
        np.testing.assert_allclose(
            newton_field(ZAMP, x, F_ORIGIN), ZAMP.field_origin(x), rtol=1e-9, atol=1e-12
        )


def test_newton_field_equilibrium_and_linear():
    y = ZAMP.eval((0.5, -0.25))
    np.testing.assert_allclose(newton_field(ZAMP, (0.5, -0.25), y), (0.0, 0.0), atol=1e-15)
    a = np.array([[2.0, 1.0], [0.0, 3.0]])
    m = builtin("linear", a=a)
    x = np.array([1.0, -2.0])
    np.testing.assert_allclose(newton_field(m, x, (0.0, 0.0)), -x, rtol=1e-14)


def test_forward_flow_converges_with_exact_decay():
    traj = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, FlowOptions())
    assert traj.status is FlowStatus.CONVERGED
    np.testing.assert_allclose(traj.final_state, (0.0, 0.0), atol=1e-6)
    assert decay_drift(traj) <= 1e-6
    assert direction_deviation(traj) <= 1e-5
    # residual norm at each sample matches e^{-t} ||r0|| down to the
    # cancellation floor of evaluating f(x) - y* in doubles
    rn = np.linalg.norm(traj.residuals, axis=1)
    np.testing.assert_allclose(rn, rn[0] * np.exp(-traj.t), rtol=1e-7, atol=1e-13)


def test_linear_flow_exact_exponential():
    a = np.array([[2.0, 1.0], [0.0, 1.0]])
    m = builtin("linear", a=a)
    x0 = np.array([5.0, -3.0])
    traj = integrate(m, x0, (0.0, 0.0), FlowOptions())
    assert traj.status is FlowStatus.CONVERGED
    assert decay_drift(traj) <= 1e-10
    for i in range(len(traj.t)):
        np.testing.assert_allclose(
            traj.states[i], math.exp(-traj.t[i]) * x0, rtol=1e-8, atol=1e-12
        )


def test_bounded_map_blows_up_outside_range():
    m = builtin("arctan1d")
    traj = integrate(m, (0.0,), (2.0,), FlowOptions())
    assert traj.status is FlowStatus.BLOWUP
    assert abs(traj.final_state[0]) > 1e6


def test_equilibrium_returns_immediately():
    y = ZAMP.eval((0.0, 0.0))
    traj = integrate(ZAMP, (0.0, 0.0), y, FlowOptions())
    assert traj.status is FlowStatus.CONVERGED
    assert traj.steps == 0
    assert len(traj.t) == 1


def test_monotone_residual_forward():
    traj = integrate(ZAMP, (2.0, -1.5), F_ORIGIN, FlowOptions())
    rn = np.linalg.norm(traj.residuals, axis=1)
    assert np.all(np.diff(rn) < 0)
    assert np.all(np.diff(traj.t) > 0)


def test_backward_flow_inverts_forward():
    opts = FlowOptions(t_max=3.0, residual_tol=1e-30)
    fw = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, opts)
    assert fw.status is FlowStatus.HORIZON_REACHED
    bw = integrate(ZAMP, fw.final_state, F_ORIGIN, opts, Direction.BACKWARD)
    assert bw.status is FlowStatus.HORIZON_REACHED
    assert np.all(np.diff(bw.t) < 0)
    assert np.linalg.norm(bw.final_state - (1.0, 1.0)) <= 1e-5
    # backward decay identity with signed time (residual grows as e^{|t|})
    assert decay_drift(bw) <= 1e-6 * np.exp(3.0)


def test_drift_bound_scales_with_tolerance():
    rot = builtin("rot-poly2d")
    cases = [
        (ZAMP, (1.0, 1.0), F_ORIGIN),
        (ZAMP, (-3.0, 2.5), F_ORIGIN),
        (rot, (2.0, -1.0), rot.eval((0.3, 0.4))),
        (builtin("cubic1d"), (3.0,), (1.0,)),
    ]
    for tol in (1e-10, 1e-8, 1e-6):
        opts = FlowOptions(abs_tol=tol, rel_tol=tol)
        for m, start, target in cases:
            traj = integrate(m, start, target, opts)
            assert traj.status is FlowStatus.CONVERGED, (m.name, tol)
            assert decay_drift(traj) <= 100.0 * tol * traj.steps, (m.name, tol)


def test_drift_detector_fires_on_injected_fault():
    traj = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, FlowOptions())
    res = traj.residuals.copy()
    res[len(res) // 2, 0] += 1e-3
    broken = Trajectory(
        t=traj.t, states=traj.states, residuals=res,
        status=traj.status, steps=traj.steps, target=traj.target,
    )
    r0 = np.linalg.norm(res[0])
    assert decay_drift(broken) >= 1e-3 / r0
    assert decay_drift(traj) < 1e-3 / r0


def test_solve_inverse_planar_oracle():
    v = math.e / math.sqrt(2.0)
    x = solve_inverse(ZAMP, (v, v), (0.0, 0.0))
    assert np.linalg.norm(x - (1.0, 1.0)) <= 1e-8


def test_solve_inverse_cubic_against_bisection():
    m = builtin("cubic1d")
    root = _bisect_root(lambda x: x + x**3 - 10.0, 0.0, 3.0)
    x = solve_inverse(m, (10.0,), (0.0,))
    assert abs(x[0] - root) <= 1e-8


def test_solve_inverse_linear_exact():
    a = np.array([[3.0, 1.0], [-1.0, 2.0]])
    m = builtin("linear", a=a)
    y = np.array([1.0, 4.0])
    x = solve_inverse(m, y, (7.0, -5.0))
    np.testing.assert_allclose(x, np.linalg.solve(a, y), atol=1e-9)


def test_solve_inverse_failure_wraps_trajectory():
    m = builtin("arctan1d")
    with pytest.raises(FlowFailure) as ei:
        solve_inverse(m, (2.0,), (0.0,))
    assert ei.value.status is FlowStatus.BLOWUP
    assert abs(ei.value.trajectory.final_state[0]) > 1e6


def test_trajectory_csv_and_summary(tmp_path):
    traj = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, FlowOptions())
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,x_0,x_1,r_norm,drift"
    assert len(lines) == len(traj.t) + 1
    s = traj.summary()
    assert set(s) == {"status", "t_final", "steps", "final_x", "final_residual", "max_drift"}
    assert s["status"] == "converged"
    assert s["final_residual"] <= 1e-9


def test_options_validation():
    with pytest.raises(ValueError):
        FlowOptions(abs_tol=0.0)
    with pytest.raises(ValueError):
        FlowOptions(t_max=-1.0)
    with pytest.raises(ValueError):
        FlowOptions(max_steps=0)


def test_integrate_deterministic():
    a = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, FlowOptions())
    b = integrate(ZAMP, (1.0, 1.0), F_ORIGIN, FlowOptions())
    np.testing.assert_array_equal(a.t, b.t)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.residuals, b.residuals)


def test_singular_seed_is_a_status_not_an_exception():
    # f(x) = (x0^2 + 1, x1) has a singular Jacobian on the x0 = 0 line
    from newtonflow.maps import C1Map

    m = C1Map(
        "fold", 2,
        lambda x: np.array([x[0] ** 2 + 1.0, x[1]]),
        lambda x: np.array([[2.0 * x[0], 0.0], [0.0, 1.0]]),
    )
    traj = integrate(m, (0.0, 0.5), (2.0, 0.0), FlowOptions())
    assert traj.status is FlowStatus.SINGULAR_JACOBIAN
    assert traj.steps == 0
