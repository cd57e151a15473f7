import math

import numpy as np
import pytest

from leibniz_delay.dde import (
    DenseTrajectory,
    HistoryFunction,
    IntegrationConfig,
    IntegrationError,
    convergence_order,
    eval_trajectory,
    hermite,
    integrate,
)

from oracles import linear_delay_pieces, linear_delay_solution


def linear_delay(xd, x):
    return -xd


def test_oracle_known_values():
    # x = 1 - t on [0, 1], then 1 - t + (t - 1)^2 / 2 on [1, 2]
    assert linear_delay_solution(0.5) == pytest.approx(0.5)
    assert linear_delay_solution(2.0) == pytest.approx(-0.5)


def test_value_at_two():
    traj = integrate(linear_delay, HistoryFunction.constant([1.0], 1.0), IntegrationConfig(1.0, 2.0, 100))
    assert abs(traj(2.0)[0] + 0.5) <= 1e-10


def test_knots_hit_multiples_of_tau_exactly():
    cfg = IntegrationConfig(0.3, 3.0, 7)
    t = cfg.knot_times()
    assert np.all(t[::7] == 0.3 * np.arange(len(t[::7])))


def test_last_knot_reaches_t_end():
    cfg = IntegrationConfig(0.5, 1.26, 10)
    assert cfg.knot_times()[-1] >= 1.26
    assert cfg.knot_times()[-2] < 1.26


def test_dense_output_matches_oracle_between_knots():
    pieces = linear_delay_pieces(5)
    traj = integrate(linear_delay, HistoryFunction.constant([1.0], 1.0), IntegrationConfig(1.0, 5.0, 40))
    for t in np.linspace(0.013, 4.99, 37):
        assert traj(t)[0] == pytest.approx(linear_delay_solution(t, pieces), abs=1e-7)


def test_convergence_order_against_oracle():
    pieces = linear_delay_pieces(10)
    res = convergence_order(
        linear_delay,
        HistoryFunction.constant([1.0], 1.0),
        [IntegrationConfig(1.0, 10.0, m) for m in (10, 20, 40, 80)],
        reference=lambda t: np.array([linear_delay_solution(t, pieces)]),
    )
    assert res.order >= 3.5


def test_self_convergence_without_reference():
    f = lambda xd, x: np.array([-x[0] * xd[0]])
    res = convergence_order(f, HistoryFunction.constant([1.0], 0.5), [IntegrationConfig(0.5, 5.0, m) for m in (5, 10, 20, 160)])
    assert 3.5 <= res.order <= 4.5


def test_zero_delay_is_ode():
    traj = integrate(lambda xd, x: -x, HistoryFunction.constant([1.0]), IntegrationConfig(0.0, 1.0, step=1e-3))
    assert traj(1.0)[0] == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_zero_field_keeps_state():
    traj = integrate(lambda xd, x: np.zeros(3), HistoryFunction.constant([1.0, 2.0, 3.0], 0.5), IntegrationConfig(0.5, 2.0, 5))
    assert np.all(traj.states == [1.0, 2.0, 3.0])


def test_polynomial_history_is_used():
    # x' = x(t - 1), phi(t) = t: on [0, 1] x' = t - 1, so x(1) = -1/2
    phi = HistoryFunction.polynomial([[0.0, 1.0]], 1.0)
    traj = integrate(lambda xd, x: xd, phi, IntegrationConfig(1.0, 1.0, 20))
    assert traj(1.0)[0] == pytest.approx(0.5 - 1.0, abs=1e-13)
    assert traj(-0.5)[0] == pytest.approx(-0.5)


def test_blow_up_reports_time():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda xd, x: x * x, HistoryFunction.constant([1.0]), IntegrationConfig(0.0, 5.0, step=1e-2))
    assert 0.9 < info.value.t < 5.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(tau=-1.0, t_end=1.0), dict(tau=0.5, t_end=0.0), dict(tau=0.5, t_end=1.0, steps_per_delay=0),
     dict(tau=0.0, t_end=1.0, step=0.0), dict(tau=0.5, t_end=1.0, record_every=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegrationConfig(**kwargs)


def test_history_range_is_checked():
    phi = HistoryFunction.constant([1.0], 0.5)
    with pytest.raises(ValueError):
        phi(0.1)
    with pytest.raises(ValueError):
        phi(-0.6)


def test_eval_outside_range():
    traj = integrate(linear_delay, HistoryFunction.constant([1.0], 1.0), IntegrationConfig(1.0, 1.0, 4))
    with pytest.raises(ValueError):
        eval_trajectory(traj, 1.5)


def test_hermite_reproduces_cubics():
    p = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.7])
    dp = p.deriv()
    h = 0.4
    for s in (0.0, 0.25, 0.5, 1.0):
        assert hermite(p(1.0), p(1.0 + h), dp(1.0), dp(1.0 + h), h, s) == pytest.approx(p(1.0 + s * h))


def test_delayed_states_match_dense_output():
    f = lambda xd, x: np.array([x[1], -xd[0]])
    traj = integrate(f, HistoryFunction.constant([1.0, 0.0], 0.7), IntegrationConfig(0.7, 3.0, 9))
    direct = np.array([traj(t - 0.7) for t in traj.knots])
    np.testing.assert_allclose(traj.delayed_states(), direct, atol=1e-15)


def test_recorded_keeps_last_knot():
    traj = integrate(linear_delay, HistoryFunction.constant([1.0], 1.0), IntegrationConfig(1.0, 1.0, 10, record_every=3))
    t, x = traj.recorded()
    assert list(t[:-1]) == list(traj.knots[::3])
    assert t[-1] == traj.knots[-1]
    assert isinstance(traj, DenseTrajectory)
