import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from kuramoto_sdre.controller import (
    CareFailed,
    SdreController,
    SdreWeights,
    bias_control,
    bias_target,
    control_step,
    sdre_feedback,
)
from kuramoto_sdre.kuramoto import NetworkParams, control_matrix_b, drift_f, freq_diff_c, jacobian_a
from kuramoto_sdre.riccati import BadWeights, CareProblem, solve_care

FOUR = NetworkParams(4, 1.0, [1.30, 1.39, 0.44, 1.28])
FOUR_XDES = np.array([-0.74, 0.27, 0.15])


def random_case(seed, n_max=6):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    params = NetworkParams(n, 1.0, rng.uniform(0, np.pi / 2, n))
    x_des = rng.uniform(-np.pi / 4, np.pi / 4, n - 1)
    e = rng.uniform(-0.5, 0.5, n - 1)
    return params, x_des, e


def test_weights_validation():
    w = SdreWeights.scaled_identity(4, 1000.0, 1.0)
    assert w.q.shape == (3, 3) and w.r.shape == (4, 4)
    with pytest.raises(BadWeights):
        SdreWeights(np.eye(3), np.eye(3))
    with pytest.raises(BadWeights):
        SdreWeights(np.eye(2), -np.eye(3))


def test_bias_zero_for_identical_oscillators():
    p = NetworkParams.uniform(4, omega=0.8)
    # x_des = 0 and e = 0 makes B vanish too; pinv of zero is zero
    assert not np.any(bias_control(p, np.zeros(3), np.zeros(3)))
    # away from sync, f(0) + c = 0 still gives zero bias
    assert not np.any(bias_target(p, np.zeros(3)))
    assert not np.any(bias_control(p, np.zeros(3), [0.3, -0.1, 0.2]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bias_is_min_norm_least_squares(seed):
    params, x_des, e = random_case(seed)
    target = drift_f(params, x_des, np.zeros(params.n - 1)) + freq_diff_c(params)
    b = control_matrix_b(params, x_des, e)
    v = bias_control(params, x_des, e)
    v_ls = np.linalg.lstsq(b, -target, rcond=None)[0]
    np.testing.assert_allclose(v, v_ls, atol=1e-8 * max(1.0, np.abs(v_ls).max()))


def test_sdre_zero_error_zero_feedback():
    v, gain, res = sdre_feedback(FOUR, FOUR_XDES, SdreWeights.scaled_identity(4, 1000, 1), np.zeros(3))
    assert not np.any(v)
    assert gain.shape == (4, 3)


@pytest.mark.parametrize("e", [0.3, -0.8, 1.1])
def test_sdre_two_oscillator_closed_form(e):
    params = NetworkParams(2, 1.3, [0.0, 0.4])
    x_des = np.array([0.25])
    q = 7.0
    a = jacobian_a(params, x_des, [e])[0, 0]
    b = control_matrix_b(params, x_des, [e])[0]
    g = b @ b
    # 2 a p - g p^2 + q = 0, stabilizing root
    p = (a + np.sqrt(a * a + g * q)) / g
    v, _, _ = sdre_feedback(params, x_des, SdreWeights(np.array([[q]]), np.eye(2)), [e])
    np.testing.assert_allclose(v, -b * p * e, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_sdre_weight_scale_invariance(seed, c):
    params, x_des, e = random_case(seed)
    n = params.n
    v1, _, _ = sdre_feedback(params, x_des, SdreWeights.scaled_identity(n, 1000, 1), e)
    v2, _, _ = sdre_feedback(params, x_des, SdreWeights.scaled_identity(n, 1000 * c, c), e)
    assert np.linalg.norm(v1 - v2) <= 1e-8 * max(1.0, np.linalg.norm(v1))


def test_sdre_matches_scipy_gain():
    params, x_des, e = random_case(3)
    w = SdreWeights.scaled_identity(params.n, 1000, 1)
    v, gain, _ = sdre_feedback(params, x_des, w, e)
    a, b = jacobian_a(params, x_des, e), control_matrix_b(params, x_des, e)
    p = sla.solve_continuous_are(a, b, w.q, w.r)
    np.testing.assert_allclose(gain, b.T @ p, rtol=1e-7, atol=1e-9)


def test_feedback_linear_in_error_for_frozen_matrices():
    params, x_des, e = random_case(5)
    w = SdreWeights.scaled_identity(params.n, 1000, 1)
    _, gain, _ = sdre_feedback(params, x_des, w, e)
    for alpha in (-2.0, 0.5, 3.0):
        np.testing.assert_allclose(-gain @ (alpha * e), alpha * (-gain @ e), rtol=1e-14)


def test_control_step_sync_equal_frequencies():
    p = NetworkParams.uniform(4, omega=1.0)
    d = control_step(p, np.zeros(3), SdreWeights.scaled_identity(4, 1000, 1), np.zeros(3))
    assert np.array_equal(d.u, np.ones(4))
    assert d.no_authority and d.fallback_used


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_control_step_composition(seed):
    params, x_des, e = random_case(seed)
    d = control_step(params, x_des, SdreWeights.scaled_identity(params.n, 1000, 1), e)
    assert np.array_equal(d.u, 1.0 + d.v_bias + d.v_sdre)
    assert not d.fallback_used
    assert d.care_residual <= 1e-8 * max(1.0, 1e3)


def test_control_step_at_zero_error_is_steady_state():
    w = SdreWeights.scaled_identity(4, 1000, 1)
    d = control_step(FOUR, FOUR_XDES, w, np.zeros(3))
    assert np.array_equal(d.u, 1.0 + bias_control(FOUR, FOUR_XDES, np.zeros(3)))
    assert np.array_equal(d.u, SdreController(FOUR, FOUR_XDES, w).steady_state_u())


def test_steady_state_holds_equilibrium():
    # at e = 0 with u_ss applied, de/dt = 0
    ctrl = SdreController(FOUR, FOUR_XDES, SdreWeights.scaled_identity(4, 1000, 1))
    v = ctrl.steady_state_u() - 1.0
    z = np.zeros(3)
    rate = drift_f(FOUR, FOUR_XDES, z) + freq_diff_c(FOUR) + control_matrix_b(FOUR, FOUR_XDES, z) @ v
    np.testing.assert_allclose(rate, 0.0, atol=1e-12)


def test_care_failure_falls_back_to_bias(monkeypatch):
    import kuramoto_sdre.controller as mod

    def boom(*args, **kwargs):
        raise CareFailed("forced")

    monkeypatch.setattr(mod, "sdre_feedback", boom)
    d = control_step(FOUR, FOUR_XDES, SdreWeights.scaled_identity(4, 1000, 1), np.array([0.2, 0.1, -0.3]))
    assert d.fallback_used and not d.no_authority
    assert not np.any(d.v_sdre)
    assert np.array_equal(d.u, 1.0 + d.v_bias)
    assert np.isnan(d.care_residual)


def test_controllability_diagnostic():
    d = control_step(FOUR, FOUR_XDES, SdreWeights.scaled_identity(4, 1000, 1), np.array([0.2, 0.1, -0.3]),
                     check_controllability=True)
    assert d.controllability_rank == 3


def test_negative_inputs_flagged_not_rejected():
    d = control_step(FOUR, FOUR_XDES, SdreWeights.scaled_identity(4, 1000, 1), np.zeros(3))
    assert d.u[1] < 0 and d.negative_inputs


def test_inner_care_solves_pass_invariants():
    params, x_des, e = random_case(9)
    w = SdreWeights.scaled_identity(params.n, 1000, 1)
    prob = CareProblem(jacobian_a(params, x_des, e), control_matrix_b(params, x_des, e), w.q, w.r)
    sol = solve_care(prob)
    p = sol.p
    k = prob.gain(p)
    closed = prob.a - prob.b @ k
    lyap = closed.T @ p + p @ closed + prob.q + p @ prob.g() @ p
    assert np.linalg.norm(lyap) <= 1e-7 * max(1.0, np.linalg.norm(p) ** 2)
