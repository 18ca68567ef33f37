import math

import numpy as np
import pytest

from flow import (
    integrate,
    quasi_delta_rotation,
    quasi_relative_rotation,
    quasi_rotation_closed_form,
    quasi_sweep,
    quasi_transit,
    quasi_transit_from_state,
)
from pipeline_steps.custom_exception import DegenerateFiber

RHO = 0.1
EPS_VALUES = [0.4, 0.2, 0.1, 0.05]
# Δ(ε) from the closed form at ρ = 0.1, R = 1
EXPECTED_DELTA = [5.402, 5.841, 6.062, 6.1727]


@pytest.mark.parametrize("phi", [-1.0, -0.3, 0.0, 0.7, math.pi / 2, 2.5, 4.0])
def test_relative_rotation_matches_closed_form(phi):
    numeric = quasi_relative_rotation(RHO, phi)
    assert numeric == pytest.approx(quasi_rotation_closed_form(RHO, phi), abs=1e-6)


def test_closed_form_special_angles():
    assert quasi_rotation_closed_form(RHO, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    half_time = 0.5 * math.acosh(1 / RHO)
    assert quasi_rotation_closed_form(RHO, 0.0) == pytest.approx(math.atan(math.sinh(2 * half_time)))


def test_transit_on_the_positive_k_axis_stays_on_the_imaginary_axis():
    transit = quasi_transit(RHO, math.pi / 2)
    np.testing.assert_allclose(transit.lam.real, 0.0, atol=1e-8)
    assert np.all(np.abs(transit.lam.imag) < 1)
    assert transit.t_entry < 0 < transit.t_exit


def test_transits_on_the_h_axis_follow_the_unit_circle():
    left = quasi_transit(RHO, 0.0)
    right = quasi_transit(RHO, math.pi)
    np.testing.assert_allclose(np.abs(left.lam), 1.0, atol=1e-7)
    np.testing.assert_allclose(np.abs(right.lam), 1.0, atol=1e-7)
    assert np.all(left.lam.real < 0)
    assert np.all(right.lam.real > 0)


def test_transits_of_distinct_fibers_do_not_meet():
    paths = [quasi_transit(RHO, phi).lam for phi in (0.2, 0.8, 1.4)]
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            distance = np.min(np.abs(paths[i][:, None] - paths[j][None, :]))
            assert distance > 1e-3


def test_singular_fiber_keeps_lambda_fixed(quasi):
    # a0 = i·conj(b0) lies on the stable manifold of the equilibrium
    state = [0.0, 0.2, 0.2, 0.0]
    traj = integrate(quasi, state, 1.0)
    lam = np.array([quasi.reduced_lambda(s) for s in traj.states])
    np.testing.assert_allclose(lam, -1j, atol=1e-8)
    with pytest.raises(DegenerateFiber):
        quasi_transit_from_state(state, model=quasi)


def test_transit_rejects_states_outside_the_ball():
    with pytest.raises(ValueError):
        quasi_transit_from_state([1.0, 0.0, 0.5, 0.0])


@pytest.mark.parametrize("phi", [-math.pi / 2, 3 * math.pi / 2])
def test_ray_through_infinity_is_degenerate(phi):
    with pytest.raises(DegenerateFiber):
        quasi_relative_rotation(RHO, phi)


def test_fiber_must_fit_in_the_ball():
    with pytest.raises(ValueError):
        quasi_transit(1.0, 0.0)
    with pytest.raises(ValueError):
        quasi_rotation_closed_form(0.0, 0.0)


@pytest.mark.parametrize("eps", [0.0, math.pi / 2])
def test_delta_rotation_rejects_eps_out_of_range(eps):
    with pytest.raises(ValueError):
        quasi_delta_rotation(RHO, eps)


def test_sweep_converges_to_two_pi():
    rows = quasi_sweep(RHO, EPS_VALUES)
    assert [row["eps"] for row in rows] == EPS_VALUES
    errors = [row["error"] for row in rows]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 0.05 * 2 * math.pi
    for row, expected in zip(rows, EXPECTED_DELTA):
        assert row["delta"] == pytest.approx(row["closed_form"], abs=1e-6)
        assert row["closed_form"] == pytest.approx(expected, abs=1e-3)


def test_limit_hardly_depends_on_rho():
    coarse = quasi_delta_rotation(0.1, 0.05)
    fine = quasi_delta_rotation(0.05, 0.05)
    assert abs(coarse - fine) < 0.02 * 2 * math.pi
