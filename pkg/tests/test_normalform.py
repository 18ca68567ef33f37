import cmath
import math

import numpy as np
import pytest

from cpoly import Quartic, loop_permutation, classify_permutation, track_roots, solve_quartic
from models import IntegrableModel, get_model
from models.spherical_pendulum import SphericalPendulumModel
from normalform import (
    F_map,
    genericity_check,
    jacobian_F,
    lemma_exchange_roots,
    normal_form_quartic,
    normalize_quartic,
)
from pipeline_steps.custom_exception import BranchFailure, NonGeneric


class FrozenSpectrumModel(SphericalPendulumModel):
    """Spherical pendulum whose spectral curve ignores (h, k)."""

    def spectral_coeffs(self, h, k):
        return super().spectral_coeffs(1.0, 0.0)


def jc_closed_form_det(model):
    # g⁶·S0 / (4·Im(λ0)⁷)
    lam0 = model.critical_root()
    return model.g**6 * model.s0 / (4 * lam0.imag**7)


def test_normal_form_is_a_fixed_point():
    result = normalize_quartic(normal_form_quartic(0.1, 0.02), 1j)
    assert result.a == pytest.approx(2.1, abs=1e-14)
    assert result.b == pytest.approx(0.02, abs=1e-14)
    assert result.u == pytest.approx(1.0, abs=1e-14)


def test_sp_critical_quartic_normal_form(sp):
    result = normalize_quartic(sp.spectral_coeffs(1.0, 0.0), 1j)
    assert (result.a, result.b, result.u) == pytest.approx((2.0, 0.0, 1.0), abs=1e-14)


def test_jc_critical_quartic_normal_form(jc):
    lam0 = complex(1.0, 1.0 / math.sqrt(2.0))
    q = jc.spectral_coeffs(2.0, 1.0)
    result = normalize_quartic(q, lam0)
    assert result.a == pytest.approx(2.0, abs=1e-9)
    assert result.b == pytest.approx(0.0, abs=1e-9)
    # double roots land on ±i after the change of variable
    mapped = (solve_quartic(q).roots - lam0.real) / lam0.imag
    mapped = (mapped - result.shift_hk) / result.s
    np.testing.assert_allclose(np.sort(np.abs(mapped.imag)), 1.0, atol=1e-6)
    np.testing.assert_allclose(mapped.real, 0.0, atol=1e-6)


@pytest.mark.parametrize("kind", ["jc", "sp", "quasi"])
def test_normal_form_reconstructs_the_quartic(kind):
    model = get_model(kind)
    h0, k0 = model.critical_value()
    for angle in np.linspace(0, 2 * np.pi, 9)[:-1]:
        h, k = h0 + 0.1 * np.sin(angle), k0 + 0.1 * np.cos(angle)
        q = model.spectral_coeffs(h, k)
        rebuilt = normalize_quartic(q, model.critical_root()).to_quartic()
        np.testing.assert_allclose(rebuilt.coeffs, q.coeffs, rtol=1e-10, atol=1e-10 * q.scale())


def test_branch_failure_for_negative_constant_ratio():
    with pytest.raises(BranchFailure):
        normalize_quartic(Quartic([-1.0, 0.0, 0.0, 0.0, 1.0]), 1j)


def test_normalize_requires_real_coefficients():
    with pytest.raises(ValueError):
        normalize_quartic(Quartic([1j, 0, 2, 0, 1]), 1j)


@pytest.mark.parametrize("kind", ["jc", "sp", "quasi"])
def test_F_vanishes_at_the_critical_value(kind):
    model = get_model(kind)
    h_hat, k_hat = F_map(model, *model.critical_value())
    assert abs(h_hat) < 1e-9
    assert abs(k_hat) < 1e-9


def test_quasi_F_map_is_exact(quasi):
    for h, k in [(0.1, -0.2), (-0.3, 0.05), (0.0, 0.0), (0.25, 0.25)]:
        h_hat, k_hat = F_map(quasi, h, k)
        assert abs(h_hat - k) < 1e-12
        assert abs(k_hat + h) < 1e-12


def test_sp_F_keeps_k_hat_zero_on_the_axis(sp):
    for delta in (-0.05, 0.01, 0.07):
        _, k_hat = F_map(sp, 1.0 + delta, 0.0)
        assert k_hat == 0.0


def test_sp_jacobian(sp):
    report = jacobian_F(sp)
    np.testing.assert_allclose(report.D, [[0.0, 2.0], [2.0, 0.0]], atol=1e-6)
    assert report.det == pytest.approx(-4.0, rel=1e-6)
    assert report.orientation == -1
    assert report.passed


def test_jc_jacobian_matches_closed_form(jc):
    report = jacobian_F(jc)
    expected = jc_closed_form_det(jc)
    assert expected == pytest.approx(2 * math.sqrt(2.0))
    assert report.det == pytest.approx(expected, rel=1e-4)
    assert report.orientation == 1


def test_jc_jacobian_closed_form_off_resonance():
    model = get_model("jc", {"omega0": 1.0, "omega": 2.3, "g": 1.2, "s0": 1.0})
    assert jacobian_F(model).det == pytest.approx(jc_closed_form_det(model), rel=1e-4)


def test_quasi_jacobian(quasi):
    report = jacobian_F(quasi)
    np.testing.assert_allclose(report.D, [[1.0, 0.0], [0.0, -1.0]], atol=1e-9)
    assert report.det == pytest.approx(-1.0)


@pytest.mark.parametrize("kind", ["jc", "sp"])
def test_jacobian_is_stable_under_step_halving(kind):
    model = get_model(kind)
    coarse = np.array(jacobian_F(model, 1e-4).D)
    fine = np.array(jacobian_F(model, 5e-5).D)
    assert np.max(np.abs(coarse - fine)) < 0.05 * np.max(np.abs(fine))


def test_jacobian_rejects_non_positive_step(sp):
    with pytest.raises(ValueError):
        jacobian_F(sp, 0.0)


def test_genericity_check(jc, sp, quasi):
    for model in (jc, sp, quasi):
        assert genericity_check(model).passed
    report = genericity_check(sp)
    assert report.model_dump(by_alias=True)["pass"] is True


def test_genericity_check_rejects_frozen_spectrum():
    model = FrozenSpectrumModel()
    assert isinstance(model, IntegrableModel)
    with pytest.raises(NonGeneric):
        genericity_check(model)


def test_exchange_roots_follow_the_leading_order_formula():
    radius = 1e-4

    def path(s):
        z = radius * cmath.exp(2j * np.pi * s)
        return normal_form_quartic(z.real, z.imag)

    track = track_roots(path, 64, 3.0)
    for s, rootset in zip(track.params, track.rootsets):
        z = radius * cmath.exp(2j * np.pi * s)
        expected = np.array(lemma_exchange_roots(z.real, z.imag))
        upper = np.array([r for r in rootset.roots if r.imag > 0])
        error = min(
            np.max(np.abs(upper - expected)),
            np.max(np.abs(upper[::-1] - expected)),
        )
        assert error < 1e-3
    assert classify_permutation(loop_permutation(track), track.rootsets[0]) == "double_transposition"
