import cmath
import itertools

import numpy as np
import pytest

from cpoly import (
    Permutation4,
    Quartic,
    RootSet,
    classify_permutation,
    companion_roots,
    discriminant,
    eval_poly,
    loop_permutation,
    match_roots,
    solve_quartic,
    track_roots,
)
from pipeline_steps.custom_exception import (
    DegenerateLeadingCoefficient,
    NotClosed,
    RefinementExhausted,
)


def normal_form(h_hat, k_hat):
    return Quartic([1.0, k_hat, 2.0 + h_hat, 0.0, 1.0])


def normal_form_loop(center, radius):
    def path(s):
        z = center + radius * cmath.exp(2j * np.pi * s)
        return normal_form(z.real, z.imag)

    return path


def assert_same_multiset(actual, expected, tol):
    actual = np.asarray(actual, dtype=complex)
    expected = np.asarray(expected, dtype=complex)
    best = min(
        itertools.permutations(range(len(expected))),
        key=lambda order: np.sum(np.abs(actual[list(order)] - expected) ** 2),
    )
    scale = np.maximum(1.0, np.abs(expected))
    assert np.all(np.abs(actual[list(best)] - expected) <= tol * scale)


def test_eval_poly_examples():
    assert abs(eval_poly(Quartic([1, 0, 2, 0, 1]), 1j)) < 1e-15
    assert eval_poly(Quartic([-1, 0, 0, 0, 1]), 0) == -1
    assert eval_poly(normal_form(0.1, 0.0), 1.0) == pytest.approx(4.1)


def test_quartic_rejects_inconsistent_real_flag():
    with pytest.raises(ValueError):
        Quartic([1j, 0, 0, 0, 1], real_coeffs=True)
    assert Quartic([1, 0, 0, 0, 1]).real_coeffs
    assert not Quartic([1j, 0, 0, 0, 1]).real_coeffs


def test_fourth_roots_of_unity():
    roots = solve_quartic(Quartic([-1, 0, 0, 0, 1]))
    assert_same_multiset(roots.roots, [1, -1, 1j, -1j], 1e-12)


def test_double_roots_of_normal_form_at_origin():
    roots = solve_quartic(normal_form(0.0, 0.0))
    # double roots are only resolved to about sqrt(machine epsilon)
    assert_same_multiset(roots.roots, [1j, 1j, -1j, -1j], 1e-7)


def test_degenerate_leading_coefficient():
    with pytest.raises(DegenerateLeadingCoefficient):
        solve_quartic(Quartic([1, 2, 3, 4, 0]))


def test_discriminant_examples():
    assert discriminant(Quartic([-1, 0, 0, 0, 1])) == pytest.approx(-256)
    assert abs(discriminant(normal_form(0.0, 0.0))) < 1e-12


def test_discriminant_matches_root_product():
    h, k = 1.1, 0.05
    q = Quartic([1.0, 0.0, 2 * h, -2 * k, 1.0])
    roots = solve_quartic(q).roots
    product = 1.0 + 0j
    for i in range(4):
        for j in range(i + 1, 4):
            product *= (roots[i] - roots[j]) ** 2
    expected = q.a4**6 * product
    assert abs(discriminant(q)) > 1e-3
    assert abs(discriminant(q) - expected) < 1e-9 * abs(expected)


def test_random_quartics_reconstruct_and_agree_with_companion():
    rng = np.random.default_rng(20240611)
    checked = 0
    for _ in range(10_000):
        coeffs = rng.uniform(-7, 7, 5) + 1j * rng.uniform(-7, 7, 5)
        if abs(coeffs[4]) < 0.5:
            continue
        q = Quartic(coeffs)
        reference = companion_roots(q)
        # skip clustered roots; both solvers lose digits there
        if reference.min_separation() < 1e-2 * max(1.0, np.max(np.abs(reference.roots))):
            continue
        roots = solve_quartic(q)
        rebuilt = roots.reconstruct(q.a4)
        assert np.max(np.abs(rebuilt - q.coeffs)) <= 1e-9 * q.scale()
        assert_same_multiset(roots.roots, reference.roots, 1e-9)
        checked += 1
    assert checked > 5000


def test_real_quartics_have_conjugate_closed_roots():
    rng = np.random.default_rng(7)
    for _ in range(500):
        coeffs = rng.uniform(-10, 10, 5)
        coeffs[4] = max(abs(coeffs[4]), 1.0)
        roots = solve_quartic(Quartic(coeffs)).roots
        for r in roots:
            assert np.min(np.abs(roots - np.conj(r))) < 1e-9 * max(1.0, abs(r))


def test_match_roots_identical_sets():
    roots = RootSet([1j + 0.1, 1j - 0.1, -1j + 0.1, -1j - 0.1])
    perm, quality = match_roots(roots, roots)
    assert perm.is_identity()
    assert quality == float("inf")


def test_match_roots_small_motion():
    prev = RootSet([1j + 0.1, 1j - 0.1, -1j + 0.1, -1j - 0.1])
    nxt = RootSet(prev.roots + 0.01 * np.array([1, 1j, -1, -1j]))
    perm, quality = match_roots(prev, nxt)
    assert perm.is_identity()
    assert quality > 1


def test_match_roots_ambiguous_swap():
    prev = RootSet([-1, 1, 10j, -10j])
    nxt = RootSet([1j, -1j, 10j, -10j])
    _, quality = match_roots(prev, nxt)
    assert quality < 3.0


def test_permutation_helpers():
    perm = Permutation4((1, 0, 3, 2))
    assert perm.cycle_notation() == "(0 1)(2 3)"
    assert perm.then(perm).is_identity()
    assert perm.inverse() == perm
    assert Permutation4.identity().cycle_notation() == "()"
    with pytest.raises(ValueError):
        Permutation4((0, 0, 1, 2))


def test_track_constant_path_is_identity():
    q = normal_form(0.3, 0.1)
    track = track_roots(lambda s: q, 16, 3.0)
    assert all(perm.is_identity() for perm in track.step_perms)
    assert loop_permutation(track).is_identity()


def test_track_roots_validates_arguments():
    q = normal_form(0.3, 0.1)
    with pytest.raises(ValueError):
        track_roots(lambda s: q, 8, 3.0)
    with pytest.raises(ValueError):
        track_roots(lambda s: q, 16, 1.0)


def test_normal_form_loop_around_origin_exchanges_pairs():
    track = track_roots(normal_form_loop(0.0, 0.01), 64, 3.0)
    start = track.rootsets[0]
    end = track.rootsets[-1]
    assert_same_multiset(end.roots, start.roots, 1e-12)
    assert all(ratio >= 3.0 for ratio in track.quality)
    perm = loop_permutation(track)
    assert perm.cycle_notation().count("(") == 2
    assert classify_permutation(perm, start) == "double_transposition"


def test_normal_form_loop_away_from_origin_is_identity():
    perm = loop_permutation(track_roots(normal_form_loop(0.5, 0.1), 64, 3.0))
    fine = loop_permutation(track_roots(normal_form_loop(0.5, 0.1), 256, 3.0))
    assert perm.is_identity()
    assert fine.is_identity()


def test_loop_permutation_stable_under_doubling():
    coarse = loop_permutation(track_roots(normal_form_loop(0.0, 0.05), 32, 3.0))
    fine = loop_permutation(track_roots(normal_form_loop(0.0, 0.05), 64, 3.0))
    assert coarse == fine


def test_tracked_roots_follow_the_nearest_root():
    track = track_roots(normal_form_loop(0.0, 0.01), 32, 3.0)
    tracked = track.tracked_roots()
    assert tracked.shape == (len(track), 4)
    steps = np.abs(np.diff(tracked, axis=0))
    assert np.max(steps) < 0.05


def test_open_path_is_not_closed():
    track = track_roots(lambda s: normal_form(0.2 + 0.1 * s, 0.0), 16, 3.0)
    with pytest.raises(NotClosed):
        loop_permutation(track)


def test_path_through_double_root_is_refused():
    # the straight segment k_hat = 0 crosses the double root at the origin
    with pytest.raises(RefinementExhausted):
        track_roots(lambda s: normal_form(-0.1 + 0.2 * s, 0.0), 17, 3.0)
