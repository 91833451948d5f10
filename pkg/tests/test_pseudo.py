import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftcast.pseudo import clamp_slope, extrapolate, fit_line, generate_pseudo_targets, LinearFit
from driftcast.series import Window
from oracles import ols_normal_equations, pseudo_targets_by_hand


def W(values):
    return Window(np.asarray(values, dtype=float), origin=len(values) - 1)


def test_fit_exact_line():
    fit = fit_line(W([1.0, 0.99, 0.98]))
    assert fit.m == pytest.approx(-0.01, abs=1e-14)
    assert fit.b == pytest.approx(1.0, abs=1e-14)
    assert fit.m_clamped == fit.m


def test_fit_constant_window():
    fit = fit_line(W([0.9] * 5))
    assert fit.m == 0 and fit.m_clamped == 0
    assert fit.b == pytest.approx(0.9, abs=1e-15)


def test_fit_matches_normal_equations(rng):
    xs = rng.uniform(0.7, 1.05, 10)
    fit = fit_line(W(xs))
    m, b = ols_normal_equations(list(xs))
    assert abs(fit.m - m) < 1e-10 and abs(fit.b - b) < 1e-10


@pytest.mark.parametrize("m, expected", [(-0.01, -0.01), (0.02, 0.0), (0.0, 0.0)])
def test_clamp_slope(m, expected):
    assert clamp_slope(m) == expected


def test_extrapolate_literal():
    fit = LinearFit(m=-0.01, m_clamped=-0.01, b=1.0, n=3, mean=0.99)
    np.testing.assert_allclose(extrapolate(fit, 2).values, [0.97, 0.96], atol=1e-15)


def test_extrapolate_mean_reanchor_when_clamped():
    z = generate_pseudo_targets(W([0.90, 0.91, 0.92]), 2, "mean-reanchor")
    np.testing.assert_allclose(z.values, [0.91, 0.91], atol=1e-15)


def test_literal_mode_keeps_intercept_when_clamped():
    # rising window: clamp fires, literal returns the raw intercept b = 0.9
    z = generate_pseudo_targets(W([0.90, 0.91, 0.92]), 2, "literal")
    np.testing.assert_allclose(z.values, [0.90, 0.90], atol=1e-14)


def test_modes_agree_for_falling_window(rng):
    xs = np.linspace(1.0, 0.95, 10) + rng.normal(0, 1e-4, 10)
    a = generate_pseudo_targets(W(xs), 7, "literal")
    b = generate_pseudo_targets(W(xs), 7, "mean-reanchor")
    np.testing.assert_array_equal(a.values, b.values)


def test_default_horizon():
    assert len(generate_pseudo_targets(W(np.linspace(1, 0.9, 10)))) == 30


def test_exact_line_continues():
    xs = [1.0 - 0.01 * i for i in range(10)]
    z = generate_pseudo_targets(W(xs), 3)
    np.testing.assert_allclose(z.values, [0.90, 0.89, 0.88], atol=1e-12)


def test_constant_window_gives_constant_targets():
    z = generate_pseudo_targets(W([0.83] * 10), 5)
    np.testing.assert_allclose(z.values, 0.83, atol=1e-15)


def test_noisy_window_matches_hand_composition(rng):
    xs = np.linspace(0.95, 0.93, 10) + rng.normal(0, 2e-3, 10)
    z = generate_pseudo_targets(W(xs), 30)
    np.testing.assert_allclose(z.values, pseudo_targets_by_hand(list(xs), 30), atol=1e-10)


windows = st.integers(2, 20).flatmap(lambda n: st.lists(st.floats(0.3, 1.1), min_size=n, max_size=n))


@given(windows, st.integers(1, 40))
def test_pseudo_targets_never_increase(xs, h):
    z = generate_pseudo_targets(W(xs), h).values
    assert np.all(np.diff(z) <= 0)


@given(windows, st.integers(1, 20), st.floats(-0.3, 0.3))
def test_shift_invariance(xs, h, c):
    z = generate_pseudo_targets(W(xs), h).values
    zc = generate_pseudo_targets(W(np.asarray(xs) + c), h).values
    np.testing.assert_allclose(zc, z + c, atol=1e-9)


@settings(max_examples=50)
@given(windows)
def test_continuity_past_window_end(xs):
    fit = fit_line(W(xs))
    if fit.m >= 0:
        return
    z = generate_pseudo_targets(W(xs), 1).values
    assert z[0] == pytest.approx(float(fit.at(len(xs))), abs=1e-12)
