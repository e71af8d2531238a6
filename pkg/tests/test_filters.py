"""Filter construction, evaluation, and admissibility contracts."""

import numpy as np
import pytest

import oracles
from nqdkit.errors import ParameterError
from nqdkit.filters import (
    build_filter, filter_fourier, filter_value, filter_values_at_nodes,
)


def test_profile_is_one_at_origin(f12):
    assert abs(filter_value(f12, 0.0) - 1.0) <= 1e-10


def test_frozen_profile_values(f12):
    # frozen from adaptive 2-D quadrature of the defining integral
    assert filter_value(f12, 1.2) == pytest.approx(0.475778190807678, abs=5e-13)
    assert filter_value(f12, 3.0) == pytest.approx(0.001068577231265, abs=5e-13)


def test_profile_matches_quadrature_oracle(f12):
    for s in (0.6, 2.5):
        assert filter_value(f12, 1.2 * s) == pytest.approx(
            oracles.quad_profile_unit(s), abs=1e-9
        )


def test_profile_matches_monte_carlo(f12):
    est, se = oracles.mc_profile_unit(1.0, 400_000, seed=7)
    assert abs(filter_value(f12, 1.2) - est) <= 4.0 * se


def test_width_rescales_argument():
    f_a = build_filter(0.8)
    f_b = build_filter(1.6)
    for b in (0.3, 0.9, 1.7):
        assert filter_value(f_a, b) == pytest.approx(
            filter_value(f_b, 2.0 * b), abs=1e-10
        )


def test_profile_decreases_on_support(f12):
    assert np.all(np.diff(f12.table_omega) <= 1e-14)
    assert f12.table_omega[0] == pytest.approx(1.0, abs=1e-10)


def test_support_bound_regression(f12):
    """The probe walks outward in 0.1 steps; the found bound is stable."""
    assert f12.b_max == 4.6000000000000005
    h = np.exp(0.5 * f12.b_max ** 2) * filter_value(f12, f12.b_max)
    assert h < 0.5e-8


def test_zero_beyond_support(f12):
    assert filter_value(f12, f12.b_max + 0.5) == 0.0
    assert filter_value(f12, 60.0) == 0.0


def test_negative_argument_rejected(f12):
    with pytest.raises(ParameterError):
        filter_value(f12, -0.1)


def test_build_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        build_filter(0.0)
    with pytest.raises(ParameterError):
        build_filter(-1.2)
    with pytest.raises(ParameterError):
        build_filter(1.2, tol=0.5)
    with pytest.raises(ParameterError):
        build_filter(1.2, tol=0.0)


def test_build_is_cached():
    assert build_filter(1.07) is build_filter(1.07)
    assert build_filter(1.07, tol=1e-7) is not build_filter(1.07)


def test_fourier_transform_frozen_origin(f12):
    ft = filter_fourier(f12, np.array([0.0]))
    assert ft[0] == pytest.approx(0.5744768837786773, abs=1e-10)


def test_fourier_transform_nonnegative(f12):
    r = np.linspace(0.0, 6.0, 129)
    assert float(filter_fourier(f12, r).min()) >= -1e-8


def test_node_values_consistent_with_lookup(f12):
    v = filter_values_at_nodes(f12)
    ref = np.array([filter_value(f12, b) for b in f12.gl_b])
    assert np.max(np.abs(v - ref)) < 1e-12
