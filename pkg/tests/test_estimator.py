"""Pattern functions and sampled quasiprobability estimates."""

import dataclasses

import numpy as np
import pytest

import oracles
from nqdkit.errors import FormatError, ParameterError
from nqdkit.estimator import (
    pattern_fn, pattern_table, phase_randomized_pattern, read_pnqd,
    sample_nqd, sample_nqd_eta_removed, sample_nqd_point, sample_pnqd,
    write_pnqd,
)
from nqdkit.filters import build_filter
from nqdkit.homodyne import simulate_dataset
from nqdkit.processes import PhotonAddition, format_process
from nqdkit.quasiprob import GridSpec, RadialGridSpec, nqd_direct
from nqdkit.states import Coherent, Fock, PhotonAdded, SqueezedVacuum, Thermal

PHASES_5 = [k * np.pi / 5 for k in range(5)]
PHASES_10 = [k * np.pi / 10 for k in range(10)]


def test_pattern_origin_frozen(f12):
    assert pattern_fn(0.0, 0.0, 0j, f12) == pytest.approx(1.881001090901675, abs=2e-9)


def test_pattern_table_matches_quadrature(f12):
    """Table lookups reproduce the defining integral, including past the
    tabulated range where the cosine sum takes over."""
    tab = pattern_table(f12)
    rng = np.random.default_rng(3)
    us = np.concatenate([rng.uniform(0, 38, 12), rng.uniform(38, 44, 3),
                         [0.0, tab.u_max]])
    for u in us:
        assert float(tab.g(u)) == pytest.approx(
            oracles.quad_pattern_g(f12, u), abs=1e-8
        )


def test_pattern_fn_equivariance(f12):
    rng = np.random.default_rng(4)
    x = rng.normal(size=50) * 2.0
    beta = 0.7 - 0.4j
    for delta in (0.3, 0.9, 1.4):
        a = pattern_fn(x, 0.2 + delta, beta * np.exp(1j * delta), f12)
        b = pattern_fn(x, 0.2, beta, f12)
        assert np.max(np.abs(a - b)) <= 1e-12


def test_pattern_fn_origin_is_phase_free_and_even(f12):
    # mirror-symmetric axis built by negation so both halves are bitwise twins
    pos = np.array([0.3, 0.6, 1.2, 1.8, 2.4, 3.0])
    x = np.concatenate([-pos[::-1], [0.0], pos])
    a = pattern_fn(x, 0.0, 0j, f12)
    b = pattern_fn(x, 1.1, 0j, f12)
    assert np.array_equal(a, b)
    assert np.array_equal(a, a[::-1])


def test_phase_randomized_matches_phase_average(f12):
    x = np.array([-1.7, 0.3, 2.4])
    a = 0.9
    phis = (np.arange(256) + 0.5) * 2.0 * np.pi / 256
    avg = np.mean([pattern_fn(x, p, a + 0j, f12) for p in phis], axis=0)
    assert np.max(np.abs(phase_randomized_pattern(x, a, f12) - avg)) <= 1e-6


def test_phase_randomized_zero_radius(f12):
    x = np.linspace(-2.0, 2.0, 9)
    assert np.allclose(
        phase_randomized_pattern(x, 0.0, f12), pattern_fn(x, 0.4, 0j, f12),
        atol=1e-12,
    )
    with pytest.raises(ParameterError):
        phase_randomized_pattern(x, -0.5, f12)


def test_sampled_grid_consistent_with_direct(f12):
    d = simulate_dataset(Coherent(0j), PHASES_10, 8000, seed=41)
    grid = GridSpec(n=21, half_width=2.0)
    g = sample_nqd(d, grid, f12)
    ref = nqd_direct(Coherent(0j), f12, grid)
    pulls = np.abs(g.values - ref.values) / g.stat_err
    assert float(np.mean(pulls <= 3.0)) >= 0.99
    assert g.meta["n"] == 80000
    assert g.meta["eta"] == 1.0


def test_sampled_negativity_significant(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 8000, seed=42)
    v, e = sample_nqd_point(d, 0j, f12)
    assert v < 0.0
    assert -v / e > 5.0
    assert abs(v - (-0.35897107280873203)) <= 4.0 * e


def test_single_sample_is_exact_with_infinite_error(f12):
    d = simulate_dataset(Fock(1), [0.3], 1, seed=1)
    v, e = sample_nqd_point(d, 0.2 + 0.1j, f12)
    ref = pattern_fn(d.x, 0.3, 0.2 + 0.1j, f12)
    assert v == float(ref[0])
    assert np.isinf(e)


def test_estimate_equivariance(f12):
    d = simulate_dataset(SqueezedVacuum(0.5, 3.0), [0.1, 0.5, 1.1, 1.7, 2.3],
                         200, seed=6)
    delta = 0.4
    d2 = dataclasses.replace(d, phases=tuple(p + delta for p in d.phases))
    beta = 0.6 - 0.3j
    v1, e1 = sample_nqd_point(d, beta, f12)
    v2, e2 = sample_nqd_point(d2, beta * np.exp(1j * delta), f12)
    assert abs(v1 - v2) <= 1e-12
    assert abs(e1 - e2) <= 1e-12


def test_point_matches_grid_cell(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 500, seed=7)
    g = sample_nqd(d, GridSpec(n=9, half_width=1.0), f12)
    beta = complex(g.re[6], g.im[3])
    v, e = sample_nqd_point(d, beta, f12)
    assert abs(v - g.values[3, 6]) <= 1e-12
    assert abs(e - g.stat_err[3, 6]) <= 1e-12


def test_radial_estimate_agrees_with_pointwise(f12):
    d = simulate_dataset(Thermal(0.6), PHASES_10, 3000, seed=8)
    g = sample_nqd(d, RadialGridSpec(r_max=1.5, n=4), f12)
    assert g.meta["geometry"] == "radial"
    for k in range(4):
        v, e = sample_nqd_point(d, complex(g.re[k]), f12)
        assert abs(v - g.values[k]) <= 3.0 * np.hypot(e, g.stat_err[k]) + 1e-12


def test_eta_removal_identity_at_unit_eta(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 400, seed=9, eta=1.0)
    grid = GridSpec(n=9, half_width=1.0)
    a = sample_nqd_eta_removed(d, grid, 1.2)
    b = sample_nqd(d, grid, f12)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.stat_err, b.stat_err)
    assert a.meta["used_width"] == 1.2


def test_eta_removal_recovers_lossless_target():
    d = simulate_dataset(Fock(1), PHASES_10, 2000, seed=10, eta=0.64)
    g = sample_nqd_eta_removed(d, GridSpec(n=9, half_width=1.0), 1.2)
    # internal width is w / sqrt(eta)
    assert g.meta["used_width"] == pytest.approx(1.5, abs=1e-12)
    assert g.meta["eta"] == 0.64
    ref = nqd_direct(Fock(1), build_filter(1.2), GridSpec(n=9, half_width=1.0))
    pulls = np.abs(g.values - ref.values) / g.stat_err
    assert float(pulls.max()) <= 4.0


def test_eta_removal_requires_eta_record(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 100, seed=1)
    d2 = dataclasses.replace(d, eta=None)
    with pytest.raises(FormatError):
        sample_nqd_eta_removed(d2, GridSpec(n=9, half_width=1.0), 1.2)


def test_phase_sensitive_data_needs_phase_coverage(f12):
    four = [0.0, 0.8, 1.6, 2.4]
    d = simulate_dataset(SqueezedVacuum(0.5, 3.0), four, 100, seed=2)
    with pytest.raises(ParameterError):
        sample_nqd(d, GridSpec(n=9, half_width=1.0), f12)
    d5 = simulate_dataset(SqueezedVacuum(0.5, 3.0), PHASES_5, 100, seed=2)
    sample_nqd(d5, GridSpec(n=9, half_width=1.0), f12)


def test_phase_insensitive_data_single_phase_ok(f12):
    d = simulate_dataset(Thermal(0.5), [0.4], 100, seed=3)
    g = sample_nqd(d, GridSpec(n=9, half_width=1.0), f12)
    assert g.values.shape == (9, 9)


def test_empty_dataset_rejected(f12):
    d = simulate_dataset(Fock(1), [0.0], 1, seed=0)
    d0 = dataclasses.replace(d, x=d.x[:0], phase_index=d.phase_index[:0])
    with pytest.raises(ParameterError):
        sample_nqd(d0, GridSpec(n=9, half_width=1.0), f12)


def test_pnqd_table_round_trip(tmp_path, f12):
    ds = [
        simulate_dataset(PhotonAdded(Coherent(complex(a))), PHASES_10, 400,
                         seed=50 + i, alpha_tag=complex(a))
        for i, a in enumerate([1.0, 0.0, 0.5])
    ]
    grid = RadialGridSpec(r_max=1.5, n=4)
    t = sample_pnqd(ds, grid, f12, phase_randomized=True,
                    process=PhotonAddition())
    # sorted by amplitude regardless of input order
    assert t.alphas == (0j, 0.5 + 0j, 1.0 + 0j)
    assert t.width == 1.2
    assert t.phase_randomized
    path = tmp_path / "table.csv"
    write_pnqd(t, str(path))
    t2 = read_pnqd(str(path))
    assert t2.alphas == t.alphas
    assert t2.width == t.width
    assert t2.phase_randomized == t.phase_randomized
    assert format_process(t2.process) == format_process(t.process)
    for g1, g2 in zip(t.grids, t2.grids):
        assert np.array_equal(g1.values, g2.values)
        assert np.array_equal(g1.stat_err, g2.stat_err)
        assert np.array_equal(g1.re, g2.re)


def test_pnqd_zero_amplitude_matches_plain_estimate(f12):
    d = simulate_dataset(PhotonAdded(Coherent(0j)), PHASES_5, 400, seed=60,
                         alpha_tag=0j)
    grid = GridSpec(n=9, half_width=1.0)
    t = sample_pnqd([d], grid, f12)
    ref = sample_nqd(d, grid, f12)
    assert np.array_equal(t.grids[0].values, ref.values)
    assert np.array_equal(t.grids[0].stat_err, ref.stat_err)


def test_pnqd_requires_amplitude_tags(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 50, seed=1)
    with pytest.raises(ParameterError):
        sample_pnqd([d], RadialGridSpec(r_max=1.0, n=2), f12,
                    phase_randomized=True)


def test_pnqd_rejects_duplicate_tags(f12):
    ds = [simulate_dataset(Fock(1), PHASES_5, 50, seed=k, alpha_tag=0.5 + 0j)
          for k in range(2)]
    with pytest.raises(ParameterError):
        sample_pnqd(ds, RadialGridSpec(r_max=1.0, n=2), f12,
                    phase_randomized=True)


def test_phase_randomized_table_needs_radial_grid(f12):
    d = simulate_dataset(Fock(1), PHASES_5, 50, seed=1, alpha_tag=0j)
    with pytest.raises(ParameterError):
        sample_pnqd([d], GridSpec(n=9, half_width=1.0), f12,
                    phase_randomized=True)
