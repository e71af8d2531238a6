"""State models: characteristic functions, densities, quadrature laws.

Closed forms are checked against dense number-basis reconstructions built
independently in oracles.py.
"""

import numpy as np
import pytest

import oracles
from nqdkit.errors import ParameterError, ParseError, TruncationError, ZeroWeightError
from nqdkit.states import (
    Cat, Coherent, DisplacedThermal, Fock, PhotonAdded, PhotonSubtracted,
    SqueezedVacuum, Thermal, char_fn_normal, fock_density, format_state,
    is_phase_insensitive, mean_photon, parse_state, quadrature_moments,
    quadrature_pdf,
)

CF_CASES = [
    (Coherent(0.7 - 0.3j), 40),
    (Thermal(0.8), 60),
    (Fock(2), 40),
    (SqueezedVacuum(0.5, 3.0), 60),
    (Cat(1.2 + 0.4j), 40),
    (DisplacedThermal(0.5j, 0.6), 60),
    (PhotonAdded(Coherent(0.9)), 40),
    (PhotonSubtracted(Thermal(1.1)), 70),
    (PhotonAdded(Thermal(0.5)), 60),
]


@pytest.mark.parametrize("s,cutoff", CF_CASES, ids=lambda v: str(v))
def test_char_fn_matches_dense_oracle(s, cutoff):
    rho = oracles.dense_density(s, cutoff)
    rng = np.random.default_rng(11)
    for _ in range(6):
        xi = complex(rng.normal() * 0.8, rng.normal() * 0.8)
        assert char_fn_normal(s, xi) == pytest.approx(
            oracles.cf_normal(rho, xi), abs=1e-8
        )


@pytest.mark.parametrize("s", [s for s, _ in CF_CASES], ids=lambda v: str(v))
def test_char_fn_is_one_at_origin(s):
    assert char_fn_normal(s, 0j) == pytest.approx(1.0, abs=1e-12)


def test_squeezed_quadrature_variances():
    s = SqueezedVacuum(0.5, 3.0)
    m0, v0 = quadrature_moments(s, 0.0)
    mq, vq = quadrature_moments(s, np.pi / 2)
    assert m0 == 0.0 and mq == 0.0
    assert v0 == pytest.approx(0.5, abs=1e-12)
    assert vq == pytest.approx(3.0, abs=1e-12)


def test_coherent_quadrature_mean():
    alpha = 0.8 + 0.6j
    for phi in (0.0, 0.7, 2.1):
        m, v = quadrature_moments(Coherent(alpha), phi)
        assert m == pytest.approx(
            2.0 * abs(alpha) * np.cos(np.angle(alpha) - phi), abs=1e-12
        )
        assert v == pytest.approx(1.0, abs=1e-12)


def test_fock_one_variance_is_three():
    _, v = quadrature_moments(Fock(1), 0.3)
    assert v == pytest.approx(3.0, abs=1e-12)


def test_loss_mixes_variance_toward_vacuum():
    s = SqueezedVacuum(0.5, 3.0)
    for phi in (0.0, 1.2):
        _, v1 = quadrature_moments(s, phi, eta=1.0)
        _, v = quadrature_moments(s, phi, eta=0.7)
        assert v == pytest.approx(0.7 * v1 + 0.3, abs=1e-12)


@pytest.mark.parametrize(
    "s", [Fock(1), Thermal(0.8), Cat(1.2), PhotonAdded(Coherent(0.9))],
    ids=lambda v: str(v),
)
def test_pdf_normalization_and_moments(s):
    x = np.linspace(-12.0, 12.0, 4001)
    for phi, eta in ((0.0, 1.0), (0.9, 1.0), (0.4, 0.7)):
        p = quadrature_pdf(s, x, phi, eta=eta)
        assert np.all(p >= 0.0)
        assert np.trapezoid(p, x) == pytest.approx(1.0, abs=1e-9)
        m, v = quadrature_moments(s, phi, eta=eta)
        assert np.trapezoid(p * x, x) == pytest.approx(m, abs=1e-8)
        assert np.trapezoid(p * (x - m) ** 2, x) == pytest.approx(v, abs=1e-7)


def test_mean_photon_closed_forms():
    assert mean_photon(Thermal(0.8)) == pytest.approx(0.8, abs=1e-12)
    assert mean_photon(Fock(3)) == 3.0
    assert mean_photon(Coherent(1.1j)) == pytest.approx(1.21, abs=1e-12)
    assert mean_photon(Cat(2.0)) == pytest.approx(4.0, abs=1e-12)
    assert mean_photon(PhotonAdded(Coherent(1.0))) == pytest.approx(2.5, abs=1e-12)


def test_mean_photon_matches_dense_oracle():
    s = PhotonSubtracted(SqueezedVacuum(0.5, 3.0))
    rho = oracles.dense_density(s, 60)
    n_op = np.diag(np.arange(61.0))
    assert mean_photon(s) == pytest.approx(
        float(np.trace(rho @ n_op).real), abs=1e-8
    )


def test_fock_density_trace_tail_hermiticity():
    fd = fock_density(Thermal(1.5))
    assert fd.tail <= 1e-8
    assert np.trace(fd.matrix).real == pytest.approx(1.0, abs=2e-8)
    assert np.max(np.abs(fd.matrix - fd.matrix.conj().T)) < 1e-14


def test_fock_density_cutoff_too_small():
    with pytest.raises(TruncationError) as ei:
        fock_density(Thermal(4.0), cutoff=5)
    assert ei.value.suggested_cutoff > 5


def test_state_validation():
    with pytest.raises(ParameterError):
        Thermal(-0.1)
    with pytest.raises(ParameterError):
        Fock(-1)
    # variance product below the uncertainty floor
    with pytest.raises(ParameterError):
        SqueezedVacuum(0.5, 1.0)
    with pytest.raises(ZeroWeightError):
        PhotonSubtracted(Fock(0))


@pytest.mark.parametrize(
    "s",
    [
        Coherent(0.25 - 1.5j), Thermal(0.8), Fock(2), SqueezedVacuum(0.5, 3.0),
        Cat(1.2 + 0.4j), DisplacedThermal(0.5j, 0.6), PhotonAdded(Thermal(0.5)),
        PhotonSubtracted(PhotonAdded(Coherent(1.0))),
    ],
    ids=lambda v: str(v),
)
def test_descriptor_round_trip(s):
    assert parse_state(format_state(s)) == s


def test_parse_state_errors():
    for text in ("vacuum", "fock:n=x", "thermal:", "added(", "coherent:re=1"):
        with pytest.raises(ParseError):
            parse_state(text)


def test_phase_insensitivity_flags():
    assert is_phase_insensitive(Thermal(0.7))
    assert is_phase_insensitive(Fock(2))
    assert is_phase_insensitive(PhotonAdded(Thermal(0.3)))
    assert is_phase_insensitive(Coherent(0.0))
    assert not is_phase_insensitive(Coherent(0.1))
    assert not is_phase_insensitive(SqueezedVacuum(0.5, 3.0))
    assert not is_phase_insensitive(Cat(1.0))
