import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_density_matrix
from strongbath import linalg, models, observables as obs
from strongbath.errors import DimensionMismatch, IndexOutOfRange, NoPeak
from strongbath.models import SpinSystem

UP, DOWN = linalg.UP, linalg.DOWN
BELL = linalg.ket_to_dm((np.kron(UP, UP) + np.kron(DOWN, DOWN)) / math.sqrt(2))


def test_polarization_examples():
    sys = SpinSystem([1.0, 0.9])
    ud = linalg.ket_to_dm(np.kron(UP, DOWN))
    assert obs.polarization(ud, sys, 0) == 1.0 and obs.polarization(ud, sys, 1) == -1.0
    assert obs.average_magnetization(ud, sys) == 0.0
    assert obs.average_magnetization(np.eye(4) / 4, sys) == 0.0
    with pytest.raises(IndexOutOfRange):
        obs.polarization(ud, sys, 2)
    with pytest.raises(DimensionMismatch):
        obs.polarization(np.eye(8) / 8, sys, 0)


def test_correlation_examples():
    assert math.isclose(obs.qmi(BELL), 2.0, abs_tol=1e-12)
    assert math.isclose(obs.negativity(BELL), 0.5, abs_tol=1e-12)
    prod = np.kron(linalg.ket_to_dm(UP), np.eye(2) / 2)
    assert abs(obs.qmi(prod)) < 1e-12 and obs.negativity(prod) == 0.0
    assert abs(obs.qmi(np.eye(4) / 4)) < 1e-12
    with pytest.raises(DimensionMismatch):
        obs.qmi(np.eye(8) / 8)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.9, 1.0])
def test_werner_negativity(p):
    rho = p * BELL + (1 - p) * np.eye(4) / 4
    assert math.isclose(obs.negativity(rho), max(0.0, (3 * p - 1) / 4), abs_tol=1e-12)


def test_negativity_formulas_agree(rng):
    for _ in range(50):
        rho = random_density_matrix(rng, 4)
        assert abs(obs.negativity(rho) - obs.negativity_from_eigenvalues(rho)) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_qmi_bounds(seed):
    rho = random_density_matrix(np.random.default_rng(seed), 4)
    q = obs.qmi(rho)
    assert -1e-12 <= q <= 2.0 + 1e-12
    assert 0.0 <= obs.negativity(rho) <= 0.5 + 1e-12


def test_equilibrium_examples():
    sys = SpinSystem([1.0])
    rho = obs.equilibrium_state(models.build_effective(sys, 0.0, 8.0), 2.0)
    assert math.isclose(obs.polarization(rho, sys, 0), -math.tanh(2.0), rel_tol=1e-12)
    sys2 = SpinSystem([1.0, 0.9])
    rc = obs.equilibrium_state(models.build_rc(sys2, 0.0, 8.0, 6), 1.0)
    assert np.max(np.abs(rc - linalg.gibbs_state(sys2.hamiltonian(), 1.0))) < 1e-12
    # the ground state of equal splittings under strong coupling is entangled
    eff = obs.equilibrium_state(models.build_effective(SpinSystem([1.0, 1.0]), 3.0, 8.0), 20.0)
    assert obs.negativity(eff) > 0.1


def test_equilibrium_converged_in_levels():
    sys = SpinSystem([1.0, 0.9])
    a = obs.equilibrium_state(models.build_rc(sys, 5.0, 8.0, 50), 1.0)
    b = obs.equilibrium_state(models.build_rc(sys, 5.0, 8.0, 60), 1.0)
    assert np.max(np.abs(a - b)) < 1e-6


def _series(values, t_max=100.0):
    t = np.linspace(0, t_max, len(values))
    return obs.ObservableSeries("x", t, values)


def test_dominant_frequency_synthetic():
    t = np.linspace(0, 100, 2048)
    for w in (0.3, 1.3, 3.2, 12.5):
        s = obs.ObservableSeries("x", t, 0.4 * np.cos(w * t) * np.exp(-t / 60) - 0.2)
        assert abs(obs.dominant_frequency(s) - w) < 0.25 * 2 * math.pi / 100


def test_dominant_frequency_scale_and_offset_invariant():
    t = np.linspace(0, 100, 2048)
    v = np.cos(1.1 * t) + 0.3 * np.cos(2.9 * t)
    w = obs.dominant_frequency(obs.ObservableSeries("a", t, v))
    w2 = obs.dominant_frequency(obs.ObservableSeries("b", t, -7.0 * v + 3.0))
    assert w == pytest.approx(w2, abs=1e-12) and w == pytest.approx(1.1, abs=0.02)


@pytest.mark.parametrize(
    "make",
    [
        lambda t: np.full_like(t, 0.3),
        lambda t: 0.5 - 0.01 * t,
        lambda t: np.exp(-t / 5.0),
    ],
)
def test_dominant_frequency_no_peak(make):
    t = np.linspace(0, 100, 2048)
    with pytest.raises(NoPeak):
        obs.dominant_frequency(obs.ObservableSeries("x", t, make(t)))


def test_dominant_frequency_invalid():
    with pytest.raises(ValueError):
        obs.dominant_frequency(_series(np.zeros(100)))
    t = np.sort(np.random.default_rng(1).uniform(0, 100, 2048))
    with pytest.raises(ValueError):
        obs.dominant_frequency(obs.ObservableSeries("x", t, np.cos(t)))
    with pytest.raises(ValueError):
        obs.ObservableSeries("x", np.arange(3.0), np.array([0.0, np.nan, 1.0]))


def test_parity_conserved_by_closed_effective_dynamics():
    sys = SpinSystem([1.0, 0.9])
    h = models.build_effective(sys, 2.5, 8.0).H
    P = sys.parity()
    psi = np.kron(UP, (UP + DOWN) / math.sqrt(2))
    rho0 = linalg.ket_to_dm(psi)
    p0 = np.real(np.trace(P @ rho0))
    for t in (0.5, 3.0, 17.0, 100.0):
        u = expm(-1j * h * t)
        rho = u @ rho0 @ u.conj().T
        assert abs(np.real(np.trace(P @ rho)) - p0) < 1e-12


def test_spin_observables_names():
    sys = SpinSystem([1.0, 0.9])
    fns = obs.spin_observables(sys, ["sz2", "neg"])
    assert list(fns) == ["sz2", "neg"]
    assert fns["neg"](BELL) == pytest.approx(0.5)
    with pytest.raises(KeyError):
        obs.spin_observables(SpinSystem([1.0]), ["qmi"])
