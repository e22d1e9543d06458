"""Acceptance suite. Each test prints one PASS/FAIL line for its criterion
before asserting, so ``pytest -s -m acceptance`` (or the tee'd log) doubles
as a report."""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_hermitian, redfield_index_sum
from strongbath import linalg, models, observables, redfield, scenarios, spectral
from strongbath.config import RunConfig, load_config
from strongbath.errors import NoPeak
from strongbath.models import SpinSystem

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
DYNAMICS = [
    "single_spin_dynamics",
    "sync_lambda1p0",
    "sync_lambda2p5",
    "sync_lambda5p0",
    "sync_temperatures",
    "correlation_dynamics",
]


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n:>2} {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture(scope="session")
def dynamics_tables(tmp_path_factory):
    """Every shipped time-evolution config, run once with outputs in a temp dir."""
    out = tmp_path_factory.mktemp("dynamics")
    tables = {}
    for name in DYNAMICS:
        cfg = load_config(CONFIGS / f"{name}.json").with_overrides(
            output_csv=str(out / f"{name}.csv"), output_svg=str(out / f"{name}.svg")
        )
        tables[name] = scenarios.execute(cfg)
    return tables


def _peak(table, column, settle_fraction=0.1):
    s = observables.ObservableSeries(column, table.column("t"), table.column(column))
    return observables.dominant_frequency(s, settle_fraction=settle_fraction)


def test_criterion_01_equilibrium_magnetization(capsys):
    cfg = load_config(CONFIGS / "magnetization_n2.json")
    cfg = cfg.with_overrides(lambdas=[0.5 * k for k in range(11)], M=50, output_csv=None, output_svg=None)
    t0 = time.perf_counter()
    tab = scenarios.run_steady_sweep(cfg, workers=1)
    elapsed = time.perf_counter() - t0
    rc, eff = tab.where(method="rc").column("mag"), tab.where(method="eff").column("mag")
    gap = float(np.max(np.abs(rc - eff)))

    oracle = -(math.tanh(1.0) + math.tanh(0.9)) / 2
    weak = scenarios.run_steady_sweep(cfg.with_overrides(lambdas=[1e-3]), workers=1)
    limit = float(np.max(np.abs(weak.column("mag") - oracle)))
    ok = gap < 0.05 and limit < 1e-3 and elapsed < 300
    report(capsys, 1, ok, f"max |rc-eff| = {gap:.4f}, |mag - oracle| at 1e-3 = {limit:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_synchronization_frequency(capsys, dynamics_tables):
    rows, ok = [], True
    wall = 0.0
    for name, lam in (("sync_lambda1p0", 1.0), ("sync_lambda2p5", 2.5), ("sync_lambda5p0", 5.0)):
        tab = dynamics_tables[name]
        wall += tab.meta["wall_time"]
        got = _peak(tab, "rc_sz1")
        want = models.sync_frequency(1.0, 0.9, lam, 8.0)
        rel = abs(got - want) / want
        ok &= rel < 0.10
        rows.append(f"lam={lam:g}: {got:.4f} vs {want:.4f} ({100 * rel:.1f}%)")
    ok &= wall < 600
    report(capsys, 2, ok, "; ".join(rows) + f"; {wall:.0f}s")
    assert ok


def test_criterion_03_temperature_independence(capsys, dynamics_tables):
    tab = dynamics_tables["sync_temperatures"]
    rows, ok = [], True
    for m in ("rc", "eff"):
        f = np.array([_peak(tab, f"{m}_sz1_lam1_T{T}") for T in (1, 2, 4)])
        span = (f.max() - f.min()) / f.mean()
        ok &= span < 0.05
        rows.append(f"{m} {np.round(f, 4).tolist()} span {100 * span:.2f}%")
    report(capsys, 3, ok, "; ".join(rows))
    assert ok


def test_criterion_04_negativity(capsys, dynamics_tables):
    sys = SpinSystem([1.0, 0.9])
    eq = {}
    for lam in (0.5, 1.0, 2.5):
        eq[("eff", lam)] = observables.negativity(
            observables.equilibrium_state(models.build_effective(sys, lam, 8.0), 1.0))
        eq[("rc", lam)] = observables.negativity(
            observables.equilibrium_state(models.build_rc(sys, lam, 8.0, 50), 1.0))
    worst = max(eq, key=eq.get)
    tab = dynamics_tables["correlation_dynamics"]
    t = tab.column("t")
    transient = {m: float(np.max(tab.column(f"{m}_neg")[t > 0])) for m in ("rc", "eff")}
    ok = eq[worst] < 1e-6 and min(transient.values()) > 1e-3
    report(capsys, 4, ok, f"max equilibrium negativity {eq[worst]:.3e} ({worst[0]}, lam={worst[1]:g}); "
           f"max transient rc {transient['rc']:.3f}, eff {transient['eff']:.3f}")
    assert ok


def test_criterion_05_dissipator_oracle(capsys):
    rng = np.random.default_rng(5)
    J = spectral.BrownianSpectralDensity(0.3, 2.0, 1.0)
    worst = 0.0
    for d in (2, 4, 8):
        gen = redfield.generator_from_operators(
            linalg.hermitian_eig(random_hermitian(rng, d)), random_hermitian(rng, d), J, 0.7)
        for _ in range(20):
            rho = random_hermitian(rng, d)
            oracle = redfield_index_sum(gen.eig.eigenvalues, gen.S_eig, J, 0.7, rho)
            worst = max(worst, float(np.max(np.abs(gen.rhs(rho) - oracle))))
    ok = worst < 1e-12
    report(capsys, 5, ok, f"max elementwise deviation {worst:.2e}")
    assert ok


def test_criterion_06_rate_function(capsys):
    J, beta = spectral.OhmicExpSpectralDensity(0.05, 1000.0), 0.8
    g0 = float(spectral.rate_gamma(J, np.array([0.0]), beta)[0])
    zero_err = abs(g0 - math.pi * 0.05 / beta) / (math.pi * 0.05 / beta)
    w = np.linspace(0.05, 20.0, 100)
    lhs = spectral.rate_gamma(J, w, beta) * np.exp(beta * w)
    rhs = spectral.rate_gamma(J, -w, beta)
    db = float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
    ok = zero_err < 4 * np.finfo(float).eps and db < 1e-12
    report(capsys, 6, ok, f"Gamma(0) relative error {zero_err:.1e}; detailed balance {db:.1e}")
    assert ok


def test_criterion_07_polaron_identities(capsys):
    M, keep = 40, 15
    a = linalg.destroy(M)
    sx, sy, sz = linalg.SIGMA_X, linalg.SIGMA_Y, linalg.SIGMA_Z
    low = np.concatenate([np.arange(keep), M + np.arange(keep)])
    worst = 0.0
    for r in (0.1, 0.5, 1.0):
        A = models.polaron_generator(r, 1.0, M)
        worst = max(worst, abs(expm(A)[0, 0] - math.exp(-r * r / 2)))
        # e^{S A} a e^{-S A} = a - r S with S = sx, compared on the low-lying levels
        U = expm(np.kron(sx, A))
        lhs = U @ np.kron(np.eye(2), a) @ U.conj().T
        rhs = np.kron(np.eye(2), a) - r * np.kron(sx, np.eye(M))
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[np.ix_(low, low)]))))
        # e^{A sx} sz e^{-A sx} = [(sz - i sy) e^{2A} + (sz + i sy) e^{-2A}] / 2
        lhs = U @ np.kron(sz, np.eye(M)) @ U.conj().T
        rhs = 0.5 * (np.kron(sz - 1j * sy, expm(2 * A)) + np.kron(sz + 1j * sy, expm(-2 * A)))
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[np.ix_(low, low)]))))
    ok = worst < 1e-8
    report(capsys, 7, ok, f"max deviation {worst:.2e} on the lowest {keep} of {M} levels")
    assert ok


def test_criterion_08_rc_quadrature(capsys):
    errs = []
    for g in (0.04, 0.02, 0.01, 0.005):
        lam, om = spectral.rc_parameters(spectral.BrownianSpectralDensity(g, 8.0, 1.0))
        errs.append(max(abs(lam - 1.0), abs(om - 8.0) / 8.0))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    ok = errs[-1] < 0.02 and monotone
    report(capsys, 8, ok, f"relative errors {[round(e, 4) for e in errs]} for gamma 0.04..0.005, "
           f"monotone={monotone}")
    assert ok


def test_criterion_09_trajectory_sanity(capsys, dynamics_tables):
    tr = he = 0.0
    me = math.inf
    where = ""
    for name, tab in dynamics_tables.items():
        for key, d in tab.meta["diagnostics"].items():
            tr, he = max(tr, d["trace_error"]), max(he, d["hermiticity_error"])
            if d["min_eigenvalue"] < me:
                me, where = d["min_eigenvalue"], f"{name}/{key}"
    ok = tr < 1e-10 and he < 1e-10 and me > -1e-6
    report(capsys, 9, ok, f"trace {tr:.1e}, hermiticity {he:.1e}, min eigenvalue {me:.3e} ({where})")
    assert ok


def test_criterion_10_single_spin_contrast(capsys, dynamics_tables):
    tab = dynamics_tables["single_spin_dynamics"]
    # the oscillation is over within the first few time units, so nothing is discarded
    try:
        rc_peak = _peak(tab, "rc_sz1_lam2.5_T1", settle_fraction=0.0)
    except NoPeak:
        rc_peak = None
    try:
        _peak(tab, "eff_sz1_lam2.5_T1", settle_fraction=0.0)
        eff_nopeak = False
    except NoPeak:
        eff_nopeak = True
    ok = rc_peak is not None and eff_nopeak
    report(capsys, 10, ok, f"rc peak {rc_peak}, eff NoPeak={eff_nopeak}")
    assert ok
