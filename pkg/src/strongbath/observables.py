"""Spin observables: polarization, magnetization, correlations, entanglement,
equilibrium states and the dominant oscillation frequency of a time series.

Every function takes spin-space density matrices. States of the rc tier are
reduced with ``HamiltonianModel.reduce`` before reaching these functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import linalg
from .errors import DimensionMismatch, IndexOutOfRange, NoPeak
from .models import HamiltonianModel, SpinSystem

MIN_SAMPLES = 256
PEAK_FACTOR = 5.0
PAD_FACTOR = 4
# Hann main lobe: half-width 2 bins, half-power width about 1.44 bins;
# sidelobes are narrower than one bin
DC_BINS = 2
MIN_PEAK_WIDTH = 1.25
# a series whose fluctuations sit this far below its magnitude carries only
# integration noise
FLAT_FLOOR = 1e-7


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError(f"times {t.shape} and values {v.shape} must be equal-length 1-D arrays")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"series {self.name!r} contains non-finite values")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _check_spin_state(rho: np.ndarray, sys: SpinSystem) -> None:
    if rho.shape != (sys.dim, sys.dim):
        raise DimensionMismatch(
            f"state of shape {rho.shape} is not a {sys.N}-spin density matrix; reduce RC states first"
        )


def polarization(rho: np.ndarray, sys: SpinSystem, i: int) -> float:
    """``Tr[rho sz_i]`` for spin ``i`` (0-based)."""
    if not 0 <= i < sys.N:
        raise IndexOutOfRange(f"spin index {i} outside 0..{sys.N - 1}")
    rho = np.asarray(rho)
    _check_spin_state(rho, sys)
    # sz_i is diagonal, so only the populations contribute
    return float(np.real(np.diag(rho) @ np.diag(sys.sigma("z", i))))


def average_magnetization(rho: np.ndarray, sys: SpinSystem) -> float:
    return float(np.mean([polarization(rho, sys, i) for i in range(sys.N)]))


def _two_qubit(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a two-qubit (4x4) state, got {rho.shape}")
    return rho


def qmi(rho_ab: np.ndarray) -> float:
    """Quantum mutual information between the two qubits, in bits."""
    rho = _two_qubit(rho_ab)
    s_a = linalg.von_neumann_entropy(linalg.partial_trace(rho, (2, 2), keep=[0]))
    s_b = linalg.von_neumann_entropy(linalg.partial_trace(rho, (2, 2), keep=[1]))
    return s_a + s_b - linalg.von_neumann_entropy(rho)


def negativity(rho_ab: np.ndarray) -> float:
    """``(||rho^T_A||_1 - 1) / 2``, the magnitude of the negative part of the
    partially transposed spectrum."""
    ev = np.linalg.eigvalsh(linalg.partial_transpose(_two_qubit(rho_ab), (2, 2), 0))
    return max(0.0, 0.5 * (float(np.sum(np.abs(ev))) - 1.0))


def negativity_from_eigenvalues(rho_ab: np.ndarray) -> float:
    """Same quantity as ``negativity``, summed over negative eigenvalues."""
    ev = np.linalg.eigvalsh(linalg.partial_transpose(_two_qubit(rho_ab), (2, 2), 0))
    return float(-np.sum(ev[ev < 0.0]))


def equilibrium_state(model: HamiltonianModel, beta: float) -> np.ndarray:
    """Spin-space Gibbs state of the model; the RC is traced out for rc."""
    return model.reduce(linalg.gibbs_state(model.H, beta))


def _periodogram(x: np.ndarray, dt: float):
    n = x.size
    y = x * np.hanning(n)
    nfft = PAD_FACTOR * n
    power = np.abs(np.fft.rfft(y, nfft)) ** 2
    omega = 2.0 * np.pi * np.fft.rfftfreq(nfft, dt)
    return omega, power


def dominant_frequency(series: ObservableSeries, settle_fraction: float = 0.1) -> float:
    """Angular frequency of the strongest oscillation in ``series``.

    The first ``settle_fraction`` of the samples is discarded; the rest is
    linearly detrended, Hann-windowed and zero-padded. The DC lobe is the run
    of decreasing power starting at zero frequency, and at least the window's
    main-lobe half-width. Beyond it, local maxima narrower than 1.25 unpadded
    bins at half height are window sidelobes and are skipped. The strongest
    remaining maximum counts as a peak if it exceeds five times the median
    power outside the DC lobe; its position is refined by a parabola through
    the three bins around it.
    """
    if not 0.0 <= settle_fraction < 1.0:
        raise ValueError("settle_fraction must lie in [0, 1)")
    t, v = series.times, series.values
    start = int(np.floor(settle_fraction * t.size))
    t, v = t[start:], v[start:]
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples after settling, got {t.size}")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt.mean())) > 1e-9 * dt.mean():
        raise ValueError("dominant_frequency needs a uniform time grid")
    dt = float(dt.mean())

    scale = float(np.max(np.abs(v)))
    x = signal.detrend(v, type="linear")
    if scale == 0.0 or np.std(x) <= FLAT_FLOOR * scale:
        raise NoPeak(f"series {series.name!r} has no variation beyond a linear trend")

    omega, power = _periodogram(x, dt)
    k = 1
    while k < power.size and power[k] <= power[k - 1]:
        k += 1
    k = max(k, DC_BINS * PAD_FACTOR + 1)
    rest = power[k - 1 :]
    if rest.size < 3:
        raise NoPeak(f"series {series.name!r}: spectrum decreases monotonically")
    peaks, _ = signal.find_peaks(rest)
    if peaks.size:
        widths = signal.peak_widths(rest, peaks, rel_height=0.5)[0]
        peaks = peaks[widths >= MIN_PEAK_WIDTH * PAD_FACTOR]
    if not peaks.size:
        raise NoPeak(f"series {series.name!r}: no spectral line beyond the DC lobe")
    j = int(peaks[np.argmax(rest[peaks])])
    floor = PEAK_FACTOR * float(np.median(rest))
    if rest[j] <= floor:
        raise NoPeak(
            f"series {series.name!r}: strongest peak {rest[j]:.3e} <= "
            f"{PEAK_FACTOR:g} x median power {floor / PEAK_FACTOR:.3e}"
        )
    a, b, c = rest[j - 1], rest[j], rest[j + 1]
    denom = a - 2.0 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    return float(omega[k - 1 + j] + shift * (omega[1] - omega[0]))


def series_from_trajectory(traj, name: str) -> ObservableSeries:
    return ObservableSeries(name, traj.times, traj.observables[name])


def spin_observables(sys: SpinSystem, names=None) -> dict:
    """Callables on spin-space states, keyed by column name.

    Available names: ``sz<i>`` (1-based spin index), ``mag`` and, for two
    spins, ``qmi`` and ``neg``.
    """
    table = {f"sz{i + 1}": (lambda r, i=i: polarization(r, sys, i)) for i in range(sys.N)}
    table["mag"] = lambda r: average_magnetization(r, sys)
    if sys.N == 2:
        table["qmi"] = qmi
        table["neg"] = negativity
    if names is None:
        return table
    missing = [n for n in names if n not in table]
    if missing:
        raise KeyError(f"unknown observables {missing}; available: {sorted(table)}")
    return {n: table[n] for n in names}
