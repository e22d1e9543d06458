"""Spectral densities, reaction-coordinate moments and Redfield rates.

Units: hbar = k_B = 1, energies in units of the first spin splitting.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import NegativeFrequency, QuadratureNotConverged

DEFAULT_CUTOFF = 1000.0
QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class BrownianSpectralDensity:
    """Underdamped Brownian density peaked at ``Omega`` with strength ``lam``."""

    gamma: float
    Omega: float
    lam: float

    def __post_init__(self):
        if self.gamma <= 0 or self.Omega <= 0 or self.lam < 0:
            raise ValueError(f"invalid Brownian parameters {self}")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        g, om, lam = self.gamma, self.Omega, self.lam
        return 4.0 * g * om**2 * lam**2 * w / ((w**2 - om**2) ** 2 + (2.0 * np.pi * g * om * w) ** 2)

    @property
    def zero_slope(self) -> float:
        """lim J(w)/w as w -> 0."""
        return 4.0 * self.gamma * self.lam**2 / self.Omega**2

    @property
    def omega_max(self) -> float:
        return 20.0 * self.Omega

    @property
    def peaks(self) -> tuple[float, ...]:
        return (self.Omega,)

    def residual(self, Lambda: float = DEFAULT_CUTOFF) -> "OhmicExpSpectralDensity":
        """Ohmic density seen by the enlarged system after the RC mapping."""
        return OhmicExpSpectralDensity(gamma=self.gamma, Lambda=Lambda)


@dataclass(frozen=True)
class OhmicExpSpectralDensity:
    """``J(w) = gamma * w * exp(-w / Lambda)``."""

    gamma: float
    Lambda: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.gamma <= 0 or self.Lambda <= 0:
            raise ValueError(f"invalid Ohmic parameters {self}")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        return self.gamma * w * np.exp(-w / self.Lambda)

    @property
    def zero_slope(self) -> float:
        return self.gamma

    @property
    def omega_max(self) -> float:
        return 50.0 * self.Lambda

    @property
    def peaks(self) -> tuple[float, ...]:
        return (self.Lambda,)


@dataclass(frozen=True, eq=False)
class TabulatedSpectralDensity:
    """Sampled density, linearly interpolated and zero outside the table."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        j = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != j.shape or w.size < 2:
            raise ValueError("tabulated density needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(w) <= 0):
            raise ValueError("tabulated omega must be strictly increasing")
        if w[0] < 0:
            raise NegativeFrequency("tabulated omega must be non-negative")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", j)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TabulatedSpectralDensity":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except ValueError:
                    continue  # header line
        data = np.array(rows, dtype=float)
        return cls(data[:, 0], data[:, 1])

    def __call__(self, omega):
        return np.interp(omega, self.omega, self.values, left=0.0, right=0.0)

    @property
    def zero_slope(self) -> float:
        w, j = self.omega, self.values
        k = 1 if w[0] == 0 else 0
        return float(j[k] / w[k])

    @property
    def omega_max(self) -> float:
        return float(self.omega[-1])

    @property
    def peaks(self) -> tuple[float, ...]:
        return (float(self.omega[np.argmax(self.values)]),)


SpectralDensity = Union[BrownianSpectralDensity, OhmicExpSpectralDensity, TabulatedSpectralDensity]


def evaluate(J: SpectralDensity, omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise NegativeFrequency("spectral densities are defined for omega >= 0")
    return J(w)


def bose_einstein(omega, beta: float):
    """Bose-Einstein occupation ``1 / (exp(beta*omega) - 1)``."""
    x = beta * np.asarray(omega, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        return 1.0 / np.expm1(x)


def rate_gamma(J: SpectralDensity, omega, beta: float):
    """Symmetric part of the bath correlation function.

    Positive frequencies carry the thermal factor ``n``, negative ones
    ``n + 1``; at zero the ``pi * (J/w)(0) / beta`` limit is used. Accepts
    scalars or arrays.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    w = np.asarray(omega, dtype=float)
    aw = np.abs(w)
    out = np.empty_like(aw)
    zero = aw == 0.0
    nz = ~zero
    if np.any(nz):
        jw = J(aw[nz])
        n = bose_einstein(aw[nz], beta)
        out[nz] = np.pi * jw * np.where(w[nz] > 0, n, n + 1.0)
    out[zero] = np.pi * J.zero_slope / beta
    if out.ndim == 0:
        return float(out)
    return out


def _moment(J: SpectralDensity, power: int, omega_max: float) -> float:
    if isinstance(J, TabulatedSpectralDensity):
        return _tabulated_moment(J, power, omega_max)

    def f(w):
        return w**power * J(w)

    points = [p for p in J.peaks if 0 < p < omega_max]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                f, 0.0, omega_max, points=points or None, limit=1000,
                epsabs=0.0, epsrel=QUAD_RTOL * 0.1,
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureNotConverged(str(exc)) from exc
    if not math.isfinite(val) or err > QUAD_RTOL * abs(val):
        raise QuadratureNotConverged(f"moment {power}: estimate {val} +/- {err}")
    return val


def _tabulated_moment(J: TabulatedSpectralDensity, power: int, omega_max: float) -> float:
    # integrand is polynomial of degree power+1 on each linear segment; 3-point
    # Gauss-Legendre is exact up to degree 5
    w = J.omega
    edges = np.append(w[w < omega_max], min(omega_max, w[-1]))
    a, b = edges[:-1], edges[1:]
    x, wt = np.polynomial.legendre.leggauss(3)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = nodes**power * J(nodes)
    return float(np.sum(half[:, None] * wt[None, :] * vals))


def rc_parameters(J: SpectralDensity, omega_max: float | None = None) -> tuple[float, float]:
    """Reaction-coordinate coupling and frequency ``(lam, Omega)`` from the
    first and third frequency moments of ``J`` on ``[0, omega_max]``.
    """
    if omega_max is None:
        omega_max = J.omega_max
    m1 = _moment(J, 1, omega_max)
    m3 = _moment(J, 3, omega_max)
    if m1 <= 0:
        raise QuadratureNotConverged("first moment vanished; no reaction coordinate")
    Omega = math.sqrt(m3 / m1)
    lam = math.sqrt(m1 / Omega)
    return lam, Omega


def from_callable(fn: Callable[[np.ndarray], np.ndarray], omega: np.ndarray) -> TabulatedSpectralDensity:
    """Sample an arbitrary callable onto a grid."""
    omega = np.asarray(omega, dtype=float)
    return TabulatedSpectralDensity(omega, np.asarray(fn(omega), dtype=float))
