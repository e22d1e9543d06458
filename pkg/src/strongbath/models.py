"""Spin-system Hamiltonians at three levels of description.

* ``bare``      -- the spins alone, ``H_S = sum_i D_i sz_i`` with coupling ``S = sum_i sx_i``
* ``rc``        -- spins plus one truncated reaction-coordinate mode
* ``effective`` -- polaron-dressed spins projected on the RC ground state
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import DiscretizationNotConverged, TruncationTooSmall
from .spectral import SpectralDensity

TIERS = ("bare", "rc", "effective")


@dataclass(frozen=True)
class SpinSystem:
    deltas: tuple[float, ...]

    def __init__(self, deltas: Sequence[float]):
        deltas = tuple(float(d) for d in np.atleast_1d(deltas))
        if not 1 <= len(deltas) <= 3:
            raise ValueError(f"supported spin counts are 1..3, got {len(deltas)}")
        if any(d <= 0 for d in deltas):
            raise ValueError(f"spin splittings must be positive, got {deltas}")
        object.__setattr__(self, "deltas", deltas)

    @property
    def N(self) -> int:
        return len(self.deltas)

    @property
    def dim(self) -> int:
        return 2**self.N

    def sigma(self, axis: str, i: int) -> np.ndarray:
        op = {"x": linalg.SIGMA_X, "y": linalg.SIGMA_Y, "z": linalg.SIGMA_Z}[axis]
        return linalg.site_operator(op, i, self.N)

    def hamiltonian(self) -> np.ndarray:
        return sum(d * self.sigma("z", i) for i, d in enumerate(self.deltas))

    def coupling(self) -> np.ndarray:
        return sum(self.sigma("x", i) for i in range(self.N))

    def parity(self) -> np.ndarray:
        """Spin-inversion parity ``prod_i sz_i``."""
        return linalg.kron(*([linalg.SIGMA_Z] * self.N))


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    tier: str
    H: np.ndarray
    S: np.ndarray
    system: SpinSystem
    M: Optional[int] = None
    lam: float = 0.0
    Omega: Optional[float] = None
    parity: Optional[np.ndarray] = None
    # prefactor of S in the coupling to the residual bath
    residual_coupling: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def dims(self) -> list[int]:
        """Subsystem dimensions: one 2 per spin, then the RC levels if present."""
        d = [2] * self.system.N
        if self.tier == "rc":
            d.append(self.M)
        return d

    def reduce(self, rho: np.ndarray) -> np.ndarray:
        """Spin-only density matrix (traces out the RC for the rc tier)."""
        if self.tier != "rc":
            return rho
        return linalg.partial_trace(rho, self.dims, keep=range(self.system.N))


def _spin_parity(sys: SpinSystem) -> np.ndarray:
    return np.real(np.diag(sys.parity()))


def build_bare(sys: SpinSystem) -> HamiltonianModel:
    return HamiltonianModel("bare", sys.hamiltonian(), sys.coupling(), sys, parity=_spin_parity(sys))


def build_rc(sys: SpinSystem, lam: float, Omega: float, M: int) -> HamiltonianModel:
    """Spins coupled to an ``M``-level reaction coordinate of frequency ``Omega``.

    Spins are the leading tensor factors, the RC the last one. The operator
    coupling the enlarged system to the residual bath is ``a + a^dagger``.
    """
    if M < 2:
        raise TruncationTooSmall(f"RC truncation must keep at least 2 levels, got {M}")
    a = linalg.destroy(M)
    x = a + a.conj().T
    eye_s = np.eye(sys.dim, dtype=complex)
    eye_rc = np.eye(M, dtype=complex)
    H = (
        np.kron(sys.hamiltonian(), eye_rc)
        + Omega * np.kron(eye_s, a.conj().T @ a)
        + lam * np.kron(sys.coupling(), x)
    )
    S = np.kron(eye_s, x)
    # prod_i sz_i times (-1)^n commutes with H and anticommutes with S
    parity = np.kron(_spin_parity(sys), (-1.0) ** np.arange(M))
    return HamiltonianModel("rc", H, S, sys, M=M, lam=lam, Omega=Omega, parity=parity)


def renormalization(lam: float, Omega: float) -> float:
    """Splitting suppression factor ``exp(-2 lam^2 / Omega^2)``."""
    return math.exp(-2.0 * lam**2 / Omega**2)


def build_effective(sys: SpinSystem, lam: float, Omega: float) -> HamiltonianModel:
    """``exp(-2 lam^2/Omega^2) H_S - (lam^2/Omega) S^2`` with coupling ``S``.

    The constant part of ``S^2`` is kept so the spectrum matches
    ``effective_eigenvalues`` term for term. After the polaron shift the
    residual bath couples to ``-(2 lam/Omega) S``, so the model carries
    ``residual_coupling = 2 lam/Omega``.
    """
    if Omega <= 0:
        raise ValueError("Omega must be positive")
    S = sys.coupling()
    H = renormalization(lam, Omega) * sys.hamiltonian() - (lam**2 / Omega) * (S @ S)
    return HamiltonianModel(
        "effective", H, S, sys, lam=lam, Omega=Omega,
        parity=_spin_parity(sys), residual_coupling=2.0 * lam / Omega,
    )


def effective_eigenvalues(delta1: float, delta2: float, lam: float, Omega: float) -> np.ndarray:
    """Closed-form spectrum of the two-spin effective Hamiltonian.

    Returned ascending as ``[w(-,+), w(-,-), w(+,-), w(+,+)]``; at ``lam = 0``
    these are ``-(D1+D2), -(D1-D2), D1-D2, D1+D2``.
    """
    k = renormalization(lam, Omega)
    d1, d2 = k * delta1, k * delta2
    shift = -2.0 * lam**2 / Omega
    r_sum = math.sqrt((2.0 * lam**2 / Omega) ** 2 + (d1 + d2) ** 2)
    r_diff = math.sqrt((2.0 * lam**2 / Omega) ** 2 + (d1 - d2) ** 2)
    w = np.array([shift - r_sum, shift - r_diff, shift + r_diff, shift + r_sum])
    return np.sort(w)


def effective_eigenvalue_table(delta1: float, delta2: float, lam: float, Omega: float) -> dict:
    """Same values keyed by sign labels: ``mp``, ``mm``, ``pm``, ``pp``."""
    w_mp, w_mm, w_pm, w_pp = effective_eigenvalues(delta1, delta2, lam, Omega)
    return {"mm": w_mm, "mp": w_mp, "pm": w_pm, "pp": w_pp}


def sync_frequency(delta1: float, delta2: float, lam: float, Omega: float) -> float:
    """Beating frequency of the single-excitation sector,
    ``2 sqrt((2 lam^2/Omega)^2 + (D1~ - D2~)^2)``.

    This is the gap ``w(+,-) - w(-,-)`` between the two levels reached from
    ``|up,down>``; it does not depend on temperature.
    """
    k = renormalization(lam, Omega)
    return 2.0 * math.sqrt((2.0 * lam**2 / Omega) ** 2 + (k * (delta1 - delta2)) ** 2)


def interaction_energy(lam: float, Omega: float, convention: str = "coupling") -> float:
    """Bath-induced spin-spin energy scale.

    Two normalizations are in use. ``"coupling"`` reads it off the
    ``-2 E_I sx_1 sx_2`` term of the effective Hamiltonian, giving
    ``lam^2/Omega``. ``"frequency"`` defines it through the beating
    frequency, ``dw ~ 4 lam^2/Omega = 2 E_I``, giving ``2 lam^2/Omega``.
    """
    if convention == "coupling":
        return lam**2 / Omega
    if convention == "frequency":
        return 2.0 * lam**2 / Omega
    raise ValueError(f"unknown convention {convention!r}")


def polaron_generator(lam: float, Omega: float, M: int) -> np.ndarray:
    """``(lam/Omega)(a^dagger - a)`` on an ``M``-level boson space."""
    a = linalg.destroy(M)
    return (lam / Omega) * (a.conj().T - a)


@dataclass(frozen=True)
class PolaronParameters:
    kappa: np.ndarray
    E_I: float
    modes: int = 0


def _polaron_sums(J: SpectralDensity, beta: float, K: int, couplings) -> tuple[np.ndarray, float]:
    w_ref = J.peaks[0]
    lo, hi = 1e-3 * w_ref, J.omega_max
    dnu = (hi - lo) / K
    nu = lo + (np.arange(K) + 0.5) * dnu
    tk = np.sqrt(J(nu) * dnu)
    c1, c2 = (float(x) for x in couplings)
    t1, t2 = c1 * tk, c2 * tk
    # full polaron: displacements equal the couplings
    f1, f2 = t1, t2
    coth = 1.0 / np.tanh(0.5 * beta * nu)
    kappa = np.array([np.exp(-2.0 * np.sum(f**2 / nu**2 * coth)) for f in (f1, f2)])
    E_I = float(np.sum(f1 * (t2 - f2 / 2.0) / nu + f2 * (t1 - f1 / 2.0) / nu))
    return kappa, E_I


def polaron_parameters(
    J: SpectralDensity,
    beta: float,
    K: int = 1 << 20,
    couplings: Sequence[float] = (1.0, 1.0),
    rtol: float = 1e-4,
) -> PolaronParameters:
    """Full-polaron renormalization factors and interaction energy for two
    spins sharing a discretized bath.

    ``couplings`` scales each spin's mode couplings. The bath is sampled on a
    uniform midpoint grid of ``K`` modes; the result is checked against a run
    with ``2K`` modes.
    """
    if K < 100:
        raise ValueError("need at least 100 bath modes")
    kappa, E_I = _polaron_sums(J, beta, K, couplings)
    kappa2, E_I2 = _polaron_sums(J, beta, 2 * K, couplings)

    def rel(a, b):
        scale = np.maximum(np.abs(b), 1e-300)
        return np.max(np.abs(a - b) / scale)

    if rel(kappa, kappa2) > rtol or (E_I2 != 0 and rel(E_I, E_I2) > rtol):
        raise DiscretizationNotConverged(
            f"K={K}: kappa {kappa} vs {kappa2}, E_I {E_I} vs {E_I2}"
        )
    return PolaronParameters(kappa=kappa2, E_I=E_I2, modes=2 * K)
