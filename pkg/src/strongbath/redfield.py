"""Non-secular Born-Markov (Redfield) dynamics in the system energy eigenbasis.

The dissipator is never stored as a d^2 x d^2 superoperator. With the
frequency-filtered coupling ``Lt[j, k] = S[j, k] * G(w_j - w_k)`` it reads

    D(rho) = -[S, Lt rho - rho Lt^dagger]

which costs three dense matrix products per evaluation.

Rates: ``spectral.rate_gamma`` carries ``n`` on positive and ``n + 1`` on
negative frequencies. A transition from level k down to level m must go
with ``n + 1``, so the rate entering ``Lt[m, k]`` is evaluated at
``w_m - w_k``, which is negative for downward transitions.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.integrate import RK45

from . import linalg, spectral
from .errors import NoConvergence, PositivityWarning, StepRejected
from .linalg import EigenDecomposition, dagger
from .models import HamiltonianModel, SpinSystem, build_bare

log = logging.getLogger(__name__)

RTOL = 1e-8
ATOL = 1e-10
DEFAULT_POINTS = 2048
POSITIVITY_TOL = 1e-6
SUPEROPERATOR_MAX_DIM = 16


@dataclass(frozen=True, eq=False)
class RedfieldGenerator:
    eig: EigenDecomposition
    S_eig: np.ndarray
    Lambda_filtered: np.ndarray
    beta: float
    J: spectral.SpectralDensity
    model: Optional[HamiltonianModel] = None
    _SL: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_SL", self.S_eig @ self.Lambda_filtered)

    @property
    def dim(self) -> int:
        return self.eig.dim

    @property
    def omega(self) -> np.ndarray:
        return self.eig.bohr_frequencies()

    def dissipator(self, rho: np.ndarray) -> np.ndarray:
        """Dissipative part of d(rho)/dt, rho given in the energy eigenbasis.

        Valid for Hermitian ``rho`` only; see ``superoperator`` for the
        general form.
        """
        # S Lt rho + rho Lt^+ S - Lt rho S - S rho Lt^+ = X + X^+ - Y - Y^+
        # with X = S Lt rho, Y = Lt rho S
        lr = self.Lambda_filtered @ rho
        d = lr @ self.S_eig - self._SL @ rho
        return d + d.conj().T

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return -1j * self.omega * rho + self.dissipator(rho)

    def superoperator(self) -> np.ndarray:
        """Dense d^2 x d^2 generator acting on row-major ``rho.ravel()``.

        Only sensible for small d. Built column by column from matrix units,
        which are not Hermitian, so the general form of the dissipator is used.
        """
        d = self.dim
        L = np.empty((d * d, d * d), dtype=complex)
        e = np.zeros((d, d), dtype=complex)
        for idx in range(d * d):
            e.flat[idx] = 1.0
            L[:, idx] = self._rhs_general(e).ravel()
            e.flat[idx] = 0.0
        return L

    def _rhs_general(self, rho: np.ndarray) -> np.ndarray:
        lt = self.Lambda_filtered
        s = self.S_eig
        diss = -(self._SL @ rho + rho @ self._SL.conj().T - lt @ rho @ s - s @ rho @ lt.conj().T)
        return -1j * self.omega * rho + diss


def build_generator(model: HamiltonianModel, J: spectral.SpectralDensity, beta: float) -> RedfieldGenerator:
    """Redfield generator for ``model`` coupled through
    ``model.residual_coupling * model.S`` to a bath with spectral density
    ``J`` at inverse temperature ``beta``."""
    eig = linalg.hermitian_eig(model.H)
    return generator_from_operators(eig, model.residual_coupling * model.S, J, beta, model=model)


def generator_from_operators(eig, S, J, beta, model=None) -> RedfieldGenerator:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    S_eig = eig.to_eigenbasis(np.asarray(S, dtype=complex))
    S_eig = 0.5 * (S_eig + S_eig.conj().T)
    rates = spectral.rate_gamma(J, eig.bohr_frequencies(), beta)
    return RedfieldGenerator(
        eig=eig, S_eig=S_eig, Lambda_filtered=S_eig * rates, beta=beta, J=J, model=model
    )


@dataclass
class Trajectory:
    """Output of a propagation on a uniform time grid.

    ``states`` hold the (reduced, if a reducer was given) lab-basis density
    matrices; the diagnostics arrays are measured on the full state.
    """

    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)
    final_state: Optional[np.ndarray] = None
    trace_error: Optional[np.ndarray] = None
    hermiticity_error: Optional[np.ndarray] = None
    min_eigenvalue: Optional[np.ndarray] = None
    steps: int = 0


def pack_hermitian(rho: np.ndarray) -> np.ndarray:
    """Real d*d vector holding Re(rho) on and above the diagonal and Im(rho)
    below it."""
    return (np.triu(rho.real) + np.tril(rho.imag, -1)).ravel()


def unpack_hermitian(x: np.ndarray, d: int) -> np.ndarray:
    x = x.reshape(d, d)
    up = np.triu(x, 1)
    lo = np.tril(x, -1)
    re = up + up.T + np.diag(np.diag(x))
    im = lo - lo.T
    return re + 1j * im


class _Recorder:
    def __init__(self, n, reduce, observables, full_diagnostics):
        self.reduce = reduce
        self.obs_fns = dict(observables or {})
        self.full_diag = full_diagnostics
        self.states = None
        self.observables = {k: np.empty(n) for k in self.obs_fns}
        self.trace_error = np.empty(n)
        self.herm_error = np.empty(n)
        self.min_eig = np.empty(n)

    def record(self, i, rho_lab):
        red = self.reduce(rho_lab) if self.reduce else rho_lab
        if self.states is None:
            self.states = np.empty((len(self.trace_error),) + red.shape, dtype=complex)
        self.states[i] = red
        self.trace_error[i] = abs(np.trace(rho_lab) - 1.0)
        self.herm_error[i] = linalg.hermiticity_error(rho_lab)
        if self.full_diag:
            self.min_eig[i] = np.linalg.eigvalsh(0.5 * (rho_lab + rho_lab.conj().T))[0]
        else:
            self.min_eig[i] = np.nan
        for name, fn in self.obs_fns.items():
            self.observables[name][i] = fn(red)


class _FullEngine:
    """Integrates the whole eigenbasis density matrix."""

    def __init__(self, gen: RedfieldGenerator):
        self.gen = gen
        self.d = gen.dim
        self.w_max = float(np.max(np.abs(gen.omega))) if self.d > 1 else 0.0

    def pack(self, rho_lab):
        return pack_hermitian(self.gen.eig.to_eigenbasis(rho_lab))

    def unpack(self, y):
        return self.gen.eig.to_lab(unpack_hermitian(y, self.d))

    def __call__(self, _t, y):
        return pack_hermitian(self.gen.rhs(unpack_hermitian(y, self.d)))


class _SectorEngine:
    """Integrates a state that is block diagonal in the two parity sectors.

    When ``P`` commutes with ``H`` and anticommutes with ``S``, the
    generator maps sector-diagonal states to sector-diagonal states, and
    every product splits into half-size blocks. Each sector is diagonalized
    on its own.
    """

    def __init__(self, gen: RedfieldGenerator):
        model = gen.model
        H, S, P = model.H, model.residual_coupling * model.S, model.parity
        self.gen = gen
        self.dim = H.shape[0]
        self.idx = [np.flatnonzero(P > 0), np.flatnonzero(P < 0)]
        self.w, self.V = [], []
        for ix in self.idx:
            e = linalg.hermitian_eig(H[np.ix_(ix, ix)])
            self.w.append(e.eigenvalues)
            self.V.append(e.eigenvectors)
        self.sizes = [len(ix) for ix in self.idx]
        s01 = dagger(self.V[0]) @ S[np.ix_(self.idx[0], self.idx[1])] @ self.V[1]
        s10 = dagger(s01)
        g01 = spectral.rate_gamma(gen.J, self.w[0][:, None] - self.w[1][None, :], gen.beta)
        g10 = spectral.rate_gamma(gen.J, self.w[1][:, None] - self.w[0][None, :], gen.beta)
        self.S01, self.S10 = s01, s10
        self.L01, self.L10 = s01 * g01, s10 * g10
        self.SL0 = s01 @ self.L10
        self.SL1 = s10 @ self.L01
        self.omega = [w[:, None] - w[None, :] for w in self.w]
        self.w_max = max(float(np.max(np.abs(o))) for o in self.omega)
        self.split = self.sizes[0] ** 2

    @staticmethod
    def applies(gen: RedfieldGenerator, rho_lab: np.ndarray) -> bool:
        model = gen.model
        if model is None or model.parity is None:
            return False
        P = model.parity
        if np.all(P > 0) or np.all(P < 0):
            return False
        Pm = np.diag(P)
        if linalg.hermiticity_error(Pm @ model.H - model.H @ Pm) > 1e-12:
            return False
        if np.max(np.abs(Pm @ model.S + model.S @ Pm)) > 1e-12:
            return False
        cross = rho_lab[np.ix_(P > 0, P < 0)]
        return not np.any(cross)

    def pack(self, rho_lab):
        blocks = []
        for ix, v in zip(self.idx, self.V):
            blocks.append(pack_hermitian(dagger(v) @ rho_lab[np.ix_(ix, ix)] @ v))
        return np.concatenate(blocks)

    def _blocks(self, y):
        n0, n1 = self.sizes
        return unpack_hermitian(y[: self.split], n0), unpack_hermitian(y[self.split :], n1)

    def unpack(self, y):
        r0, r1 = self._blocks(y)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for ix, v, r in zip(self.idx, self.V, (r0, r1)):
            out[np.ix_(ix, ix)] = v @ r @ dagger(v)
        return out

    def __call__(self, _t, y):
        r0, r1 = self._blocks(y)
        d0 = (self.L01 @ r1) @ self.S10 - self.SL0 @ r0
        d1 = (self.L10 @ r0) @ self.S01 - self.SL1 @ r1
        f0 = -1j * self.omega[0] * r0 + d0 + dagger(d0)
        f1 = -1j * self.omega[1] * r1 + d1 + dagger(d1)
        return np.concatenate([pack_hermitian(f0), pack_hermitian(f1)])


def _engine(gen: RedfieldGenerator, rho_lab: np.ndarray, use_symmetry: bool):
    if use_symmetry and _SectorEngine.applies(gen, rho_lab):
        return _SectorEngine(gen)
    return _FullEngine(gen)


def propagate(
    gen: RedfieldGenerator,
    rho0: np.ndarray,
    t_max: float,
    dt_hint: Optional[float] = None,
    n_points: int = DEFAULT_POINTS,
    reduce: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    observables: Optional[Mapping[str, Callable[[np.ndarray], float]]] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
    diagnostics: bool = True,
    use_symmetry: bool = True,
) -> Trajectory:
    """Integrate the Redfield equation from the lab-basis state ``rho0``.

    The solution is sampled on ``n_points`` uniformly spaced times in
    ``[0, t_max]`` from the integrator's continuous extension; full states
    are never stored, only ``reduce(rho)`` and the named observables.

    With ``use_symmetry`` a state without coherences between the model's
    parity sectors is integrated sector by sector.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (gen.dim, gen.dim):
        raise ValueError(f"initial state shape {rho0.shape} != generator dim {gen.dim}")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    if t_max == 0:
        n_points = 1
    times = np.linspace(0.0, t_max, n_points)
    rec = _Recorder(n_points, reduce, observables, diagnostics)
    rec.record(0, rho0)
    if n_points == 1:
        return _finish(rec, times, rho0, 0)

    # a real packing of the Hermitian state is integrated: explicit RK steps
    # slightly amplify undamped high-frequency modes, and an anti-Hermitian
    # rounding component would otherwise grow unchecked below atol
    eng = _engine(gen, rho0, use_symmetry)
    y0 = eng.pack(rho0)
    first = dt_hint if dt_hint is not None else (0.01 / eng.w_max if eng.w_max > 0 else 0.01)
    first = min(first, t_max)

    solver = RK45(eng, 0.0, y0, t_max, rtol=rtol, atol=atol, first_step=first)
    nxt = 1
    steps = 0
    while nxt < n_points:
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepRejected(f"integration failed at t={solver.t:.6g}: {msg}")
        if solver.t >= times[nxt] or solver.status == "finished":
            interp = solver.dense_output()
            while nxt < n_points and (times[nxt] <= solver.t or solver.status == "finished"):
                y = solver.y if times[nxt] == solver.t else interp(times[nxt])
                rec.record(nxt, eng.unpack(y))
                nxt += 1
    log.debug("propagated to t=%g in %d steps", t_max, steps)
    return _finish(rec, times, eng.unpack(solver.y), steps)


def _finish(rec: _Recorder, times, final, steps) -> Trajectory:
    traj = Trajectory(
        times=times,
        states=rec.states,
        observables=rec.observables,
        final_state=final,
        trace_error=rec.trace_error,
        hermiticity_error=rec.herm_error,
        min_eigenvalue=rec.min_eig,
        steps=steps,
    )
    worst = np.nanmin(rec.min_eig) if np.any(np.isfinite(rec.min_eig)) else 0.0
    if worst < -POSITIVITY_TOL:
        warnings.warn(
            f"density matrix lost positivity: min eigenvalue {worst:.3e}",
            PositivityWarning,
            stacklevel=3,
        )
    return traj


def steady_state(
    gen: RedfieldGenerator,
    tol: float = 1e-9,
    window: float = 10.0,
    max_time: float = 1e5,
) -> np.ndarray:
    """Fixed point of the generator, returned in the lab basis.

    Small systems use the superoperator eigenvector closest to zero; larger
    ones propagate from the Gibbs state until two snapshots ``window`` apart
    differ by less than 1e-10.
    """
    d = gen.dim
    if d <= SUPEROPERATOR_MAX_DIM:
        L = gen.superoperator()
        vals, vecs = np.linalg.eig(L)
        k = int(np.argmin(np.abs(vals)))
        rho = vecs[:, k].reshape(d, d)
        rho = rho / np.trace(rho)
        rho = 0.5 * (rho + rho.conj().T)
        resid = float(np.max(np.abs(gen.rhs(rho))))
        if resid >= tol:
            raise NoConvergence(f"null vector residual {resid:.3e} >= {tol:.1e}")
        return gen.eig.to_lab(rho)

    w = gen.eig.eigenvalues
    p = np.exp(-gen.beta * (w - w[0]))
    rho = gen.eig.to_lab(np.diag(p / p.sum()).astype(complex))
    eng = _engine(gen, rho, use_symmetry=True)
    y = eng.pack(rho)
    t = 0.0
    while t < max_time:
        solver = RK45(eng, 0.0, y, window, rtol=RTOL, atol=ATOL * 1e-2)
        while solver.status == "running":
            solver.step()
        if solver.status == "failed":
            raise StepRejected(f"steady-state propagation failed near t={t:.6g}")
        t += window
        change = float(np.max(np.abs(eng.unpack(solver.y) - eng.unpack(y))))
        y = solver.y
        if change < 1e-10:
            rho = eng.unpack(y)
            rho = 0.5 * (rho + rho.conj().T)
            return rho / np.trace(rho)
    raise NoConvergence(f"no stationary state within t={max_time:g}")


def weak_coupling_dynamics(
    sys: SpinSystem,
    J: spectral.BrownianSpectralDensity,
    beta: float,
    rho0: np.ndarray,
    t_max: float,
    **kwargs,
) -> Trajectory:
    """Redfield dynamics of the bare spins driven directly by the original
    Brownian bath."""
    gen = build_generator(build_bare(sys), J, beta)
    return propagate(gen, rho0, t_max, **kwargs)
