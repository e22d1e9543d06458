"""Dense complex-matrix primitives: tensor products, Hermitian
diagonalization, partial traces/transposes, Gibbs states and entropies.

Everything here is a pure function of its inputs and works on plain
``numpy.ndarray`` objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-10
ENTROPY_CUTOFF = 1e-14

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# |up> = (1, 0) is the +1 eigenvector of sigma_z
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def bohr_frequencies(self) -> np.ndarray:
        """Matrix of ``w[m] - w[n]``."""
        w = self.eigenvalues
        return w[:, None] - w[None, :]

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return v.conj().T @ op @ v

    def to_lab(self, op: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return v @ op @ v.conj().T


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return hermiticity_error(a) <= tol * scale


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor outermost."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(op) for op in ops))


def site_operator(op: np.ndarray, site: int, n_sites: int, local_dim: int = 2) -> np.ndarray:
    """Embed a single-site operator at ``site`` of an ``n_sites`` chain."""
    eye = np.eye(local_dim, dtype=complex)
    factors = [op if k == site else eye for k in range(n_sites)]
    return kron(*factors)


def destroy(levels: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on ``levels`` Fock states."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def hermitian_eig(h: np.ndarray) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix; eigenvalues come back ascending.

    Raises NotHermitian when ``h`` is not Hermitian to within
    ``1e-10 * max(1, max|h|)``.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitian(
            f"matrix fails Hermiticity check (max|H - H^+| = {hermiticity_error(h):.3e})"
        )
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> None:
    d = int(np.prod(dims))
    if rho.ndim != 2 or rho.shape != (d, d):
        raise DimensionMismatch(f"matrix of shape {rho.shape} does not match subsystem dims {list(dims)}")


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor-product order; the kept
    subsystems stay in their original relative order.
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    _check_dims(rho, dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"keep indices {keep} out of range for {n} subsystems")

    t = rho.reshape(dims + dims)
    # einsum subscripts: row index i_k, column index j_k; traced ones share a letter
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(n)]
    cols = [rows[k] if k not in keep else next(letters) for k in range(n)]
    out = [rows[k] for k in keep] + [cols[k] for k in keep]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.einsum(spec, t).reshape(d_keep, d_keep)


def partial_transpose(rho: np.ndarray, dims: Sequence[int], subsystem: int = 0) -> np.ndarray:
    """Partial transpose of a bipartite operator on subsystem 0 (A) or 1 (B)."""
    rho = np.asarray(rho)
    if len(dims) != 2:
        raise DimensionMismatch("partial_transpose expects exactly two subsystem dims")
    d_a, d_b = (int(d) for d in dims)
    _check_dims(rho, (d_a, d_b))
    if subsystem not in (0, 1):
        raise DimensionMismatch(f"subsystem must be 0 or 1, got {subsystem}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(d_a * d_b, d_a * d_b)


def gibbs_state(h: np.ndarray, beta: float) -> np.ndarray:
    """Normalized ``exp(-beta H)``.

    The spectrum is shifted by its minimum before exponentiating, so large
    ``beta * max|H|`` cannot overflow.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    eig = hermitian_eig(h)
    w = eig.eigenvalues
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    v = eig.eigenvectors
    return (v * p) @ v.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits. Eigenvalues are clamped to [0, 1]; tiny ones count as zero."""
    p = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    p = np.clip(p, 0.0, 1.0)
    p = p[p > ENTROPY_CUTOFF]
    return float(-np.sum(p * np.log2(p)))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
