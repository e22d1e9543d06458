import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from strongbath import spectral

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_density_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def redfield_index_sum(w, S, J, beta, rho):
    """Eigenbasis Redfield right-hand side summed index by index."""
    d = len(w)
    G = lambda x: complex(spectral.rate_gamma(J, np.array([x]), beta)[0])
    out = np.zeros((d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            acc = -1j * (w[a] - w[b]) * rho[a, b]
            for c in range(d):
                for n in range(d):
                    # S Lt rho and rho Lt^+ S
                    acc -= S[a, n] * S[n, c] * G(w[n] - w[c]) * rho[c, b]
                    acc -= rho[a, c] * np.conj(S[n, c] * G(w[n] - w[c])) * S[n, b]
                    # Lt rho S and S rho Lt^+
                    acc += S[a, c] * G(w[a] - w[c]) * rho[c, n] * S[n, b]
                    acc += S[a, c] * rho[c, n] * np.conj(S[b, n] * G(w[b] - w[n]))
            out[a, b] = acc
    return out
