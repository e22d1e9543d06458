"""Strong-coupling spin-boson dynamics: reaction-coordinate and effective
Hamiltonian models propagated with a non-secular Redfield equation."""

__version__ = "0.1.0"

from .errors import StrongBathError  # noqa: E402,F401
