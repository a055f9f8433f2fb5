"""Two-level-ancilla extension of an unbroken PT system into a Hermitian one.

Packed vectors are ancilla-major: the first ``N`` entries are the ``|up>``
branch and the last ``N`` the ``|down>`` branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroBranch
from .metric import MetricPair
from .spectral import SIGMA_Y, as_matrix, spectral_norm


@dataclass(frozen=True)
class ExtendedState:
    up: np.ndarray
    down: np.ndarray

    @property
    def packed(self) -> np.ndarray:
        return np.concatenate([self.up, self.down])

    @classmethod
    def from_packed(cls, vec) -> "ExtendedState":
        vec = np.asarray(vec, dtype=complex)
        n = vec.size // 2
        return cls(vec[:n].copy(), vec[n:].copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.up, self.up).real + np.vdot(self.down, self.down).real)


@dataclass(frozen=True)
class ExtendedHamiltonian:
    H_S: np.ndarray
    V: np.ndarray
    H_tot: np.ndarray


def extend_state(psi, mp: MetricPair) -> ExtendedState:
    psi = np.asarray(psi, dtype=complex).ravel()
    if not np.any(psi):
        raise ValueError("cannot extend the zero vector")
    return ExtendedState(psi.copy(), mp.zeta_sqrt @ psi)


def extended_hamiltonian(H, mp: MetricPair) -> ExtendedHamiltonian:
    H = as_matrix(H)
    n = H.shape[0]
    zs, zis = mp.zeta_sqrt, mp.zeta_inv_sqrt
    inv_sum = np.linalg.inv(zs + zis)
    H_S = (H @ zis + zs @ H) @ inv_sum
    V = 1j * (H - zs @ H @ zis) @ inv_sum
    H_tot = np.kron(np.eye(2), H_S) + np.kron(SIGMA_Y, V)
    return ExtendedHamiltonian(H_S, V, H_tot)


def hermiticity_residual(M) -> float:
    M = np.asarray(M)
    return float(np.linalg.norm(M - M.conj().T, 2) / (spectral_norm(M) or 1.0))


def evolve_extended(eh: ExtendedHamiltonian, psi0: ExtendedState, t: float) -> ExtendedState:
    """Unitary evolution ``exp(-i H_tot t)`` via the Hermitian eigenbasis."""
    Ht = 0.5 * (eh.H_tot + eh.H_tot.conj().T)
    w, U = np.linalg.eigh(Ht)
    vec = U @ (np.exp(-1j * w * t) * (U.conj().T @ psi0.packed))
    return ExtendedState.from_packed(vec)


def postselect(state: ExtendedState, branch: str) -> tuple[np.ndarray, float]:
    """Normalized system state after projecting the ancilla on ``up`` or ``down``."""
    if branch not in ("up", "down"):
        raise ValueError("branch must be 'up' or 'down'")
    vec = state.up if branch == "up" else state.down
    nb = float(np.vdot(vec, vec).real)
    if nb <= 1e-300:
        raise ZeroBranch(f"{branch} branch is empty")
    return vec / np.sqrt(nb), nb / state.norm_sq()


def entanglement_entropy(state: ExtendedState) -> float:
    """Von Neumann entropy (nats) of the reduced ancilla state."""
    M = np.vstack([state.up, state.down])
    M = M / np.linalg.norm(M)
    p = np.linalg.eigvalsh(M @ M.conj().T)
    p = p[p > 1e-300]
    return float(min(np.log(2.0), max(0.0, -np.sum(p * np.log(p)))))


def phase_aligned_distance(a, b) -> float:
    """``min_theta || a - exp(i theta) b ||`` for vectors of equal length."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
