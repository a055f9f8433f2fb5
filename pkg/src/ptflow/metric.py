"""Pseudo-Hermiticity metric ``eta`` and the derived ``c``, ``zeta`` operators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimension, BrokenPhase, NearEP, NotPositive, NotPositiveDefinite
from .spectral import PHASE_TOL, Eigensystem, spectral_norm

NEAR_EP_COND = 1e12


def herm_sqrt(M, inverse: bool = False, tol: float = 1e-10) -> np.ndarray:
    """Principal square root (or inverse square root) of a Hermitian positive matrix."""
    M = np.asarray(M, dtype=complex)
    scale = max(spectral_norm(M), 1.0)
    if np.linalg.norm(M - M.conj().T, 2) > tol * scale:
        raise NotPositiveDefinite("matrix is not Hermitian")
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    if w.min() <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w.min():.3g} is not positive")
    root = np.sqrt(w)
    if inverse:
        root = 1.0 / root
    return (V * root) @ V.conj().T


def metric_eta(es: Eigensystem, tol: float = PHASE_TOL) -> np.ndarray:
    """Positive metric with ``eta H = H^dagger eta`` and ``det eta = 1``.

    Built as ``sum_n |chi_n><chi_n|`` from left eigenvectors rescaled to
    ``<chi_n|phi_n> = 1``.
    """
    scale = spectral_norm(es.matrix) or 1.0
    gmax = float(np.max(np.abs(es.gammas)))
    if gmax > tol * scale:
        raise BrokenPhase(f"spectrum is not real (max |Im E| = {gmax:.3g})")
    d = np.diag(es.overlaps)
    chi = es.left / d.conj()
    eta = chi @ chi.conj().T
    eta = 0.5 * (eta + eta.conj().T)
    lam = np.linalg.eigvalsh(eta)
    if lam.min() <= 0:
        raise BrokenPhase("metric is not positive")
    cond = lam.max() / lam.min()
    if cond > NEAR_EP_COND:
        raise NearEP(f"metric condition number {cond:.3g} exceeds {NEAR_EP_COND:.0e}")
    # det^(1/N) via the log to stay finite for large N
    return eta / np.exp(np.mean(np.log(lam)))


@dataclass(frozen=True)
class MetricPair:
    eta: np.ndarray
    c: float
    zeta: np.ndarray
    zeta_sqrt: np.ndarray
    zeta_inv_sqrt: np.ndarray = field(repr=False)
    eta_eigenvalues: np.ndarray = field(repr=False)


def build_metric_pair(es: Eigensystem) -> MetricPair:
    n = es.dim
    if n < 2:
        raise BadDimension("the extension needs N >= 2")
    eta = metric_eta(es)
    lam = np.linalg.eigvalsh(eta)
    c = float(np.sum(1.0 / lam))
    zeta = c * eta - np.eye(n)
    zmin = np.linalg.eigvalsh(zeta).min()
    if zmin <= 0:
        raise NotPositive(f"zeta has a non-positive eigenvalue {zmin:.3g}")
    return MetricPair(
        eta=eta,
        c=c,
        zeta=zeta,
        zeta_sqrt=herm_sqrt(zeta),
        zeta_inv_sqrt=herm_sqrt(zeta, inverse=True),
        eta_eigenvalues=lam,
    )
