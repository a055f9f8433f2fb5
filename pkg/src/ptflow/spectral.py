"""Biorthogonal eigensystems, PT-phase classification and EP-order estimation.

Conventions
-----------
Eigenvalues are written ``E_n + i Gamma_n``.  Right eigenvectors ``phi_n``
satisfy ``H phi_n = (E_n + i Gamma_n) phi_n`` and left eigenvectors ``chi_n``
satisfy ``chi_n^dagger H = (E_n + i Gamma_n) chi_n^dagger``; both are stored as
unit-norm columns.  Eigenvalues are ordered by descending ``Gamma`` and, within
a tie, by descending ``E``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .errors import BadDimension, DefectiveMatrix, NoCoalescence, FitUnstable
from .fitting import linear_fit

PHASE_TOL = 1e-9
EXCEPTIONAL_COND = 1e8
DEGENERACY_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise BadDimension(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] < 1:
        raise BadDimension("empty matrix")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    return H


def spectral_norm(H) -> float:
    return float(np.linalg.norm(H, 2))


def is_hermitian(H, tol=1e-10) -> bool:
    H = np.asarray(H)
    scale = max(spectral_norm(H), 1.0)
    return bool(np.linalg.norm(H - H.conj().T, 2) <= tol * scale)


# ---------------------------------------------------------------------------
# Model builders
# ---------------------------------------------------------------------------

def two_level(s: float = 1.0, a: float = 0.0) -> np.ndarray:
    """``s (sigma_x + i a sigma_z)``; exceptional point at ``a = 1``."""
    if s < 0:
        raise ValueError("energy scale s must be non-negative")
    return s * (SIGMA_X + 1j * a * SIGMA_Z)


def gainloss_pattern(n: int) -> np.ndarray:
    """Signs of the on-site gain/loss rates for an ``n``-site chain.

    Alternates ``+1, -1, ...`` from the left edge and is antisymmetric under
    site reversal, so odd chains get a lossless centre site.
    """
    signs = np.zeros(n)
    for j in range(n // 2):
        signs[j] = (-1) ** j
        signs[n - 1 - j] = -signs[j]
    return signs


def gainloss_chain(n: int, J: float = 1.0, gamma: float = 0.0) -> np.ndarray:
    if n < 2:
        raise BadDimension(f"chain needs at least 2 sites, got {n}")
    if J < 0:
        raise ValueError("hopping J must be non-negative")
    H = np.diag(1j * gamma * gainloss_pattern(n)).astype(complex)
    idx = np.arange(n - 1)
    H[idx, idx + 1] = J
    H[idx + 1, idx] = J
    return H


def perturbed_jordan(n: int, lam: float) -> np.ndarray:
    """Nilpotent Jordan block of size ``n`` plus ``lam`` in the bottom-left
    corner; its eigenvalues are the ``n``-th roots of ``lam``."""
    if n < 2:
        raise BadDimension("Jordan block needs n >= 2")
    H = np.diag(np.ones(n - 1), 1).astype(complex)
    H[n - 1, 0] = lam
    return H


def with_spectator(H, level: complex) -> np.ndarray:
    """Block-diagonal extension ``H (+) level`` by one decoupled level."""
    H = as_matrix(H)
    n = H.shape[0]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = H
    out[n, n] = level
    return out


MODEL_KINDS = ("two_level", "gainloss_chain", "jordan", "two_level_spectator")


def build_pt_hamiltonian(kind: str, **params) -> np.ndarray:
    if kind == "two_level":
        return two_level(params.get("s", 1.0), params.get("a", 0.0))
    if kind == "gainloss_chain":
        return gainloss_chain(int(params["n"]), params.get("J", 1.0), params.get("gamma", 0.0))
    if kind == "jordan":
        return perturbed_jordan(int(params["n"]), params.get("lam", 0.0))
    if kind == "two_level_spectator":
        base = two_level(params.get("s", 1.0), params.get("a", 0.0))
        return with_spectator(base, params.get("level", 3.0))
    raise ValueError(f"unknown Hamiltonian kind {kind!r}")


def model_family(kind: str, parameter: str, **fixed) -> Callable[[float], np.ndarray]:
    """One-parameter family ``lam -> H`` with every other parameter held fixed."""

    def family(lam: float) -> np.ndarray:
        return build_pt_hamiltonian(kind, **{**fixed, parameter: lam})

    family.__name__ = f"{kind}[{parameter}]"
    return family


# ---------------------------------------------------------------------------
# Biorthogonal eigendecomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Eigensystem:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    overlaps: np.ndarray = field(repr=False)
    cond: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def gammas(self) -> np.ndarray:
        return self.eigenvalues.imag

    def reconstruct(self) -> np.ndarray:
        """``sum_n lambda_n |phi_n><chi_n| / <chi_n|phi_n>``."""
        d = np.diag(self.overlaps)
        return (self.right * (self.eigenvalues / d)) @ self.left.conj().T

    def propagator(self, t: float, shift: float = 0.0) -> np.ndarray:
        """``exp(-i (H - i shift) t)`` assembled from the spectral data."""
        d = np.diag(self.overlaps)
        phases = np.exp(-1j * (self.eigenvalues - 1j * shift) * t)
        return (self.right * (phases / d)) @ self.left.conj().T


def _sort_order(w: np.ndarray, tol: float) -> list[int]:
    def cmp(i, j):
        gi, gj = w[i].imag, w[j].imag
        if abs(gi - gj) > tol:
            return -1 if gi > gj else 1
        ei, ej = w[i].real, w[j].real
        if ei == ej:
            return 0
        return -1 if ei > ej else 1

    return sorted(range(len(w)), key=cmp_to_key(cmp))


def _unit_columns(V: np.ndarray) -> np.ndarray:
    return V / np.linalg.norm(V, axis=0)


def eig_biorthogonal(H, cond_max: float = EXCEPTIONAL_COND) -> Eigensystem:
    H = as_matrix(H)
    n = H.shape[0]
    scale = spectral_norm(H) or 1.0

    w, vr = sla.eig(H)
    mu, vl = sla.eig(H.conj().T)
    vr = _unit_columns(vr)
    vl = _unit_columns(vl)

    # Pair left to right vectors by maximal overlap, eigenvalue proximity as tie-break.
    ov = np.abs(vl.conj().T @ vr)
    cost = -ov + 1e-6 * np.abs(mu.conj()[:, None] - w[None, :]) / scale
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(n, dtype=int)
    perm[cols] = rows
    vl = vl[:, perm]

    order = _sort_order(w, PHASE_TOL * scale)
    w, vr, vl = w[order], vr[:, order], vl[:, order]

    close = np.abs(w[:, None] - w[None, :]) <= DEGENERACY_TOL * scale
    nblocks, labels = connected_components(close, directed=False)
    if nblocks < n:
        for b in range(nblocks):
            idx = np.flatnonzero(labels == b)
            if idx.size < 2:
                continue
            q, _ = np.linalg.qr(vr[:, idx])
            lam = w[idx].mean()
            if np.linalg.norm(H @ q - lam * q, 2) > 1e3 * DEGENERACY_TOL * scale:
                raise DefectiveMatrix(
                    "degenerate eigenvalue without a full eigenvector set", np.inf
                )
            m = vl[:, idx].conj().T @ q
            try:
                dual = vl[:, idx] @ np.linalg.inv(m).conj().T
            except np.linalg.LinAlgError as exc:
                raise DefectiveMatrix("left/right eigenspaces are orthogonal", np.inf) from exc
            vr[:, idx] = q
            vl[:, idx] = _unit_columns(dual)

    cond = float(np.linalg.cond(vr))
    if not np.isfinite(cond) or cond > cond_max:
        raise DefectiveMatrix(
            f"eigenvector matrix condition number {cond:.3g} exceeds {cond_max:.3g}", cond
        )
    return Eigensystem(
        matrix=H, eigenvalues=w, right=vr, left=vl, overlaps=vl.conj().T @ vr, cond=cond
    )


# ---------------------------------------------------------------------------
# Phase classification
# ---------------------------------------------------------------------------

class Phase(enum.Enum):
    UNBROKEN = "Unbroken"
    BROKEN = "Broken"
    EXCEPTIONAL = "Exceptional"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    tol: float
    max_gamma: float
    cond: float

    def __str__(self) -> str:
        return self.phase.value


def classify_phase(
    es, tol: float = PHASE_TOL, cond_threshold: float = EXCEPTIONAL_COND
) -> PhaseLabel:
    """Label an eigensystem (or a raw matrix) as Unbroken, Broken or Exceptional.

    A raw matrix whose eigenvectors are numerically dependent is reported as
    Exceptional instead of raising.
    """
    if not isinstance(es, Eigensystem):
        H = as_matrix(es)
        try:
            es = eig_biorthogonal(H, cond_max=cond_threshold)
        except DefectiveMatrix as exc:
            gmax = float(np.max(np.abs(np.linalg.eigvals(H).imag)))
            return PhaseLabel(Phase.EXCEPTIONAL, tol, gmax, exc.cond)
    gmax = float(np.max(np.abs(es.gammas)))
    if es.cond > cond_threshold:
        phase = Phase.EXCEPTIONAL
    elif gmax <= tol * (spectral_norm(es.matrix) or 1.0):
        phase = Phase.UNBROKEN
    else:
        phase = Phase.BROKEN
    return PhaseLabel(phase, tol, gmax, es.cond)


# ---------------------------------------------------------------------------
# Exceptional-point order
# ---------------------------------------------------------------------------

def min_gap(eigenvalues) -> float:
    w = np.asarray(eigenvalues)
    if w.size < 2:
        return np.inf
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def default_offsets(num: int = 12, lo: float = 1e-3, hi: float = 1e-1) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), num)


@dataclass(frozen=True)
class EPOrderEstimate:
    p: int
    fit_exponent: float
    stderr: float
    offsets: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)


def ep_order(
    family: Callable[[float], np.ndarray],
    lam_ep: float,
    probe_offsets: Sequence[float] | None = None,
    side: int = -1,
) -> EPOrderEstimate:
    """Estimate the order ``p`` of the exceptional point of ``family`` at ``lam_ep``.

    The minimum eigenvalue gap is sampled at ``lam_ep + side * offset`` and fitted
    to ``gap ~ offset ** (1/p)`` on log-log axes.
    """
    offsets = default_offsets() if probe_offsets is None else np.asarray(probe_offsets, float)
    offsets = np.sort(np.abs(offsets))
    if offsets.size < 4 or offsets[0] <= 0 or np.log10(offsets[-1] / offsets[0]) < 1 - 1e-12:
        raise ValueError("need >= 4 positive probe offsets spanning at least one decade")
    gaps = np.array(
        [min_gap(np.linalg.eigvals(as_matrix(family(lam_ep + side * d)))) for d in offsets]
    )
    if not np.all(np.isfinite(gaps)) or np.any(gaps <= 0):
        raise NoCoalescence("levels are exactly degenerate or missing on the probe grid")
    if np.any(np.diff(gaps) <= 0):
        raise NoCoalescence("minimum gap does not shrink toward the exceptional point")
    try:
        fit = linear_fit(np.log(offsets), np.log(gaps))
    except FitUnstable as exc:
        raise NoCoalescence(str(exc)) from exc
    if fit.slope < 0.05:
        raise NoCoalescence(f"gap exponent {fit.slope:.3g} shows no coalescence")
    if fit.slope_stderr > 0.1:
        raise FitUnstable(f"gap exponent stderr {fit.slope_stderr:.3g} > 0.1")
    p = int(round(1.0 / fit.slope))
    if p < 2:
        raise NoCoalescence(
            f"gap exponent {fit.slope:.3g} corresponds to a level crossing, not an EP"
        )
    return EPOrderEstimate(p, fit.slope, fit.slope_stderr, offsets, gaps)
