"""Normalized non-unitary evolution, trace distance and time-scale extraction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    FitUnstable,
    NonExponentialTail,
    NormalizationUnderflow,
    NoRecurrence,
)
from .fitting import linear_fit
from .spectral import Eigensystem, Phase, as_matrix, classify_phase, eig_biorthogonal

UNDERFLOW_GUARD = 1e-300


def pure_state(psi) -> np.ndarray:
    """Density matrix ``|psi><psi|`` of the normalized vector ``psi``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("zero vector is not a state")
    psi = psi / nrm
    return np.outer(psi, psi.conj())


def basis_state(n: int, k: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[k] = 1.0
    return e


def check_density_matrix(rho, atol: float = 1e-12, psd_tol: float = 1e-10) -> np.ndarray:
    rho = as_matrix(rho)
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError(f"density matrix trace {np.trace(rho).real!r} != 1")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def growth_shift(H) -> float:
    """Largest imaginary part of the spectrum.

    Evolving with ``H - i*shift`` only rescales the unnormalized state by a
    scalar, which the normalization removes, and keeps long runs in range.
    """
    return float(np.max(np.linalg.eigvals(H).imag))


def _normalize(rho: np.ndarray) -> np.ndarray:
    tr = np.trace(rho).real
    if not np.isfinite(tr) or tr < UNDERFLOW_GUARD:
        raise NormalizationUnderflow(f"trace of the evolved state is {tr!r}")
    rho = rho / tr
    return 0.5 * (rho + rho.conj().T)


def propagator(H, t: float, shift: float | None = None) -> np.ndarray:
    H = as_matrix(H)
    if shift is None:
        shift = growth_shift(H)
    n = H.shape[0]
    return sla.expm(-1j * (H - 1j * shift * np.eye(n)) * t)


def evolve(H, rho0, t: float, shift: float | None = None) -> np.ndarray:
    """``exp(-iHt) rho0 exp(iH^dagger t)`` divided by its trace."""
    if t < 0:
        raise ValueError("t must be non-negative")
    rho0 = np.asarray(rho0, dtype=complex)
    U = propagator(H, t, shift)
    return _normalize(U @ rho0 @ U.conj().T)


def evolve_state(H, psi0, t: float, shift: float | None = None) -> np.ndarray:
    """Normalized ``exp(-iHt) psi0`` for a pure state."""
    if t < 0:
        raise ValueError("t must be non-negative")
    psi = propagator(H, t, shift) @ np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi)
    if not np.isfinite(nrm) or nrm**2 < UNDERFLOW_GUARD:
        raise NormalizationUnderflow(f"norm of the evolved state is {nrm!r}")
    return psi / nrm


def evolve_spectral(es: Eigensystem, rho0, t: float) -> np.ndarray:
    """Same as :func:`evolve` but built from the biorthogonal eigensystem."""
    if t < 0:
        raise ValueError("t must be non-negative")
    U = es.propagator(t, shift=float(es.gammas.max()))
    return _normalize(U @ np.asarray(rho0, dtype=complex) @ U.conj().T)


def trace_distance(rho1, rho2) -> float:
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    diff = rho1 - rho2
    mu = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(min(1.0, 0.5 * np.sum(np.abs(mu))))


def pure_trace_distance(psi, phi) -> float:
    """``sqrt(1 - |<psi|phi>|^2)`` for normalized pure states."""
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    ov = np.vdot(psi, phi) / (np.linalg.norm(psi) * np.linalg.norm(phi))
    return float(np.sqrt(max(0.0, 1.0 - abs(ov) ** 2)))


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

@dataclass
class DistinguishabilitySeries:
    times: np.ndarray
    values: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)
    rho1: np.ndarray | None = field(default=None, repr=False)
    rho2: np.ndarray | None = field(default=None, repr=False)

    def initial_distance(self) -> float:
        if self.rho1 is None or self.rho2 is None:
            return float(self.values[0])
        return trace_distance(self.rho1, self.rho2)

    def to_csv(self, path=None, columns=("t", "D")) -> str:
        text = series_csv(columns, self.times, self.values)
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def series_csv(columns, *arrays) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in zip(*arrays):
        w.writerow([f"{float(v):.17g}" for v in row])
    return buf.getvalue()


def distinguishability_series(H, rho1, rho2, t_max: float, steps: int = 2000) -> DistinguishabilitySeries:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    H = as_matrix(H)
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != H.shape or rho2.shape != H.shape:
        raise DimensionMismatch("states and Hamiltonian differ in dimension")
    shift = growth_shift(H)
    A = -1j * (H - 1j * shift * np.eye(H.shape[0]))
    times = np.linspace(0.0, t_max, steps)
    values = np.empty(steps)
    for k, t in enumerate(times):
        U = sla.expm(A * t)
        r1 = _normalize(U @ rho1 @ U.conj().T)
        r2 = _normalize(U @ rho2 @ U.conj().T)
        values[k] = trace_distance(r1, r2)
    return DistinguishabilitySeries(times, values, {"hamiltonian": H}, rho1, rho2)


# ---------------------------------------------------------------------------
# Time scales
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimescaleResult:
    kind: str
    value: float
    stderr: float
    fit_window: tuple[float, float]
    details: dict[str, Any] = field(default_factory=dict, compare=False)


def _vertex(t, g, k) -> float:
    h = t[k + 1] - t[k]
    den = g[k + 1] - 2 * g[k] + g[k - 1]
    if den == 0:
        return float(t[k])
    off = 0.5 * h * (g[k - 1] - g[k + 1]) / den
    return float(np.clip(t[k] + off, t[k - 1], t[k + 1]))


def _root(t, g, k) -> float:
    """Zero of g between t[k-1] and t[k] from a quadratic through three samples."""
    lo, hi = t[k - 1], t[k]
    j = k + 1 if k + 1 < len(t) else k - 2
    if j >= 0:
        idx = sorted({k - 1, k, j})
        c = np.polyfit(t[idx] - lo, g[idx], 2)
        roots = np.roots(c)
        roots = roots[np.isreal(roots)].real + lo
        roots = roots[(roots >= lo) & (roots <= hi)]
        if roots.size:
            return float(roots[0])
    return float(lo - g[k - 1] * (hi - lo) / (g[k] - g[k - 1]))


def spectral_recurrence(es: Eigensystem, max_denominator: int = 64, rtol: float = 1e-9):
    """Least common multiple of the periods ``2 pi / |E_m - E_n|``.

    Returns ``(period, commensurable)``; when the Bohr frequencies are not
    rationally related the period of the slowest frequency is returned instead.
    """
    E = es.energies
    om = np.abs(E[:, None] - E[None, :])[np.triu_indices(E.size, 1)]
    scale = max(np.max(np.abs(E)), 1.0)
    om = om[om > 1e-9 * scale]
    if om.size == 0:
        return np.inf, True
    base = om.min()
    nums, dens = [], []
    for r in om / base:
        fr = Fraction(float(r)).limit_denominator(max_denominator)
        if abs(float(fr) - r) > rtol * r:
            return float(2 * np.pi / base), False
        nums.append(fr.numerator)
        dens.append(fr.denominator)
    # period_i = (2 pi / base) * den_i / num_i; lcm of fractions = lcm(den) / gcd(num)
    lcm_den = 1
    for d in dens:
        lcm_den = lcm_den * d // gcd(lcm_den, d)
    g = 0
    for n in nums:
        g = gcd(g, n)
    return float(2 * np.pi / base * lcm_den / g), True


def recurrence_time(series: DistinguishabilitySeries, eps: float = 1e-6) -> TimescaleResult:
    """First return of D(t) to D(0) after it has departed by more than ``10*eps``.

    A return is either a crossing of D(0) between samples or a local minimum of
    ``|D - D(0)|`` that lies below ``eps`` or below the sample-to-sample change
    around it (a tangential return resolved only up to the grid).
    """
    t = np.asarray(series.times, float)
    g = np.asarray(series.values, float) - series.initial_distance()
    away = np.flatnonzero(np.abs(g) > 10 * eps)
    if away.size == 0:
        raise NoRecurrence("D(t) never departs from its initial value")
    h = float(t[1] - t[0])
    for k in range(away[0] + 1, len(t)):
        if g[k] * g[k - 1] < 0:
            T = _root(t, g, k)
            window = (float(t[k - 1]), float(t[k]))
            break
        if k + 1 < len(t) and abs(g[k]) <= abs(g[k - 1]) and abs(g[k]) <= abs(g[k + 1]):
            step = max(abs(g[k + 1] - g[k]), abs(g[k - 1] - g[k]))
            if abs(g[k]) < eps or abs(g[k]) <= step:
                T = _vertex(t, g, k)
                window = (float(t[k - 1]), float(t[k + 1]))
                break
    else:
        raise NoRecurrence("no return to the initial distinguishability within the series")

    details: dict[str, Any] = {}
    H = series.meta.get("hamiltonian")
    if H is not None:
        try:
            es = eig_biorthogonal(H)
            if classify_phase(es).phase is Phase.UNBROKEN:
                period, comm = spectral_recurrence(es)
                details = {"spectral_estimate": period, "commensurable": comm}
        except Exception:  # spectral cross-check is advisory only
            pass
    return TimescaleResult("recurrence", T, h, window, details)


def relaxation_time(series: DistinguishabilitySeries, tail_fraction: float = 0.5) -> TimescaleResult:
    t = np.asarray(series.times, float)
    d = np.asarray(series.values, float)
    start = int(np.floor((1.0 - tail_fraction) * len(t)))
    tt, dd = t[start:], d[start:]
    if np.any(dd <= 0):
        raise NonExponentialTail("tail contains non-positive distinguishability")
    try:
        fit = linear_fit(tt, np.log(dd))
    except FitUnstable as exc:
        raise NonExponentialTail(str(exc)) from exc
    if fit.slope >= 0 or fit.r_squared < 0.99:
        raise NonExponentialTail(
            f"log D is not linear and decreasing (slope={fit.slope:.3g}, R^2={fit.r_squared:.4f})"
        )
    tau = -1.0 / fit.slope
    return TimescaleResult(
        "relaxation", tau, fit.slope_stderr / fit.slope**2, (float(tt[0]), float(tt[-1])),
        {"r_squared": fit.r_squared},
    )


def tail_exponent(series: DistinguishabilitySeries, tail_window=None) -> TimescaleResult:
    """Exponent ``delta`` of ``D ~ t**-delta``; defaults to the last decade in t."""
    t = np.asarray(series.times, float)
    d = np.asarray(series.values, float)
    lo, hi = tail_window if tail_window is not None else (t[-1] / 10.0, t[-1])
    m = (t >= lo) & (t <= hi) & (t > 0) & (d > 0)
    fit = linear_fit(np.log(t[m]), np.log(d[m]))
    if fit.slope_stderr > 0.1:
        raise FitUnstable(f"tail exponent stderr {fit.slope_stderr:.3g} > 0.1")
    return TimescaleResult(
        "tail_exponent", -fit.slope, fit.slope_stderr, (float(lo), float(hi)),
        {"r_squared": fit.r_squared, "amplitude": float(np.exp(fit.intercept))},
    )


def oscillation_period(times, values, min_prominence: float = 1e-6) -> float:
    """Mean spacing between successive local maxima, each refined by a parabola."""
    t = np.asarray(times, float)
    v = np.asarray(values, float)
    peaks = [
        k for k in range(1, len(v) - 1)
        if v[k] >= v[k - 1] and v[k] > v[k + 1] and v[k] - min(v) > min_prominence
    ]
    if len(peaks) < 2:
        raise NoRecurrence("fewer than two maxima in the series")
    refined = np.array([_vertex(t, v, k) for k in peaks])
    return float(np.mean(np.diff(refined)))
