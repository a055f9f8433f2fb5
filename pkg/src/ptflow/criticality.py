"""Parameter scans near an exceptional point and power-law exponent fits."""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .dynamics import (
    basis_state,
    distinguishability_series,
    pure_state,
    recurrence_time,
    relaxation_time,
)
from .errors import (
    AmbiguousLimit,
    EmptyGrid,
    FitUnstable,
    InsufficientDecades,
    PTFlowError,
)
from .fitting import linear_fit
from .spectral import (
    Phase,
    as_matrix,
    classify_phase,
    default_offsets,
    eig_biorthogonal,
    ep_order,
    min_gap,
)

COALESCENCE_DIST = 0.05


class Observable(str, enum.Enum):
    RECURRENCE_T = "RecurrenceT"
    RELAXATION_TAU = "RelaxationTau"
    GAP_DELTA_OMEGA = "GapDeltaOmega"
    GAMMA_GAP = "GammaGapDeltaGamma"


@dataclass
class ScanPoint:
    lam: float
    phase: str
    value: float = float("nan")
    stderr: float = float("nan")
    status: str = "ok"
    error: str = ""
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ScanResult:
    observable: Observable
    params: np.ndarray
    points: list[ScanPoint]
    family: dict[str, Any] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def ok(self) -> np.ndarray:
        return np.array([p.ok for p in self.points])

    def to_csv(self) -> str:
        rows = [
            ",".join(["lam", "value", "stderr", "phase", "status"])
        ]
        for p in self.points:
            rows.append(f"{p.lam:.17g},{p.value:.17g},{p.stderr:.17g},{p.phase},{p.status}")
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "observable": self.observable.value,
            "grid": [float(x) for x in self.params],
            "points": [asdict(p) for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _measure(H, observable: Observable, states, steps: int) -> tuple[float, float, dict]:
    if observable is Observable.GAP_DELTA_OMEGA:
        return min_gap(np.linalg.eigvals(H)), 0.0, {"method": "eigvals"}
    if observable is Observable.GAMMA_GAP:
        g = np.sort(np.linalg.eigvals(H).imag)[::-1]
        return float(g[0] - g[1]), 0.0, {"method": "eigvals"}

    es = eig_biorthogonal(H)
    phase = classify_phase(es).phase
    rho1, rho2 = states
    if observable is Observable.RECURRENCE_T:
        if phase is not Phase.UNBROKEN:
            raise PTFlowError(f"recurrence needs the unbroken phase, got {phase.value}")
        E = es.energies
        om = np.abs(E[:, None] - E[None, :])
        om = om[om > 1e-9 * max(1.0, np.abs(E).max())]
        if om.size == 0:
            raise PTFlowError("no Bohr frequency, dynamics is stationary")
        series = distinguishability_series(H, rho1, rho2, 3 * 2 * np.pi / om.min(), steps)
        r = recurrence_time(series)
    else:
        if phase is not Phase.BROKEN:
            raise PTFlowError(f"relaxation needs the broken phase, got {phase.value}")
        g = es.gammas
        dg = g[0] - g[1]
        if dg <= 0:
            raise PTFlowError("no gap between the two leading decay rates")
        series = distinguishability_series(H, rho1, rho2, 10.0 / dg, steps)
        r = relaxation_time(series)
    diag = {"fit_window": list(r.fit_window), "t_max": float(series.times[-1])}
    diag.update({k: v for k, v in r.details.items() if isinstance(v, (bool, int, float, str))})
    return r.value, r.stderr, diag


def scan(
    family: Callable[[float], np.ndarray],
    grid: Sequence[float],
    observable: Observable | str,
    states=None,
    steps: int = 2000,
    workers: int = 1,
    descriptor: dict[str, Any] | None = None,
) -> ScanResult:
    """Evaluate ``observable`` at each grid value; failures are recorded per point.

    ``states`` is a pair of density matrices; defaults to the first two basis
    projectors.
    """
    observable = Observable(observable)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("scan grid is empty")
    if grid.size > 1 and not (np.all(np.diff(grid) > 0) or np.all(np.diff(grid) < 0)):
        raise ValueError("scan grid must be strictly monotone")

    def point(lam: float) -> ScanPoint:
        H = as_matrix(family(lam))
        label = classify_phase(H)
        st = states
        if st is None:
            n = H.shape[0]
            st = (pure_state(basis_state(n, 0)), pure_state(basis_state(n, 1)))
        try:
            value, err, diag = _measure(H, observable, st, steps)
        except PTFlowError as exc:
            return ScanPoint(float(lam), label.phase.value, status=type(exc).__name__, error=str(exc))
        return ScanPoint(float(lam), label.phase.value, float(value), float(err), diagnostics=diag)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(point, grid))
    else:
        points = [point(x) for x in grid]
    return ScanResult(observable, grid, points, dict(descriptor or {}))


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    amplitude: float
    stderr: float
    r_squared: float
    window: tuple[float, float]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def fit_power_law(x, y, min_points: int = 5, min_decades: float = 1.0) -> ExponentFit:
    """Fit ``y = amplitude * x**exponent`` by least squares in log-log space."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    x, y = x[m], y[m]
    if x.size < min_points:
        raise InsufficientDecades(f"{x.size} usable points, need {min_points}")
    if np.log10(x.max() / x.min()) < min_decades - 1e-9:
        raise InsufficientDecades(
            f"points span {np.log10(x.max() / x.min()):.2f} decades, need {min_decades}"
        )
    fit = linear_fit(np.log(x), np.log(y))
    if fit.slope_stderr > 0.1:
        raise FitUnstable(f"exponent stderr {fit.slope_stderr:.3g} > 0.1")
    if abs(fit.slope) <= max(2.0 * fit.slope_stderr, 1e-6):
        raise FitUnstable("observable does not depend on the parameter; no power law to fit")
    return ExponentFit(
        fit.slope, float(np.exp(fit.intercept)), fit.slope_stderr, fit.r_squared,
        (float(x.min()), float(x.max())),
    )


def fit_exponent(sr: ScanResult, lam_ep: float) -> ExponentFit:
    ok = sr.ok
    return fit_power_law(np.abs(sr.params[ok] - lam_ep), sr.values[ok])


@dataclass(frozen=True)
class EPClassification:
    phi2_coalesces: bool
    predicted_delta: int
    p: int
    offsets: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)


def ep_vector(H) -> np.ndarray:
    """Right eigenvector at the exceptional point of ``H``.

    The coalescing cluster is the closest pair of numerical eigenvalues; the
    vector spans the null space of ``H - E_EP``.
    """
    H = as_matrix(H)
    w = np.linalg.eigvals(H)
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices_from(d)] = np.inf
    i, j = np.unravel_index(np.argmin(d), d.shape)
    gap = d[i, j]
    cluster = w[np.abs(w - 0.5 * (w[i] + w[j])) <= 3 * gap + 1e-12]
    e_ep = cluster.mean()
    _, _, vh = np.linalg.svd(H - e_ep * np.eye(H.shape[0]))
    return vh[-1].conj()


def classify_ep(
    family: Callable[[float], np.ndarray],
    lam_ep: float,
    probe_offsets: Sequence[float] | None = None,
) -> EPClassification:
    """Decide whether the second-fastest-growing eigenstate coalesces at the EP.

    Probes the broken side ``lam_ep + offset``.  Raises NoCoalescence when there
    is no EP and AmbiguousLimit when neither limit is clearly reached.
    """
    offsets = np.sort(default_offsets() if probe_offsets is None else np.asarray(probe_offsets, float))[::-1]
    order = ep_order(family, lam_ep, offsets, side=+1)
    vep = ep_vector(family(lam_ep))
    dist = np.empty(offsets.size)
    for k, d in enumerate(offsets):
        es = eig_biorthogonal(family(lam_ep + d))
        phi2 = es.right[:, 1]
        dist[k] = np.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(vep, phi2))))
    monotone = np.all(np.diff(dist) <= 1e-9)
    if dist[-1] < COALESCENCE_DIST and monotone:
        coalesces = True
    else:
        tail = dist[dist.size // 2:]
        settled = (tail.max() - tail.min()) <= COALESCENCE_DIST * max(tail.max(), 1e-300)
        if dist.min() >= COALESCENCE_DIST and settled:
            coalesces = False
        else:
            raise AmbiguousLimit(
                f"distance of phi_2 to the EP vector goes {dist[0]:.3g} -> {dist[-1]:.3g} "
                "without a clear limit"
            )
    delta = 2 if coalesces else order.p - 1
    return EPClassification(coalesces, delta, order.p, offsets, dist)
