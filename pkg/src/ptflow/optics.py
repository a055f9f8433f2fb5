"""Split-step Fourier propagation of the paraxial equation with a PT grating.

The field obeys ``i dpsi/dz = -(d^2/dx^2 + V(x)) psi`` with
``V(x) = V0 [cos(2 pi x / a) + i lam sin(2 pi x / a)]`` on a periodic domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .criticality import ExponentFit, fit_power_law
from .dynamics import oscillation_period
from .errors import BeamOverflow, GridMismatch, GridTooCoarse, NoRecurrence, PTFlowError

OVERFLOW_LIMIT = 1e100
VARIANTS = ("different_centers", "different_widths", "custom")


@dataclass(frozen=True)
class GaussianSpec:
    w: float
    k0: float = -1.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("Gaussian width must be positive")


@dataclass(frozen=True)
class OpticsConfig:
    V0: float = 0.3
    lam: float = 1.0
    period: float = math.pi
    L: float = 64 * math.pi
    N: int = 4096
    dz: float = 0.01
    z_max: float = 200.0
    sample_dz: float = 0.5
    beam: GaussianSpec = field(default_factory=lambda: GaussianSpec(6 * math.pi, -1.0, 0.0))

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not self.dz > 0 or not self.z_max > 0:
            raise ValueError("dz and z_max must be positive")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if not self.period > 0:
            raise ValueError("period must be positive")
        cells = self.L / self.period
        if abs(cells - round(cells)) > 1e-9 * cells or round(cells) < 1:
            raise ValueError(f"L must be an integer multiple of the period (L/a = {cells:.6g})")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def steps(self) -> int:
        return int(round(self.z_max / self.dz))

    def grid(self) -> np.ndarray:
        return -0.5 * self.L + self.dx * np.arange(self.N)

    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def potential(self) -> np.ndarray:
        ph = 2 * np.pi * self.grid() / self.period
        return self.V0 * (np.cos(ph) + 1j * self.lam * np.sin(ph))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class BeamState:
    x: np.ndarray
    field: np.ndarray
    z: float = 0.0

    @property
    def N(self) -> int:
        return self.x.size

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def L(self) -> float:
        return self.dx * self.N

    def power(self) -> float:
        return float(np.vdot(self.field, self.field).real * self.dx)


def make_gaussian(cfg: OpticsConfig, beam: GaussianSpec | None = None) -> BeamState:
    """``exp(-((x - x0)/w)^2 + i k0 x)`` sampled on the configuration grid."""
    beam = cfg.beam if beam is None else beam
    if beam.w < 4 * cfg.dx:
        raise GridTooCoarse(f"width {beam.w:.3g} is below 4 grid spacings ({4 * cfg.dx:.3g})")
    x = cfg.grid()
    psi = np.exp(-(((x - beam.x0) / beam.w) ** 2) + 1j * beam.k0 * x)
    return BeamState(x, psi.astype(complex), 0.0)


class _Stepper:
    """Strang step: potential half-step, kinetic step in k-space, potential half-step."""

    def __init__(self, cfg: OpticsConfig):
        self.half = np.exp(0.5j * cfg.potential() * cfg.dz)
        self.kin = np.exp(-1j * cfg.wavenumbers() ** 2 * cfg.dz)
        self.dz = cfg.dz

    def __call__(self, psi: np.ndarray, n: int) -> np.ndarray:
        for _ in range(n):
            psi = self.half * psi
            psi = np.fft.ifft(self.kin * np.fft.fft(psi, axis=-1), axis=-1)
            psi = self.half * psi
        peak = np.max(np.abs(psi))
        if not np.isfinite(peak) or peak > OVERFLOW_LIMIT:
            raise BeamOverflow(f"field amplitude {peak:.3g} exceeds {OVERFLOW_LIMIT:.0e}")
        return psi


def _check_grid(state: BeamState, cfg: OpticsConfig):
    if state.N != cfg.N or not np.isclose(state.dx, cfg.dx, rtol=1e-12):
        raise GridMismatch("beam grid does not match the configuration")


def propagate(state: BeamState, cfg: OpticsConfig, steps: int) -> BeamState:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _check_grid(state, cfg)
    stepper = _Stepper(cfg)
    psi = state.field.copy()
    done = 0
    chunk = 200  # check for overflow every chunk
    while done < steps:
        n = min(chunk, steps - done)
        psi = stepper(psi, n)
        done += n
    return BeamState(state.x, psi, state.z + steps * cfg.dz)


def _distinguishability(a: np.ndarray, b: np.ndarray) -> float:
    ov = np.vdot(a, b)
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na <= 0 or nb <= 0:
        raise ValueError("distinguishability of a zero field is undefined")
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, abs(ov) ** 2 / (na * nb)))))


def optics_distinguishability(psi: BeamState, phi: BeamState) -> float:
    """``sqrt(1 - |<psi,phi>|^2 / (<psi,psi><phi,phi>))`` with rectangle-rule quadrature."""
    if psi.N != phi.N or not np.allclose(psi.x, phi.x, rtol=0, atol=1e-12 * psi.L):
        raise GridMismatch("beams live on different grids")
    # dx cancels in the ratio
    return _distinguishability(psi.field, phi.field)


@dataclass
class BeamSeries:
    z: np.ndarray
    D: np.ndarray
    power: np.ndarray  # (len(z), n_beams)
    final: list[BeamState]


def propagate_pair(cfg: OpticsConfig, beams: tuple[GaussianSpec, GaussianSpec]) -> BeamSeries:
    """Propagate two beams together, sampling D and beam power every ``sample_dz``."""
    states = [make_gaussian(cfg, b) for b in beams]
    psi = np.vstack([s.field for s in states])
    stepper = _Stepper(cfg)
    every = max(1, int(round(cfg.sample_dz / cfg.dz)))
    total = cfg.steps
    zs, ds, pw = [], [], []

    def record(k):
        zs.append(k * cfg.dz)
        ds.append(_distinguishability(psi[0], psi[1]))
        pw.append(np.sum(np.abs(psi) ** 2, axis=1) * cfg.dx)

    record(0)
    k = 0
    while k < total:
        n = min(every, total - k)
        psi = stepper(psi, n)
        k += n
        record(k)
    x = cfg.grid()
    final = [BeamState(x, psi[j].copy(), k * cfg.dz) for j in range(2)]
    return BeamSeries(np.array(zs), np.array(ds), np.array(pw), final)


def variant_beams(variant: str, w: float = 6 * math.pi, k0: float = -1.0) -> tuple[GaussianSpec, GaussianSpec]:
    if variant == "different_centers":
        return GaussianSpec(w, k0, 10.0), GaussianSpec(w, k0, -10.0)
    if variant == "different_widths":
        return GaussianSpec(w, k0, 0.0), GaussianSpec(w / 2, k0, 0.0)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS[:2]}")


@dataclass
class EPDecayResult:
    variant: str
    series: BeamSeries
    fit: ExponentFit | None = None
    d_inf: float | None = None
    oscillation_period: float | None = None
    notes: dict[str, Any] = field(default_factory=dict)

    def csv_columns(self) -> tuple[tuple[str, ...], tuple[np.ndarray, ...]]:
        cols = ("z", "D", "power1", "power2")
        return cols, (self.series.z, self.series.D, self.series.power[:, 0], self.series.power[:, 1])


def ep_decay_experiment(
    cfg: OpticsConfig,
    variant: str,
    beams: tuple[GaussianSpec, GaussianSpec] | None = None,
    fit_start: float = 0.25,
    tail_fraction: float = 0.1,
    strict: bool = True,
) -> EPDecayResult:
    """Distinguishability of two beams and its power-law decay at the EP (``lam = 1``).

    ``different_widths`` fits ``D ~ z^e`` over ``[fit_start*z_max, z_max]``.
    ``different_centers`` fits ``|D - D_inf| ~ z^e`` with ``D_inf`` the mean of the
    last ``tail_fraction`` of samples; the fit stops where that tail begins.
    For ``lam < 1`` no decay is fitted and the oscillation period is reported.
    With ``strict=False`` a failed fit is stored in ``notes["fit_error"]``
    instead of raised, so the series is still returned.
    """
    if beams is None:
        beams = variant_beams(variant, cfg.beam.w, cfg.beam.k0)
    series = propagate_pair(cfg, beams)
    res = EPDecayResult(variant, series)
    z, D = series.z, series.D
    if cfg.lam < 1.0:
        try:
            res.oscillation_period = oscillation_period(z, D)
        except NoRecurrence:
            res.oscillation_period = None
        res.notes["min_return"] = float(np.min(np.abs(D[1:] - D[0])))
        return res
    if cfg.lam > 1.0:
        raise ValueError("decay exponents are defined at the exceptional point lam = 1")

    lo = fit_start * cfg.z_max
    if variant == "different_centers":
        tail = z >= (1.0 - tail_fraction) * z[-1]
        res.d_inf = float(np.mean(D[tail]))
        res.notes["d_final"] = float(D[-1])
        res.notes["tail_spread"] = float(np.ptp(D[tail]))
        m = (z >= lo) & ~tail
        y = np.abs(D[m] - res.d_inf)
    else:
        m = z >= lo
        y = D[m]
    try:
        res.fit = fit_power_law(z[m], y, min_decades=0.0)
    except PTFlowError as exc:
        if strict:
            raise
        res.notes["fit_error"] = f"{type(exc).__name__}: {exc}"
    return res


def field_snapshot(state: BeamState) -> tuple[bytes, dict[str, Any]]:
    """Little-endian float64 ``(re, im)`` pairs, one row per grid point, plus grid metadata."""
    data = np.empty((state.N, 2), dtype="<f8")
    data[:, 0] = state.field.real
    data[:, 1] = state.field.imag
    meta = {
        "dtype": "float64",
        "byte_order": "little",
        "layout": "row per grid point: re, im",
        "N": state.N,
        "x0": float(state.x[0]),
        "dx": state.dx,
        "L": state.L,
        "z": state.z,
    }
    return data.tobytes(), meta


def write_field_snapshot(state: BeamState, path: str | Path) -> tuple[Path, Path]:
    path = Path(path)
    raw, meta = field_snapshot(state)
    path.write_bytes(raw)
    side = path.with_suffix(path.suffix + ".json")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path, side


def read_field_snapshot(path: str | Path) -> BeamState:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    data = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(meta["N"], 2)
    x = meta["x0"] + meta["dx"] * np.arange(meta["N"])
    return BeamState(x, data[:, 0] + 1j * data[:, 1], meta["z"])


def with_overrides(cfg: OpticsConfig, **kw) -> OpticsConfig:
    beam_kw = {k: kw.pop(k) for k in ("w", "k0", "x0") if k in kw}
    if beam_kw:
        kw["beam"] = replace(cfg.beam, **beam_kw)
    return replace(cfg, **kw)
