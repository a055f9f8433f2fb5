"""Output plumbing: CSV/JSON writers, minimal SVG line plots and run manifests."""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .dynamics import series_csv


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj: Any) -> str:
    """Stable-key JSON; non-finite floats become ``null``."""
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a header-plus-numbers CSV into named float columns (non-numeric cells become NaN)."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = [h.strip() for h in lines[0].split(",")]
    cols: list[list[float]] = [[] for _ in header]
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        for j, c in enumerate(cells):
            try:
                cols[j].append(float(c))
            except ValueError:
                cols[j].append(float("nan"))
    return {h: np.array(c) for h, c in zip(header, cols)}


def svg_line_plot(
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    logx: bool = False,
    logy: bool = False,
    width: int = 640,
    height: int = 420,
) -> str:
    """Render ``(label, x, y)`` curves as a standalone SVG document."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]
    ml, mr, mt, mb = 70, 20, 30 if title else 15, 50

    def tr(v, log):
        v = np.asarray(v, float)
        if log:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)
        return v

    xs = [tr(x, logx) for _, x, _ in series]
    ys = [tr(y, logy) for _, _, y in series]
    allx = np.concatenate([x[np.isfinite(x)] for x in xs]) if xs else np.array([0.0])
    ally = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([0.0])
    x0, x1 = (allx.min(), allx.max()) if allx.size else (0.0, 1.0)
    y0, y1 = (ally.min(), ally.max()) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
    ]
    for frac in np.linspace(0, 1, 5):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        xl = f"1e{xv:.2g}" if logx else f"{xv:.3g}"
        yl = f"1e{yv:.2g}" if logy else f"{yv:.3g}"
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{xl}</text>')
        out.append(f'<text x="{ml - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yl}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2})">{escape(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{ml + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    for i, (x, y) in enumerate(zip(xs, ys)):
        color = palette[i % len(palette)]
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        label = series[i][0]
        out.append(f'<text x="{ml + pw - 8}" y="{mt + 16 + 15 * i}" text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


@dataclass
class RunManifest:
    config_sha256: str
    version: str = __version__
    wall_clock_s: float = 0.0
    outputs: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        return dumps_json(
            {
                "config_sha256": self.config_sha256,
                "version": self.version,
                "wall_clock_s": self.wall_clock_s,
                "outputs": dict(sorted(self.outputs.items())),
            }
        )

    def verify(self, root: str | Path) -> bool:
        root = Path(root)
        return all(sha256_file(root / name) == digest for name, digest in self.outputs.items())


class Emitter:
    """Single funnel for all files written by a run; records checksums for the manifest."""

    def __init__(self, out_dir: str | Path, config_sha256: str):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(config_sha256)
        self._lock = threading.Lock()

    def _write(self, name: str, data: bytes) -> Path:
        path = self.out / name
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
            self.manifest.outputs[name] = hashlib.sha256(data).hexdigest()
        return path

    def text(self, name: str, text: str) -> Path:
        return self._write(name, text.encode("utf-8"))

    def csv(self, name: str, columns: Sequence[str], *arrays) -> Path:
        return self.text(name, series_csv(columns, *arrays))

    def json(self, name: str, obj: Any) -> Path:
        return self.text(name, dumps_json(obj))

    def binary(self, name: str, data: bytes) -> Path:
        return self._write(name, data)

    def finish(self, wall_clock_s: float) -> Path:
        self.manifest.wall_clock_s = wall_clock_s
        path = self.out / "manifest.json"
        path.write_text(self.manifest.to_json(), encoding="utf-8")
        return path
