"""Command-line front end: ``ptflow run <config>`` and ``ptflow fit <csv>``."""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml

from . import __version__
from .criticality import Observable, classify_ep, fit_exponent, fit_power_law, scan
from .dynamics import (
    distinguishability_series,
    evolve_state,
    oscillation_period,
    pure_state,
    pure_trace_distance,
    recurrence_time,
    relaxation_time,
    tail_exponent,
)
from .embedding import (
    entanglement_entropy,
    evolve_extended,
    extend_state,
    extended_hamiltonian,
    hermiticity_residual,
    phase_aligned_distance,
    postselect,
)
from .errors import FitUnstable, PTFlowError
from .fitting import linear_fit
from .io import Emitter, dumps_json, read_csv, svg_line_plot
from .metric import build_metric_pair
from .optics import GaussianSpec, OpticsConfig, ep_decay_experiment, field_snapshot, variant_beams
from .spectral import MODEL_KINDS, Phase, build_pt_hamiltonian, classify_phase, eig_biorthogonal, model_family

log = logging.getLogger("ptflow")

SCHEMA_VERSION = 1
THREADS_ENV = "PTFLOW_THREADS"

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vector = {
    "type": "array",
    "minItems": 1,
    "items": {
        "oneOf": [
            {"type": "number"},
            {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        ]
    },
}
_states = {
    "oneOf": [
        {"type": "array", "items": _vector, "minItems": 1},
        {"const": "random"},
    ]
}
_model = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": list(MODEL_KINDS)},
        "s": {"type": "number", "minimum": 0},
        "a": _number,
        "n": {"type": "integer", "minimum": 2},
        "J": {"type": "number", "minimum": 0},
        "gamma": _number,
        "lam": _number,
        "level": _number,
    },
    "additionalProperties": False,
}

_common = {
    "schema_version": {"const": SCHEMA_VERSION},
    "kind": {"enum": ["twolevel-series", "scan", "embed", "optics", "fit"]},
    "output": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "plots": {"type": "boolean"},
    "title": {"type": "string"},
}


def _obj(required, **props):
    return {
        "type": "object",
        "required": ["schema_version", "kind", *required],
        "properties": {**_common, **props},
        "additionalProperties": False,
    }


CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema_version", "kind"],
    "properties": _common,
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "twolevel-series"}}},
            "then": _obj(
                ["a"],
                s={"type": "number", "minimum": 0},
                a={"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                t_max=_pos,
                periods=_pos,
                steps={"type": "integer", "minimum": 10},
                states=_states,
                tail_window={"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
                log_axes={"type": "boolean"},
            ),
        },
        {
            "if": {"properties": {"kind": {"const": "embed"}}},
            "then": _obj(
                ["model"],
                model=_model,
                t_max=_pos,
                periods=_pos,
                steps={"type": "integer", "minimum": 10},
                states=_states,
            ),
        },
        {
            "if": {"properties": {"kind": {"const": "scan"}}},
            "then": _obj(
                ["model", "parameter", "lam_ep", "side", "observables"],
                model=_model,
                parameter={"type": "string"},
                lam_ep=_number,
                side={"enum": ["below", "above"]},
                offsets={
                    "type": "object",
                    "properties": {
                        "lo": _pos,
                        "hi": _pos,
                        "num": {"type": "integer", "minimum": 2},
                    },
                    "additionalProperties": False,
                },
                observables={
                    "type": "array",
                    "items": {"enum": [o.value for o in Observable]},
                    "minItems": 1,
                },
                steps={"type": "integer", "minimum": 10},
                classify={"type": "boolean"},
            ),
        },
        {
            "if": {"properties": {"kind": {"const": "optics"}}},
            "then": _obj(
                ["variants"],
                variants={
                    "type": "array",
                    "items": {"enum": ["different_centers", "different_widths"]},
                    "minItems": 1,
                },
                V0=_number,
                lam={"type": "number", "minimum": 0},
                period=_pos,
                L=_pos,
                N={"type": "integer", "minimum": 2},
                dz=_pos,
                z_max=_pos,
                sample_dz=_pos,
                w=_pos,
                k0=_number,
                fit_start={"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                snapshots={"type": "boolean"},
            ),
        },
        {
            "if": {"properties": {"kind": {"const": "fit"}}},
            "then": _obj(
                ["csv", "fit_kind"],
                csv={"type": "string"},
                fit_kind={"enum": ["power", "exp"]},
                x={"type": "string"},
                y={"type": "string"},
                lam_ep=_number,
                window={"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
            ),
        },
    ],
}


class ConfigError(Exception):
    """Invalid configuration; mapped to exit status 1."""


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------

def bundled_configs() -> list[str]:
    root = resources.files("ptflow") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config(name: str | Path) -> Path:
    """A filesystem path, or the name of a bundled config (with or without ``.cfg``)."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name if path.name.endswith(".cfg") else path.name + ".cfg"
    candidate = resources.files("ptflow") / "configs" / stem
    if candidate.is_file():
        return Path(str(candidate))
    raise ConfigError(f"{name}: no such file or bundled config (bundled: {', '.join(bundled_configs())})")


def _node_at(node, path) -> Any:
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = v
                    break
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


def load_config(path: str | Path) -> tuple[dict[str, Any], bytes]:
    """Parse and validate a YAML config; errors carry ``file:line:col``."""
    path = Path(path)
    raw = path.read_bytes()
    text = raw.decode("utf-8")
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {exc.problem or exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: config must be a mapping")
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            # prefer the most specific sub-error of if/then combinators
            leaf = err
            while leaf.context:
                leaf = min(leaf.context, key=lambda e: len(list(e.absolute_path)) * -1)
            node = _node_at(root, list(leaf.absolute_path))
            mark = node.start_mark
            loc = ".".join(str(p) for p in leaf.absolute_path) or "<root>"
            lines.append(f"{path}:{mark.line + 1}:{mark.column + 1}: {loc}: {leaf.message}")
        raise ConfigError("\n".join(lines))
    return data, raw


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _parse_vector(v) -> np.ndarray:
    return np.array([complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in v])


def _initial_states(cfg: dict, n: int, count: int = 2) -> list[np.ndarray]:
    spec = cfg.get("states")
    if spec is None:
        return [np.eye(n, dtype=complex)[k] for k in range(min(count, n))]
    if spec == "random":
        rng = np.random.default_rng(cfg.get("seed", 0))
        out = []
        for _ in range(count):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            out.append(v / np.linalg.norm(v))
        return out
    states = [_parse_vector(v) for v in spec]
    for v in states:
        if v.size != n:
            raise ConfigError(f"initial state has {v.size} components, model has dimension {n}")
        if not np.any(v):
            raise ConfigError("initial state is the zero vector")
    return [v / np.linalg.norm(v) for v in states]


def _model(cfg: dict) -> tuple[str, dict]:
    m = dict(cfg["model"])
    kind = m.pop("kind")
    return kind, m


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def run_twolevel_series(cfg: dict, em: Emitter, threads: int) -> dict:
    s = float(cfg.get("s", 1.0))
    steps = int(cfg.get("steps", 2000))
    summary: dict[str, Any] = {"s": s, "runs": []}
    curves = []
    for a in cfg["a"]:
        H = build_pt_hamiltonian("two_level", s=s, a=a)
        phase = classify_phase(H).phase
        if "t_max" in cfg:
            t_max = float(cfg["t_max"])
        elif phase is Phase.UNBROKEN and a != 0:
            t_max = float(cfg.get("periods", 3.0)) * math.pi / (s * math.sqrt(1 - a * a))
        else:
            raise ConfigError(f"a={a}: t_max is required outside the unbroken phase")
        psi = _initial_states(cfg, 2)
        series = distinguishability_series(H, pure_state(psi[0]), pure_state(psi[1]), t_max, steps)
        name = f"D_a{_fmt(a)}.csv"
        em.csv(name, ("t", "D"), series.times, series.values)
        rec: dict[str, Any] = {"a": a, "phase": phase.value, "csv": name, "t_max": t_max}
        try:
            if phase is Phase.UNBROKEN:
                r = recurrence_time(series)
                rec["recurrence_time"] = r.value
                rec["recurrence_stderr"] = r.stderr
            elif phase is Phase.BROKEN:
                # fit on a window where D stays well above round-off
                g = eig_biorthogonal(H).gammas
                window_series = distinguishability_series(
                    H, pure_state(psi[0]), pure_state(psi[1]), min(t_max, 10.0 / (g[0] - g[1])), steps
                )
                r = relaxation_time(window_series)
                rec["relaxation_time"] = r.value
                rec["relaxation_stderr"] = r.stderr
            else:
                window = cfg.get("tail_window")
                r = tail_exponent(series, tuple(window) if window else None)
                rec["tail_exponent"] = r.value
                rec["tail_stderr"] = r.stderr
                rec["tail_window"] = list(r.fit_window)
        except PTFlowError as exc:
            rec["analysis_error"] = f"{type(exc).__name__}: {exc}"
        summary["runs"].append(rec)
        log.info("a=%s phase=%s", a, phase.value)
        curves.append((f"a={_fmt(a)}", series.times, series.values))
    em.json("summary.json", summary)
    if cfg.get("plots", True):
        logax = bool(cfg.get("log_axes", False))
        plot_curves = curves
        if logax:
            plot_curves = [(lbl, t[1:], d[1:]) for lbl, t, d in curves]
        em.text(
            "distinguishability.svg",
            svg_line_plot(plot_curves, "t", "D(t)", cfg.get("title", ""), logx=logax, logy=logax),
        )
    return summary


def run_embed(cfg: dict, em: Emitter, threads: int) -> dict:
    kind, params = _model(cfg)
    H = build_pt_hamiltonian(kind, **params)
    es = eig_biorthogonal(H)
    mp = build_metric_pair(es)
    eh = extended_hamiltonian(H, mp)
    n = H.shape[0]
    if "t_max" in cfg:
        t_max = float(cfg["t_max"])
    else:
        E = es.energies
        om = np.abs(E[:, None] - E[None, :])
        om = om[om > 1e-9]
        if om.size == 0:
            raise ConfigError("t_max is required for a model without Bohr frequencies")
        t_max = float(cfg.get("periods", 3.0)) * 2 * math.pi / om.min()
    steps = int(cfg.get("steps", 1000))
    t = np.linspace(0.0, t_max, steps)
    states = _initial_states(cfg, n)
    extended = [extend_state(psi, mp) for psi in states]
    entropies = np.zeros((len(states), t.size))
    direct = [np.zeros((t.size, n), complex) for _ in states]
    worst = 0.0
    for k, tk in enumerate(t):
        for j, (psi, ext) in enumerate(zip(states, extended)):
            st = evolve_extended(eh, ext, tk)
            entropies[j, k] = entanglement_entropy(st)
            up, _ = postselect(st, "up")
            ref = evolve_state(H, psi, tk)
            direct[j][k] = ref
            worst = max(worst, phase_aligned_distance(up, ref))
    cols = ["t"] + [f"S{j + 1}" for j in range(len(states))]
    arrays = [t] + list(entropies)
    D = None
    if len(states) >= 2:
        D = np.array([pure_trace_distance(direct[0][k], direct[1][k]) for k in range(t.size)])
        cols.append("D")
        arrays.append(D)
    em.csv("entropy.csv", cols, *arrays)
    summary: dict[str, Any] = {
        "model": cfg["model"],
        "c": mp.c,
        "hermiticity_residual": hermiticity_residual(eh.H_tot),
        "intertwining_residual": float(
            np.linalg.norm(mp.eta @ H - H.conj().T @ mp.eta, 2)
            / (np.linalg.norm(H, 2) * np.linalg.norm(mp.eta, 2))
        ),
        "postselection_max_error": worst,
    }
    try:
        summary["entropy_period"] = oscillation_period(t, entropies[0])
    except PTFlowError as exc:
        summary["entropy_period_error"] = str(exc)
    if D is not None:
        try:
            summary["distinguishability_period"] = oscillation_period(t, D)
        except PTFlowError as exc:
            summary["distinguishability_period_error"] = str(exc)
    em.json("summary.json", summary)
    if cfg.get("plots", True):
        curves = [(f"S (state {j + 1})", t, entropies[j]) for j in range(len(states))]
        if D is not None:
            curves.append(("D", t, D))
        em.text("entropy.svg", svg_line_plot(curves, "t", "S(t), D(t)", cfg.get("title", "")))
    return summary


def run_scan(cfg: dict, em: Emitter, threads: int) -> dict:
    kind, params = _model(cfg)
    family = model_family(kind, cfg["parameter"], **params)
    lam_ep = float(cfg["lam_ep"])
    off = cfg.get("offsets", {})
    lo, hi, num = float(off.get("lo", 1e-3)), float(off.get("hi", 1e-1)), int(off.get("num", 12))
    if not lo < hi:
        raise ConfigError("offsets.lo must be below offsets.hi")
    offsets = np.logspace(np.log10(lo), np.log10(hi), num)
    grid = lam_ep - offsets[::-1] if cfg["side"] == "below" else lam_ep + offsets
    descriptor = {"model": cfg["model"], "parameter": cfg["parameter"], "lam_ep": lam_ep, "side": cfg["side"]}
    summary: dict[str, Any] = {"family": descriptor, "fits": {}}
    curves = []
    for obs in cfg["observables"]:
        sr = scan(family, grid, obs, steps=int(cfg.get("steps", 2000)), workers=threads, descriptor=descriptor)
        em.text(f"scan_{obs}.csv", sr.to_csv())
        em.text(f"scan_{obs}.json", sr.to_json())
        try:
            fit = fit_exponent(sr, lam_ep)
            summary["fits"][obs] = fit.to_dict()
        except PTFlowError as exc:
            summary["fits"][obs] = {"error": f"{type(exc).__name__}: {exc}"}
        ok = sr.ok
        curves.append((obs, np.abs(sr.params[ok] - lam_ep), sr.values[ok]))
    if cfg.get("classify", False):
        try:
            c = classify_ep(family, lam_ep, offsets)
            summary["classification"] = {
                "phi2_coalesces": c.phi2_coalesces,
                "predicted_delta": c.predicted_delta,
                "p": c.p,
            }
        except PTFlowError as exc:
            summary["classification"] = {"error": f"{type(exc).__name__}: {exc}"}
    em.json("fits.json", summary)
    if cfg.get("plots", True) and curves:
        em.text(
            "scan.svg",
            svg_line_plot(curves, "|lam - lam_EP|", "observable", cfg.get("title", ""), logx=True, logy=True),
        )
    return summary


def run_optics(cfg: dict, em: Emitter, threads: int) -> dict:
    keys = ("V0", "lam", "period", "L", "N", "dz", "z_max", "sample_dz")
    kw = {k: cfg[k] for k in keys if k in cfg}
    base = OpticsConfig()
    beam = GaussianSpec(float(cfg.get("w", base.beam.w)), float(cfg.get("k0", base.beam.k0)), 0.0)
    try:
        ocfg = OpticsConfig(**kw, beam=beam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fit_start = float(cfg.get("fit_start", 0.25))

    def one(variant):
        beams = variant_beams(variant, beam.w, beam.k0)
        return variant, ep_decay_experiment(ocfg, variant, beams, fit_start=fit_start, strict=False)

    variants = list(cfg["variants"])
    if threads > 1 and len(variants) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(variants))) as pool:
            results = list(pool.map(one, variants))
    else:
        results = [one(v) for v in variants]

    summary: dict[str, Any] = {"config": ocfg.to_dict(), "variants": {}}
    curves = []
    for variant, res in results:
        cols, arrays = res.csv_columns()
        em.csv(f"{variant}.csv", cols, *arrays)
        rec: dict[str, Any] = {"csv": f"{variant}.csv", "notes": res.notes}
        if res.fit is not None:
            rec["fit"] = res.fit.to_dict()
        if res.d_inf is not None:
            rec["d_inf"] = res.d_inf
        if res.oscillation_period is not None:
            rec["oscillation_period"] = res.oscillation_period
        summary["variants"][variant] = rec
        if "fit_error" in res.notes:
            log.warning("%s: %s", variant, res.notes["fit_error"])
        if cfg.get("snapshots", False):
            for j, st in enumerate(res.series.final):
                raw, meta = field_snapshot(st)
                em.binary(f"{variant}_beam{j + 1}.f64", raw)
                em.json(f"{variant}_beam{j + 1}.f64.json", meta)
        z, D = res.series.z, res.series.D
        curves.append((variant, z[1:], D[1:]))
    em.json("summary.json", summary)
    if cfg.get("plots", True):
        logax = ocfg.lam == 1.0
        em.text("optics.svg", svg_line_plot(curves, "z", "D(z)", cfg.get("title", ""), logx=logax, logy=logax))
    return summary


def fit_table(x, y, kind: str, lam_ep: float | None = None, window=None) -> dict:
    """Power-law or exponential fit of tabulated data."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if lam_ep is not None:
        x = np.abs(x - lam_ep)
    m = np.isfinite(x) & np.isfinite(y)
    if window is not None:
        m &= (x >= window[0]) & (x <= window[1])
    x, y = x[m], y[m]
    if kind == "power":
        fit = fit_power_law(x, y)
        return {"kind": "power", **fit.to_dict()}
    pos = y > 0
    line = linear_fit(x[pos], np.log(y[pos]))
    if line.slope_stderr > 0.1 * max(abs(line.slope), 1e-300):
        raise FitUnstable(f"decay rate stderr {line.slope_stderr:.3g} is above 10% of the rate")
    return {
        "kind": "exp",
        "rate": line.slope,
        "tau": -1.0 / line.slope if line.slope != 0 else math.inf,
        "amplitude": float(np.exp(line.intercept)),
        "stderr": line.slope_stderr,
        "r_squared": line.r_squared,
        "window": [float(x[pos].min()), float(x[pos].max())],
    }


def _pick_columns(table: dict[str, np.ndarray], xcol: str | None, ycol: str | None) -> tuple[str, str]:
    names = list(table)
    if len(names) < 2:
        raise ConfigError("CSV needs at least two columns")
    xcol = xcol or names[0]
    ycol = ycol or ("value" if "value" in table else names[1])
    for c in (xcol, ycol):
        if c not in table:
            raise ConfigError(f"column {c!r} not in CSV (have {', '.join(names)})")
    return xcol, ycol


def run_fit_config(cfg: dict, em: Emitter, threads: int, base: Path | None = None) -> dict:
    path = Path(cfg["csv"])
    if not path.is_absolute() and base is not None and not path.exists():
        path = base / path
    if not path.exists():
        raise ConfigError(f"csv {cfg['csv']!r} not found")
    try:
        table = read_csv(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    xcol, ycol = _pick_columns(table, cfg.get("x"), cfg.get("y"))
    res = fit_table(table[xcol], table[ycol], cfg["fit_kind"], cfg.get("lam_ep"), cfg.get("window"))
    res.update({"x": xcol, "y": ycol})
    em.json("fit.json", res)
    return res


RUNNERS = {
    "twolevel-series": run_twolevel_series,
    "embed": run_embed,
    "scan": run_scan,
    "optics": run_optics,
}


def run(config: str | Path, out: str | Path | None = None, threads: int = 1, plots: bool | None = None) -> Path:
    """Execute a config and return the output directory."""
    path = resolve_config(config)
    cfg, raw = load_config(path)
    if plots is not None:
        cfg["plots"] = plots
    out_dir = Path(out or cfg.get("output") or Path("out") / path.stem)
    em = Emitter(out_dir, hashlib.sha256(raw).hexdigest())
    start = time.perf_counter()
    if cfg["kind"] == "fit":
        run_fit_config(cfg, em, threads, path.parent)
    else:
        RUNNERS[cfg["kind"]](cfg, em, threads)
    em.finish(time.perf_counter() - start)
    return out_dir


def _threads(arg: int | None) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get(THREADS_ENV)
        try:
            n = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer")
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptflow", description="PT-symmetric information-flow experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (run) or JSON file (fit)")
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run an experiment config")
    r.add_argument("config", help="config path or bundled config name")
    r.add_argument("--no-plots", action="store_true", help="skip SVG output")

    f = sub.add_parser("fit", parents=[common], help="fit an exponent to an existing CSV")
    f.add_argument("csv", type=Path)
    f.add_argument("--kind", choices=("power", "exp"), required=True)
    f.add_argument("--x", default=None, help="x column (default: first)")
    f.add_argument("--y", default=None, help="y column (default: 'value' or second)")
    f.add_argument("--lam-ep", type=float, default=None, help="fit against |x - lam_ep|")
    f.add_argument("--window", type=float, nargs=2, default=None, metavar=("LO", "HI"))

    sub.add_parser("list", help="list bundled configs")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "list":
            print("\n".join(bundled_configs()))
            return 0
        threads = _threads(args.threads)
        if args.command == "run":
            out = run(args.config, args.out, threads, plots=False if args.no_plots else None)
            print(out)
            return 0
        if not args.csv.exists():
            raise ConfigError(f"{args.csv}: no such file")
        try:
            table = read_csv(args.csv)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        xcol, ycol = _pick_columns(table, args.x, args.y)
        res = fit_table(table[xcol], table[ycol], args.kind, args.lam_ep, args.window)
        res.update({"x": xcol, "y": ycol})
        text = dumps_json(res)
        if args.out:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text, encoding="utf-8")
        sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PTFlowError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
