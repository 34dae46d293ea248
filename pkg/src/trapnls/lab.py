"""Experiment harness: classification, dichotomy sweeps, instability runs.

Every protocol reads a flat TOML config, writes its delimited outputs under
the configured directory together with a resolved copy of the config, and
returns a one-line summary dict.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import evolve as evolve_mod
from . import functionals, groundstate, nonlin
from .evolve import EvolveParams, evolve, write_diagnostics_csv, virial_residual
from .grid import (RadialField, build_grid, norms, resample_lambda,
                   read_field_csv, write_field_csv)
from .nonlin import NonlinearitySpec

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

KINDS = ("Classify", "Dichotomy", "Instability", "DefocusingGlobal",
         "VirialCheck", "MTScan", "Sweep")

DEFAULT_PAIRS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0))

ATLAS_COLUMNS = ("param1", "param2", "S_u0", "m", "K", "set", "prediction",
                 "outcome", "t_blow")
INSTABILITY_COLUMNS = ("t", "orbit_distance", "P", "mass", "energy")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    family: str = "exp_truncated"
    K: int | None = 2
    p: float | None = None
    mu: float = 0.5
    epsilon: int = 1
    N: int = 1024
    R: float = 12.0
    init: str = "gaussian"  # gaussian | groundstate_scaled | file
    amplitude: float = 0.8
    width: float = 1.0
    lam: float = 1.01
    u0_file: str = ""
    t_end: float = 5.0
    dt0: float = 5e-3
    dt_min: float = 1e-6
    dt_max: float = 5e-3
    record_stride: int = 20
    grad_factor: float = 1e3
    dt_floor: float = 0.0  # 0: same as dt_min
    snapshot_stride: int = 0
    outdir: str = "out"
    pairs: tuple = DEFAULT_PAIRS
    lambda_grid: tuple = ()
    amplitude_grid: tuple = ()
    width_grid: tuple = ()
    workers: int = 2
    alpha_mt_points: int = 12
    render: bool = False

    def spec(self) -> NonlinearitySpec:
        return nonlin.spec_from_mapping(
            {"family": self.family, "K": self.K, "p": self.p,
             "mu": self.mu, "epsilon": self.epsilon})

    def evolve_params(self) -> EvolveParams:
        return EvolveParams(
            t_end=self.t_end, dt0=self.dt0, dt_min=self.dt_min,
            dt_max=self.dt_max, record_stride=self.record_stride,
            grad_factor=self.grad_factor,
            dt_floor=self.dt_floor if self.dt_floor > 0 else None,
            snapshot_stride=self.snapshot_stride)

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        for name in ("mu", "N", "R", "t_end", "dt0", "dt_min", "dt_max",
                     "record_stride", "grad_factor"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.init not in ("gaussian", "groundstate_scaled", "file"):
            raise ConfigError(f"unknown init recipe {self.init!r}")
        if self.init == "file" and not self.u0_file:
            raise ConfigError("init = 'file' needs u0_file")
        try:
            self.spec()
        except ValueError as err:
            raise ConfigError(str(err)) from err
        return self


def load_config(path) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as f:
        raw = tomllib.load(f)
    known = {f_.name for f_ in ExperimentConfig.__dataclass_fields__.values()}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "pairs" in raw:
        raw["pairs"] = tuple((float(a), float(b)) for a, b in raw["pairs"])
    for key in ("lambda_grid", "amplitude_grid", "width_grid"):
        if key in raw:
            raw[key] = tuple(float(v) for v in raw[key])
    if "kind" not in raw:
        raise ConfigError("config must set kind")
    return ExperimentConfig(**raw).validate()


def _toml_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def save_config(cfg: ExperimentConfig, path) -> None:
    """Write the fully resolved flat config back out (provenance copy)."""
    with open(path, "w") as f:
        for name, value in asdict(cfg).items():
            if value is None:
                continue
            f.write(f"{name} = {_toml_scalar(value)}\n")


# ---------------------------------------------------------------------------
# ground-state cache

def _spec_hash(spec: NonlinearitySpec, N: int, R: float) -> str:
    key = f"{spec.label()}|N={N}|R={R:.17g}"
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def cached_ground_state(spec: NonlinearitySpec, N: int, R: float,
                        cache_dir) -> groundstate.GroundStateResult:
    os.makedirs(cache_dir, exist_ok=True)
    tag = _spec_hash(spec, N, R)
    meta_path = os.path.join(cache_dir, f"gs_{tag}.json")
    phi_path = os.path.join(cache_dir, f"gs_{tag}.csv")
    if os.path.exists(meta_path) and os.path.exists(phi_path):
        with open(meta_path) as f:
            meta = json.load(f)
        grid, fld = read_field_csv(phi_path)
        fld.label = "ground_state"
        return groundstate.GroundStateResult(
            phi=fld, a_star=meta["a_star"], residual=meta["residual"],
            pohozaev={tuple(k): v for k, v in zip(
                groundstate.POHOZAEV_PAIRS, meta["pohozaev"])},
            m=meta["m"], instability_index=meta["instability_index"],
            method_trace={"cache": meta_path})
    grid = build_grid(N, R)
    result = groundstate.ground_state(spec, grid)
    write_field_csv(phi_path, grid, result.phi,
                    header_extra=f" spec={spec.label()}")
    with open(meta_path, "w") as f:
        json.dump({"a_star": result.a_star, "m": result.m,
                   "residual": result.residual,
                   "pohozaev": [result.pohozaev[p] for p in groundstate.POHOZAEV_PAIRS],
                   "instability_index": result.instability_index}, f)
    return result


# ---------------------------------------------------------------------------
# classification

@dataclass
class ClassificationVerdict:
    pair: tuple
    S_u0: float
    m: float
    K_1_m1_u0: float
    K_1_0_u0: float
    K_pair: float
    set: str  # A_plus | A_minus | Outside
    prediction: str  # Global | BlowUp | NoPrediction


NEAR_THRESHOLD = 1e-3  # |S - m| < this * m: too close to the separatrix to call


def classify(grid, spec: NonlinearitySpec, u0, m: float,
             pairs=DEFAULT_PAIRS) -> list[ClassificationVerdict]:
    """Invariant-set membership of u0 for each scaling pair."""
    if spec.epsilon != 1:
        raise ConfigError("classification requires the focusing sign")
    mom = functionals.moments(grid, spec, u0)
    S = functionals.action(grid, spec, u0, mom)
    K10 = functionals.K(grid, spec, u0, 1, 0, mom)["total"]
    K1m1 = functionals.K(grid, spec, u0, 1, -1, mom)["total"]
    out = []
    for pair in pairs:
        Kp = functionals.K(grid, spec, u0, pair[0], pair[1], mom)["total"]
        if S >= m or abs(S - m) < NEAR_THRESHOLD * abs(m):
            which, pred = "Outside", "NoPrediction"
        elif Kp >= 0:
            which, pred = "A_plus", "Global"
        else:
            which, pred = "A_minus", "BlowUp"
        out.append(ClassificationVerdict(
            pair=tuple(pair), S_u0=S, m=m, K_1_m1_u0=K1m1, K_1_0_u0=K10,
            K_pair=Kp, set=which, prediction=pred))
    return out


def pair_agreement(verdicts) -> bool:
    """True when every pair that makes a call makes the same call."""
    calls = {v.prediction for v in verdicts if v.prediction != "NoPrediction"}
    return len(calls) <= 1


# ---------------------------------------------------------------------------
# initial data

def build_initial(cfg: ExperimentConfig, grid, spec, cache_dir) -> tuple[RadialField, dict]:
    extra = {}
    if cfg.init == "gaussian":
        vals = cfg.amplitude * np.exp(-grid.r**2 / (2.0 * cfg.width**2))
        u0 = RadialField(grid, vals.astype(complex), label="gaussian")
    elif cfg.init == "groundstate_scaled":
        focusing = spec if spec.epsilon == 1 else NonlinearitySpec(
            family=spec.family, mu=spec.mu, epsilon=1, K=spec.K, p=spec.p)
        gs = cached_ground_state(focusing, cfg.N, cfg.R, cache_dir)
        u0 = resample_lambda(grid, gs.phi, cfg.lam)
        u0.label = f"groundstate_scaled({cfg.lam:g})"
        extra["groundstate"] = gs
    else:
        file_grid, u0 = read_field_csv(cfg.u0_file)
        if file_grid.N != grid.N or abs(file_grid.R - grid.R) > 1e-12:
            raise ConfigError(
                f"u0 file grid ({file_grid.N}, {file_grid.R}) does not match "
                f"config grid ({grid.N}, {grid.R})")
    return u0, extra


# ---------------------------------------------------------------------------
# protocols

def _spec_header(spec: NonlinearitySpec) -> str:
    return f" spec={spec.label()}"


def run_classify(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    spec = cfg.spec()
    cache = os.path.join(cfg.outdir, "cache")
    u0, extra = build_initial(cfg, grid, spec, cache)
    gs = extra.get("groundstate") or cached_ground_state(spec, cfg.N, cfg.R, cache)
    verdicts = classify(grid, spec, u0, gs.m, cfg.pairs)
    path = os.path.join(cfg.outdir, "verdicts.json")
    with open(path, "w") as f:
        json.dump({"spec": spec.label(), "m": gs.m,
                   "verdicts": [asdict(v) for v in verdicts],
                   "pairs_agree": pair_agreement(verdicts)}, f, indent=1)
    lead = next((v for v in verdicts if tuple(v.pair) == (1.0, -1.0)), verdicts[-1])
    return {"kind": "Classify", "set": lead.set, "prediction": lead.prediction,
            "S_u0": lead.S_u0, "m": gs.m, "pairs_agree": pair_agreement(verdicts),
            "files": {"verdicts": path}}


def _outcome_of(result) -> tuple[str, float]:
    status = result["status"]
    t_blow = result["t_blow"] if result["t_blow"] is not None else math.nan
    return status, t_blow


def run_dichotomy(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    spec = cfg.spec()
    cache = os.path.join(cfg.outdir, "cache")
    u0, extra = build_initial(cfg, grid, spec, cache)
    gs = extra.get("groundstate") or cached_ground_state(spec, cfg.N, cfg.R, cache)
    verdicts = classify(grid, spec, u0, gs.m, cfg.pairs)
    lead = [v for v in verdicts if tuple(v.pair) == (1.0, -1.0)]
    lead = lead[0] if lead else verdicts[0]
    result = evolve(u0, spec, cfg.evolve_params())
    outcome, t_blow = _outcome_of(result)
    diag = os.path.join(cfg.outdir, "diagnostics.csv")
    write_diagnostics_csv(diag, result["records"], header_extra=_spec_header(spec))
    agree = ((lead.prediction == "Global" and outcome == evolve_mod.FINISHED)
             or (lead.prediction == "BlowUp" and outcome == evolve_mod.BLEWUP)
             or lead.prediction == "NoPrediction")
    return {"kind": "Dichotomy", "prediction": lead.prediction, "set": lead.set,
            "outcome": outcome, "t_blow": t_blow, "agree": agree,
            "S_u0": lead.S_u0, "m": gs.m, "files": {"diagnostics": diag}}


def run_instability(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    spec = cfg.spec()
    cache = os.path.join(cfg.outdir, "cache")
    gs = cached_ground_state(spec, cfg.N, cfg.R, cache)
    phi = gs.phi
    u0 = resample_lambda(grid, phi, cfg.lam)
    mom_phi = functionals.moments(grid, spec, phi)
    mom_u0 = functionals.moments(grid, spec, u0)
    E_phi = functionals.energy(grid, spec, phi, mom_phi)
    E_u0 = functionals.energy(grid, spec, u0, mom_u0)
    P_u0 = functionals.P_functional(grid, spec, u0, mom_u0)
    membership = {
        "E_below": bool(E_u0 < E_phi),
        "mass_leq": bool(mom_u0["mass"] <= mom_phi["mass"] * (1.0 + 1e-6)),
        "P_negative": bool(P_u0 < 0),
    }
    if cfg.lam != 1.0 and not all(membership.values()):
        warnings.warn(f"scaled data misses the instability set: {membership}",
                      RuntimeWarning)

    d0 = functionals.orbit_distance(grid, u0, phi)["distance"]
    rows = []

    def on_record(state, rec):
        dist = functionals.orbit_distance(grid, state.field, phi)["distance"]
        rows.append((rec.t, dist, rec.P, rec.mass, rec.energy))

    result = evolve(u0, spec, cfg.evolve_params(), on_record=on_record)
    outcome, t_blow = _outcome_of(result)
    path = os.path.join(cfg.outdir, "instability.csv")
    with open(path, "w", newline="") as f:
        f.write(f"#{_spec_header(spec)} lam={cfg.lam:.17g}\n")
        writer = csv.writer(f)
        writer.writerow(INSTABILITY_COLUMNS)
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])
    dists = np.array([r[1] for r in rows])
    Ps = np.array([r[2] for r in rows])
    t_tenfold = math.nan
    if d0 > 0:
        hit = np.nonzero(dists >= 10.0 * d0)[0]
        if hit.size:
            t_tenfold = rows[hit[0]][0]
    return {
        "kind": "Instability", "lam": cfg.lam,
        "instability_index": gs.instability_index,
        "d0": d0, "max_distance": float(dists.max()),
        "growth_ratio": float(dists.max() / d0) if d0 > 0 else math.nan,
        "t_tenfold": t_tenfold,
        "P_max": float(Ps.max()), "P_negative_throughout": bool((Ps < 0).all()),
        "membership": membership, "outcome": outcome, "t_blow": t_blow,
        "files": {"instability": path},
    }


def run_defocusing(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    base = cfg.spec()
    spec = NonlinearitySpec(family=base.family, mu=base.mu, epsilon=-1,
                            K=base.K, p=base.p)
    u0, _ = build_initial(cfg, grid, spec, os.path.join(cfg.outdir, "cache"))
    sig0 = norms(grid, u0)["sigma2"]
    worst = [0.0]

    def on_record(state, rec):
        worst[0] = max(worst[0], rec.mass + rec.grad2 + rec.variance)

    result = evolve(u0, spec, cfg.evolve_params(), on_record=on_record)
    outcome, t_blow = _outcome_of(result)
    diag = os.path.join(cfg.outdir, "diagnostics.csv")
    write_diagnostics_csv(diag, result["records"], header_extra=_spec_header(spec))
    return {"kind": "DefocusingGlobal", "outcome": outcome,
            "sigma2_initial": sig0, "sigma2_max": worst[0],
            "bounded": bool(outcome == evolve_mod.FINISHED and worst[0] <= 10.0 * sig0),
            "files": {"diagnostics": diag}}


def run_virial_check(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    spec = cfg.spec()
    u0, _ = build_initial(cfg, grid, spec, os.path.join(cfg.outdir, "cache"))
    params = cfg.evolve_params()
    # uniform record times make the second difference exact in spacing
    params.dt_min = params.dt_max = params.dt0 = min(cfg.dt0, cfg.dt_max)
    result = evolve(u0, spec, params)
    outcome, _ = _outcome_of(result)
    resid = virial_residual(result["records"])
    path = os.path.join(cfg.outdir, "virial.csv")
    with open(path, "w", newline="") as f:
        f.write(f"#{_spec_header(spec)}\n")
        writer = csv.writer(f)
        writer.writerow(("t", "variance", "virial_rhs", "residual"))
        recs = result["records"]
        for i, rec in enumerate(recs):
            rr = resid[i - 1] if 1 <= i <= len(resid) else math.nan
            writer.writerow([f"{rec.t:.17g}", f"{rec.variance:.17g}",
                             f"{rec.virial_rhs:.17g}", f"{rr:.17g}"])
    diag = os.path.join(cfg.outdir, "diagnostics.csv")
    write_diagnostics_csv(diag, result["records"], header_extra=_spec_header(spec))
    return {"kind": "VirialCheck", "outcome": outcome,
            "max_residual": float(resid.max()) if resid.size else math.nan,
            "files": {"virial": path, "diagnostics": diag}}


def run_mt_scan(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    rows = []
    widths = cfg.width_grid or (0.6, 1.0, 1.6)
    alphas = np.linspace(0.5, 4.0 * math.pi - 0.3, cfg.alpha_mt_points)
    for width in widths:
        shape = np.exp(-grid.r**2 / (2.0 * width**2)).astype(complex)
        g2 = norms(grid, shape)["grad2"]
        bump = RadialField(grid, shape * math.sqrt(0.9 / g2), label=f"bump{width:g}")
        bmass = norms(grid, bump)["mass"]
        for alpha in alphas:
            val = functionals.mt_functional(grid, bump, float(alpha))
            rows.append((float(alpha), width, val, bmass, val / bmass))
    path = os.path.join(cfg.outdir, "mtscan.csv")
    with open(path, "w", newline="") as f:
        f.write(f"#{_spec_header(cfg.spec())}\n")
        writer = csv.writer(f)
        writer.writerow(("alpha_mt", "width", "mt_value", "mass", "ratio"))
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])
    ratios = [r[4] for r in rows]
    return {"kind": "MTScan", "n_rows": len(rows),
            "ratio_max": max(ratios), "files": {"mtscan": path}}


# --- sweep (concurrent cells) ----------------------------------------------

def _sweep_cell(payload) -> dict:
    """One dichotomy cell; runs in a worker process."""
    (spec_map, N, R, phi_vals, m, lam, amplitude, width, params_kw) = payload
    spec = nonlin.spec_from_mapping(spec_map)
    grid = build_grid(N, R)
    if lam is not None:
        phi = RadialField(grid, np.asarray(phi_vals))
        u0 = resample_lambda(grid, phi, lam)
        p1, p2 = lam, 0.0
    else:
        vals = amplitude * np.exp(-grid.r**2 / (2.0 * width**2))
        u0 = RadialField(grid, vals.astype(complex))
        p1, p2 = amplitude, width
    verdicts = classify(grid, spec, u0, m, pairs=((1.0, -1.0),))
    v = verdicts[0]
    try:
        result = evolve(u0, spec, EvolveParams(**params_kw))
        outcome, t_blow = _outcome_of(result)
    except nonlin.SaturationError:
        outcome, t_blow = evolve_mod.SATURATED, math.nan
    agree = ((v.prediction == "Global" and outcome == evolve_mod.FINISHED)
             or (v.prediction == "BlowUp" and outcome == evolve_mod.BLEWUP)
             or v.prediction == "NoPrediction")
    return {"param1": p1, "param2": p2, "S_u0": v.S_u0, "m": m,
            "K": v.K_pair, "set": v.set, "prediction": v.prediction,
            "outcome": outcome,
            "t_blow": t_blow, "agree": agree}


def default_lambda_grid(lo: float = 0.8, hi: float = 1.3, n: int = 25,
                        exclude: float = 0.02) -> tuple:
    """n scalings of the ground state, skipping the near-separatrix band."""
    vals = []
    n_lo = n // 2 + n % 2
    n_hi = n - n_lo
    vals.extend(np.linspace(lo, 1.0 - exclude, n_lo))
    vals.extend(np.linspace(1.0 + exclude, hi, n_hi))
    return tuple(float(v) for v in vals)


def run_sweep(cfg: ExperimentConfig) -> dict:
    spec = cfg.spec()
    cache = os.path.join(cfg.outdir, "cache")
    params_kw = dict(t_end=cfg.t_end, dt0=cfg.dt0, dt_min=cfg.dt_min,
                     dt_max=cfg.dt_max, record_stride=cfg.record_stride,
                     grad_factor=cfg.grad_factor,
                     dt_floor=cfg.dt_floor if cfg.dt_floor > 0 else None)
    spec_map = {"family": cfg.family, "K": cfg.K, "p": cfg.p,
                "mu": cfg.mu, "epsilon": cfg.epsilon}
    if cfg.amplitude_grid and cfg.width_grid:
        gs = cached_ground_state(spec, cfg.N, cfg.R, cache)
        cells = [(spec_map, cfg.N, cfg.R, None, gs.m, None, a, w_, params_kw)
                 for a in cfg.amplitude_grid for w_ in cfg.width_grid]
    else:
        lam_grid = cfg.lambda_grid or default_lambda_grid()
        gs = cached_ground_state(spec, cfg.N, cfg.R, cache)
        cells = [(spec_map, cfg.N, cfg.R, gs.phi.values, gs.m, lam, None, None,
                  params_kw) for lam in lam_grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]
    path = os.path.join(cfg.outdir, "atlas.csv")
    with open(path, "w", newline="") as f:
        f.write(f"#{_spec_header(spec)}\n")
        writer = csv.writer(f)
        writer.writerow(ATLAS_COLUMNS)
        for row in results:
            writer.writerow([
                f"{row['param1']:.17g}", f"{row['param2']:.17g}",
                f"{row['S_u0']:.17g}", f"{row['m']:.17g}", f"{row['K']:.17g}",
                row["set"], row["prediction"], row["outcome"],
                f"{row['t_blow']:.17g}",
            ])
    predicted = [r for r in results if r["prediction"] != "NoPrediction"]
    agreement = (sum(r["agree"] for r in predicted) / len(predicted)
                 if predicted else 1.0)
    return {"kind": "Sweep", "cells": len(results),
            "predicted_cells": len(predicted), "agreement": agreement,
            "files": {"atlas": path}}


PROTOCOLS = {
    "Classify": run_classify,
    "Dichotomy": run_dichotomy,
    "Instability": run_instability,
    "DefocusingGlobal": run_defocusing,
    "VirialCheck": run_virial_check,
    "MTScan": run_mt_scan,
    "Sweep": run_sweep,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    os.makedirs(cfg.outdir, exist_ok=True)
    save_config(cfg, os.path.join(cfg.outdir, "config_resolved.toml"))
    summary = PROTOCOLS[cfg.kind](cfg)
    if cfg.render:
        _render_outputs(cfg, summary)
    with open(os.path.join(cfg.outdir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=1)
    return summary


def _render_outputs(cfg: ExperimentConfig, summary: dict) -> None:
    """Figure rendering rides on the plotkit package when it is installed."""
    try:
        from plotkit import render_auto
    except ImportError:
        warnings.warn("plotkit not installed; skipping figure rendering",
                      RuntimeWarning)
        return
    figdir = os.path.join(cfg.outdir, "figures")
    os.makedirs(figdir, exist_ok=True)
    for name, path in summary.get("files", {}).items():
        out = os.path.join(figdir, os.path.basename(path).rsplit(".", 1)[0] + ".png")
        try:
            render_auto(path, out)
            summary.setdefault("figures", {})[name] = out
        except Exception as err:  # rendering must never sink the experiment
            warnings.warn(f"rendering {path} failed: {err}", RuntimeWarning)
