"""Render the lab's delimited outputs into PNG figures.

Strictly a consumer of the CSV contracts: nothing is recomputed, inputs are
never modified, and rerunning a job reproduces the same figure.  Schemas are
recognized by their header rows:

  diagnostics.csv   t,dt,mass,energy,action,K_1_0,K_0_1,P,variance,grad2,sup,virial_rhs
  instability.csv   t,orbit_distance,P,mass,energy
  atlas.csv         param1,param2,S_u0,m,K,set,prediction,outcome,t_blow
  field snapshots   "# t=... N=... R=..." then r,re,im
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DIAGNOSTICS_HEADER = ("t", "dt", "mass", "energy", "action", "K_1_0", "K_0_1",
                      "P", "variance", "grad2", "sup", "virial_rhs")
INSTABILITY_HEADER = ("t", "orbit_distance", "P", "mass", "energy")
ATLAS_HEADER = ("param1", "param2", "S_u0", "m", "K", "set", "prediction",
                "outcome", "t_blow")
VIRIAL_HEADER = ("t", "variance", "virial_rhs", "residual")
FIELD_HEADER = ("r", "re", "im")

LOG_RANGE_CUTOFF = 1e3  # dynamic range past this flips a panel to log scale

OUTCOME_COLORS = {"Finished": "#4daf4a", "BlewUp": "#e41a1c",
                  "Saturated": "#ff7f00"}
PREDICTION_GLYPHS = {"Global": "o", "BlowUp": "x", "NoPrediction": "."}


class SchemaError(ValueError):
    """Input file does not match any known CSV contract."""


@dataclass
class PlotJob:
    inputs: list
    output: str
    log_scale: dict = field(default_factory=dict)  # column -> bool override
    markers: bool = False
    dpi: int = 110


def _read_table(path):
    """Header comments, column names and float-or-string rows."""
    comments = []
    with open(path) as f:
        reader = csv.reader(f)
        header = None
        rows = []
        for row in reader:
            if not row:
                continue
            if row[0].startswith("#"):
                comments.append(",".join(row))
                continue
            if header is None:
                header = tuple(c.strip() for c in row)
                continue
            rows.append(row)
    if header is None:
        raise SchemaError(f"{path}: empty file, no header row")
    return comments, header, rows


def detect_schema(path) -> str:
    _, header, _ = _read_table(path)
    if header == DIAGNOSTICS_HEADER:
        return "diagnostics"
    if header == INSTABILITY_HEADER:
        return "instability"
    if header == ATLAS_HEADER:
        return "atlas"
    if header == VIRIAL_HEADER:
        return "virial"
    if header[:3] == FIELD_HEADER:
        return "field"
    raise SchemaError(f"{path}: unrecognized columns {header}")


def _numeric(rows, header, path):
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        return {c: np.array([float(r[i]) for r in rows])
                for i, c in enumerate(header)}
    except (ValueError, IndexError) as err:
        raise SchemaError(f"{path}: malformed row ({err})") from err


def _maybe_log(ax, values, override=None):
    finite = values[np.isfinite(values)]
    positive = finite[finite > 0]
    if override is not None:
        want = override
    else:
        want = (positive.size > 1
                and positive.max() / max(positive.min(), 1e-300) > LOG_RANGE_CUTOFF)
    if want and positive.size:
        ax.set_yscale("log")


def render_timeseries(job: PlotJob) -> str:
    """Diagnostics panels vs t; conserved quantities as relative drift."""
    path = job.inputs[0]
    comments, header, rows = _read_table(path)
    if header != DIAGNOSTICS_HEADER:
        raise SchemaError(f"{path}: expected diagnostics columns, got {header}")
    data = _numeric(rows, header, path)
    t = data["t"]
    panels = [
        ("mass drift", np.abs(data["mass"] / data["mass"][0] - 1.0)
         if data["mass"][0] != 0 else np.abs(data["mass"])),
        ("energy drift", np.abs(data["energy"] - data["energy"][0])
         / (1.0 + np.abs(data["energy"][0]))),
        ("grad2", data["grad2"]),
        ("variance", data["variance"]),
        ("sup", data["sup"]),
        ("P / virial_rhs", None),
    ]
    style = "o-" if job.markers else "-"
    fig, axes = plt.subplots(3, 2, figsize=(9, 8), sharex=True)
    for ax, (label, vals) in zip(axes.flat, panels):
        if label == "P / virial_rhs":
            ax.plot(t, data["P"], style, label="P", ms=3)
            ax.plot(t, data["virial_rhs"], "--", label="virial_rhs")
            ax.legend(fontsize=8)
        else:
            ax.plot(t, vals, style, ms=3)
            if label in ("mass drift", "energy drift"):
                _maybe_log(ax, vals, job.log_scale.get(label, vals.max() > 0))
            else:
                _maybe_log(ax, vals, job.log_scale.get(label))
        ax.set_title(label, fontsize=9)
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("t")
    if comments:
        fig.suptitle(comments[0].lstrip("# "), fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.dpi)
    plt.close(fig)
    return job.output


def render_instability(job: PlotJob) -> str:
    """Orbit-distance escape curve plus the virial drive P."""
    path = job.inputs[0]
    comments, header, rows = _read_table(path)
    if header != INSTABILITY_HEADER:
        raise SchemaError(f"{path}: expected instability columns, got {header}")
    data = _numeric(rows, header, path)
    style = "o-" if job.markers else "-"
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(data["t"], data["orbit_distance"], style, ms=3)
    _maybe_log(ax1, data["orbit_distance"], job.log_scale.get("orbit_distance"))
    ax1.set_ylabel("orbit distance")
    ax1.grid(alpha=0.3)
    ax2.plot(data["t"], data["P"], style, ms=3)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_ylabel("P")
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    if comments:
        fig.suptitle(comments[0].lstrip("# "), fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.dpi)
    plt.close(fig)
    return job.output


def render_profile(job: PlotJob) -> str:
    """Field snapshot: modulus and components vs r."""
    path = job.inputs[0]
    comments, header, rows = _read_table(path)
    if header[:3] != FIELD_HEADER:
        raise SchemaError(f"{path}: expected field columns r,re,im, got {header}")
    data = _numeric(rows, header[:3], path)
    mod = np.hypot(data["re"], data["im"])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(data["r"], mod, "-", label="|u|")
    ax.plot(data["r"], data["re"], "--", lw=0.9, label="Re u")
    if np.any(data["im"]):
        ax.plot(data["r"], data["im"], ":", lw=0.9, label="Im u")
    ax.set_xlabel("r")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if comments:
        ax.set_title(comments[0].lstrip("# "), fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.dpi)
    plt.close(fig)
    return job.output


def render_atlas(job: PlotJob) -> str:
    """Outcome tiles with prediction glyphs; disagreements outlined."""
    path = job.inputs[0]
    comments, header, rows = _read_table(path)
    if header != ATLAS_HEADER:
        raise SchemaError(f"{path}: expected atlas columns, got {header}")
    p1 = np.array([float(r[0]) for r in rows])
    p2 = np.array([float(r[1]) for r in rows])
    sets = [r[5] for r in rows]
    preds = [r[6] for r in rows]
    outs = [r[7] for r in rows]
    xs = np.unique(p1)
    ys = np.unique(p2)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(xs) + 2),
                                    max(3.0, 0.5 * len(ys) + 2)))
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for k in range(len(rows)):
        i, j = xi[p1[k]], yi[p2[k]]
        color = OUTCOME_COLORS.get(outs[k], "#999999")
        ax.add_patch(plt.Rectangle((i - 0.5, j - 0.5), 1, 1, color=color,
                                   alpha=0.75, ec="none"))
        glyph = PREDICTION_GLYPHS.get(preds[k], "?")
        ax.plot(i, j, glyph, color="k", ms=7, mew=1.5)
        disagrees = ((preds[k] == "Global" and outs[k] != "Finished")
                     or (preds[k] == "BlowUp" and outs[k] != "BlewUp"))
        if disagrees:
            ax.add_patch(plt.Rectangle((i - 0.5, j - 0.5), 1, 1, fill=False,
                                       ec="k", lw=2.5))
    ax.set_xticks(range(len(xs)), [f"{v:g}" for v in xs], fontsize=7,
                  rotation=45)
    ax.set_yticks(range(len(ys)), [f"{v:g}" for v in ys], fontsize=7)
    ax.set_xlim(-0.6, len(xs) - 0.4)
    ax.set_ylim(-0.6, len(ys) - 0.4)
    ax.set_xlabel("param1")
    ax.set_ylabel("param2")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c, alpha=0.75)
               for c in OUTCOME_COLORS.values()]
    ax.legend(handles, list(OUTCOME_COLORS), fontsize=7, loc="upper left",
              bbox_to_anchor=(1.01, 1.0))
    if comments:
        ax.set_title(comments[0].lstrip("# "), fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.dpi)
    plt.close(fig)
    return job.output


def render_virial(job: PlotJob) -> str:
    """Variance vs its virial prediction, with the residual series."""
    path = job.inputs[0]
    comments, header, rows = _read_table(path)
    if header != VIRIAL_HEADER:
        raise SchemaError(f"{path}: expected virial columns, got {header}")
    data = _numeric(rows, header, path)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(data["t"], data["variance"], "-", label="variance")
    ax1.set_ylabel("variance")
    ax1b = ax1.twinx()
    ax1b.plot(data["t"], 8.0 * data["virial_rhs"], "--", color="#777777",
              label="8 virial_rhs")
    ax1b.set_ylabel("8 virial_rhs")
    ax1.grid(alpha=0.3)
    good = np.isfinite(data["residual"])
    ax2.plot(data["t"][good], data["residual"][good], ".-", ms=3)
    _maybe_log(ax2, data["residual"][good], job.log_scale.get("residual"))
    ax2.axhline(0.01, color="k", lw=0.8, ls=":")
    ax2.set_ylabel("second-difference residual")
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    if comments:
        fig.suptitle(comments[0].lstrip("# "), fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.dpi)
    plt.close(fig)
    return job.output


RENDERERS = {
    "diagnostics": render_timeseries,
    "instability": render_instability,
    "atlas": render_atlas,
    "virial": render_virial,
    "field": render_profile,
}


def render_auto(input_path, output_path, **job_kw) -> str:
    """Detect the schema and dispatch to the matching renderer."""
    kind = detect_schema(input_path)
    job = PlotJob(inputs=[input_path], output=str(output_path), **job_kw)
    return RENDERERS[kind](job)
