"""SVG figures from sweep CSVs: success heatmaps, threshold overlays and deviation scatters.

Output is byte-stable for a given CSV: the SVG hash salt is fixed and the
date metadata is dropped. Every cell rectangle and threshold line carries a
``gid`` so the figure can be checked structurally.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .errors import DomainError  # noqa: E402

__all__ = ["KINDS", "REQUIRED", "read_rows", "plot"]

KINDS = ("heatmap", "threshold-overlay", "deviation-scatter")
REQUIRED = {
    "heatmap": ("separation", "noise_ratio", "T", "success"),
    "threshold-overlay": ("separation", "noise_ratio", "T", "success", "threshold"),
    "deviation-scatter": ("separation", "T", "max_deviation"),
}


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def _f(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return math.nan


def _series(rows):
    """Success rate per ``(T, noise_ratio)`` series and separation."""
    acc = defaultdict(lambda: defaultdict(list))
    thr = {}
    for r in rows:
        key = (int(float(r["T"])), _f(r["noise_ratio"]))
        acc[key][_f(r["separation"])].append(_f(r["success"]))
        if "threshold" in r:
            thr[key] = _f(r["threshold"])
    out = {}
    for key in sorted(acc):
        seps = sorted(acc[key])
        out[key] = (seps, [sum(acc[key][s]) / len(acc[key][s]) for s in seps])
    return out, thr


def _label(key):
    return f"T={key[0]}, noise={key[1]:g}"


def _heatmap(ax, rows):
    series, _ = _series(rows)
    seps = sorted({s for v in series.values() for s in v[0]})
    keys = list(series)
    cmap = plt.get_cmap("viridis")
    grid = []
    for i, key in enumerate(keys):
        rates = dict(zip(*series[key]))
        line = []
        for j, s in enumerate(seps):
            rate = rates.get(s, math.nan)
            line.append(rate)
            colour = (0.85, 0.85, 0.85) if math.isnan(rate) else cmap(rate)
            ax.add_patch(Rectangle((j, i), 1, 1, facecolor=colour, edgecolor="white", gid=f"cell-{i}-{j}"))
            if not math.isnan(rate):
                ax.text(j + 0.5, i + 0.5, f"{rate:.2f}", ha="center", va="center", fontsize=7,
                        color="white" if rate < 0.6 else "black")
        grid.append(line)
    ax.set_xlim(0, max(len(seps), 1))
    ax.set_ylim(0, max(len(keys), 1))
    ax.set_xticks([j + 0.5 for j in range(len(seps))], [f"{s:g}" for s in seps], rotation=45)
    ax.set_yticks([i + 0.5 for i in range(len(keys))], [_label(k) for k in keys])
    ax.set_xlabel("separation (Rayleigh units)")
    ax.set_title("success rate")
    return {"rows": [_label(k) for k in keys], "separations": seps, "rates": grid}


def _overlay(ax, rows):
    series, thr = _series(rows)
    lines = {}
    thresholds = {}
    for i, (key, (seps, rates)) in enumerate(series.items()):
        (ln,) = ax.plot(seps, rates, marker="o", label=_label(key), color=f"C{i}")
        ln.set_gid(f"series-{i}")
        lines[_label(key)] = {"separations": seps, "rates": rates}
        t = thr.get(key, math.nan)
        if math.isfinite(t):
            ax.axvline(t, color=f"C{i}", linestyle="--", gid=f"threshold-{i}")
            thresholds[_label(key)] = t
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("separation (Rayleigh units)")
    ax.set_ylabel("success rate")
    if series:
        ax.legend(fontsize=7)
    return {"series": lines, "thresholds": thresholds}


def _scatter(ax, rows):
    pts = defaultdict(list)
    for r in rows:
        dev = _f(r["max_deviation"])
        if math.isfinite(dev):
            pts[int(float(r["T"]))].append((_f(r["separation"]), dev))
    for i, T in enumerate(sorted(pts)):
        xs, ys = zip(*pts[T])
        sc = ax.scatter(xs, ys, s=8, label=f"T={T}", color=f"C{i}")
        sc.set_gid(f"points-{i}")
    ax.set_xlabel("separation (Rayleigh units)")
    ax.set_ylabel("max deviation (Rayleigh units)")
    if pts:
        ax.set_yscale("log")
        ax.legend(fontsize=7)
    return {"points": {f"T={T}": len(v) for T, v in sorted(pts.items())}}


def plot(csv_path, kind: str = "heatmap", out=None):
    """Render ``kind`` from ``csv_path`` to an SVG and return ``(path, model)``.

    ``model`` is the plotted data (rates, thresholds, counts) for inspection.
    An empty CSV yields empty axes; missing columns raise ``DomainError``.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown plot kind {kind!r}; choose from {KINDS}")
    header, rows = read_rows(csv_path)
    if header:
        missing = [c for c in REQUIRED[kind] if c not in header]
        if missing:
            raise DomainError(f"CSV lacks columns needed for {kind}: {', '.join(missing)}")
    out = Path(out) if out is not None else Path(csv_path).with_name(f"{kind}.svg")
    with matplotlib.rc_context({"svg.hashsalt": "multisr", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        if kind == "heatmap":
            model = _heatmap(ax, rows)
        elif kind == "threshold-overlay":
            model = _overlay(ax, rows)
        else:
            model = _scatter(ax, rows)
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    model["kind"] = kind
    model["rows"] = model.get("rows", len(rows))
    return str(out), model
