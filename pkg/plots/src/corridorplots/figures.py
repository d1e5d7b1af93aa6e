"""The four figure kinds.

Each builder takes parsed rows and returns a Figure; `render` dispatches on
the kind string and `save` writes it with stable bytes (fixed svg hash salt,
no timestamps), so re-running a spec rewrites an identical file.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .data import (PlotDataError, Row, apply_filters, read_csv, read_many,
                   require_columns)

SWEEP_COLS = ("scenario", "mode", "arrival_rate", "throughput", "min_ttc",
              "termination")
SAMPLE_COLS = ("t", "kind", "follower", "leader", "value")
TRACE_COLS = ("t", "vehicle", "cwp", "eta")

_HASH_SALT = "corridor-plots"


def _groups(rows: list[Row]) -> list[tuple[str, list[Row]]]:
    """Sweep rows keyed by (scenario, mode); label drops a lone scenario."""
    keys = sorted({(r["scenario"], r["mode"]) for r in rows})
    one_scenario = len({s for s, _ in keys}) == 1
    out = []
    for scn, mode in keys:
        label = mode if one_scenario else f"{mode} / {scn}"
        out.append((label, [r for r in rows
                            if r["scenario"] == scn and r["mode"] == mode]))
    return out


def _by_rate(rows: list[Row]) -> list[Row]:
    return sorted(rows, key=lambda r: float(r["arrival_rate"]))


def throughput_figure(rows: list[Row]) -> Figure:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    dead: list[tuple[float, float]] = []
    for label, grp in _groups(rows):
        grp = _by_rate(grp)
        x = [float(r["arrival_rate"]) for r in grp]
        y = [float(r["throughput"]) for r in grp]
        ax.plot(x, y, marker="o", markersize=3.5, linewidth=1.2, label=label)
        dead += [(xi, yi) for xi, yi, r in zip(x, y, grp)
                 if r["termination"] != "TIME_LIMIT"]
    if dead:
        ax.scatter([d[0] for d in dead], [d[1] for d in dead], marker="x",
                   s=45, color="black", zorder=5, label="terminated")
    ax.set_xlabel("arrival rate (veh/s)")
    ax.set_ylabel("throughput (veh/s)")
    ax.grid(True, linewidth=0.3, alpha=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def ttc_scatter_figure(rows: list[Row]) -> Figure:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    marker_legend = set()
    for label, grp in _groups(rows):
        grp = _by_rate(grp)
        color = ax._get_lines.get_next_color()
        clean = [r for r in grp if r["termination"] == "TIME_LIMIT"]
        coll = [r for r in grp if r["termination"] == "COLLISION"]
        blocked = [r for r in grp if r["termination"] not in
                   ("TIME_LIMIT", "COLLISION")]
        if clean:
            ax.scatter([float(r["arrival_rate"]) for r in clean],
                       [float(r["min_ttc"]) for r in clean],
                       marker="o", s=22, color=color, label=label)
        if coll:
            ax.scatter([float(r["arrival_rate"]) for r in coll],
                       [float(r["min_ttc"]) for r in coll],
                       marker="x", s=40, color="red",
                       label="collision" if "x" not in marker_legend else None)
            marker_legend.add("x")
        if blocked:
            ax.scatter([float(r["arrival_rate"]) for r in blocked],
                       [float(r["min_ttc"]) for r in blocked],
                       marker="^", s=30, color="purple",
                       label="entered region" if "^" not in marker_legend
                       else None)
            marker_legend.add("^")
    ax.set_xlabel("arrival rate (veh/s)")
    ax.set_ylabel("minimum TTC (s)")
    ax.grid(True, linewidth=0.3, alpha=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def separation_box_figure(per_file: list[tuple[str, list[Row]]]) -> Figure:
    labels, series = [], []
    for label, rows in per_file:
        vals = [float(r["value"]) for r in rows if r["kind"] == "separation"]
        if not vals:
            raise PlotDataError(f"{label}: no separation samples after "
                                f"filtering")
        labels.append(label)
        series.append(vals)
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(series), 4.2))
    ax.boxplot(series, tick_labels=labels)
    ax.set_ylabel("separation (m)")
    ax.grid(True, axis="y", linewidth=0.3, alpha=0.6)
    fig.tight_layout()
    return fig


def spatiotemporal_figure(rows: list[Row], cwp_spacing: float = 300.0,
                          window: tuple[float, float, float, float] | None
                          = None) -> Figure:
    # keep only the reservation actually flown per (vehicle, waypoint); the
    # replaced ones stay as faded dots so update cascades are visible
    final: dict[tuple[int, int], tuple[float, float]] = {}
    superseded: list[tuple[float, float]] = []
    for r in rows:  # rows arrive time-ordered
        key = (int(r["vehicle"]), int(r["cwp"]))
        if key in final:
            superseded.append((final[key][0], final[key][1]))
        final[key] = (float(r["eta"]), int(r["cwp"]) * cwp_spacing)

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for k in sorted({int(r["cwp"]) for r in rows}):
        ax.axvline(k * cwp_spacing, color="0.82", linewidth=0.6, zorder=0)
    if superseded:
        ax.scatter([p[1] for p in superseded], [p[0] for p in superseded],
                   s=6, color="0.55", alpha=0.5, zorder=2,
                   label="superseded ETA")
    for vid in sorted({v for v, _ in final}):
        pts = sorted((final[(vid, c)][1], final[(vid, c)][0])
                     for (v, c) in final if v == vid)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".",
                markersize=3, linewidth=0.8, zorder=3)
    if window is not None:
        x0, x1, t0, t1 = window
        ax.add_patch(Rectangle((x0, t0), x1 - x0, t1 - t0, facecolor="red",
                               alpha=0.25, edgecolor="red", zorder=4))
    ax.set_xlabel("position (m)")
    ax.set_ylabel("time (s)")
    if superseded:
        ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    return fig


def render(kind: str, paths: list[str], filters: list[tuple[str, str]],
           cwp_spacing: float = 300.0,
           window: tuple[float, float, float, float] | None = None) -> Figure:
    if kind == "separation-box":
        per_file = []
        for p in paths:
            header, rows = read_csv(p)
            require_columns(header, SAMPLE_COLS, kind)
            per_file.append((Path(p).stem, apply_filters(rows, header,
                                                         filters)))
        return separation_box_figure(per_file)

    header, rows = read_many(paths)
    if kind == "throughput":
        require_columns(header, SWEEP_COLS, kind)
        return throughput_figure(apply_filters(rows, header, filters))
    if kind == "ttc-scatter":
        require_columns(header, SWEEP_COLS, kind)
        return ttc_scatter_figure(apply_filters(rows, header, filters))
    if kind == "spatiotemporal":
        require_columns(header, TRACE_COLS, kind)
        return spatiotemporal_figure(apply_filters(rows, header, filters),
                                     cwp_spacing, window)
    raise PlotDataError(f"unknown figure kind {kind!r}")


def save(fig: Figure, out: str | Path) -> Path:
    path = Path(out)
    if not path.suffix:
        path = path.with_suffix(".svg")
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}  # drop the timestamp: stable bytes
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    with plt.rc_context({"svg.hashsalt": _HASH_SALT}):
        fig.savefig(path, metadata=metadata)
    plt.close(fig)
    return path
