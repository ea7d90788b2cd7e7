"""Report figures: routed layout over the thermal map, and power breakdowns."""

from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .ingest import POWER_KEYS

_PARTS = ("p_cross", "p_trunk_thm", "p_ring_thm", "p_path", "p_dynamic")
_LABELS = {"p_cross": "crossing", "p_trunk_thm": "trunk thermal",
           "p_ring_thm": "ring thermal", "p_path": "propagation", "p_dynamic": "dynamic"}


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=150, bbox_inches="tight")


def plot_layout(flow, thermal, path, title: str | None = None) -> None:
    """Thermal map, lit and dark trunks, and each link's access route."""
    fig = Figure(figsize=(6.4, 5.6))
    ax = fig.add_subplot(111)
    w, h = flow.onet.width, flow.onet.height
    ext = (0, thermal.cols * thermal.tile, 0, thermal.rows * thermal.tile)
    im = ax.imshow(thermal.grid, origin="lower", extent=ext, cmap="inferno",
                   alpha=0.75, interpolation="nearest")
    fig.colorbar(im, ax=ax, label="|ΔT| (°C)")
    active = flow.assignment.trunk_active
    for t in flow.plan.trunks:
        xs = (t.lo, t.hi) if t.orientation == "H" else (t.coord, t.coord)
        ys = (t.coord, t.coord) if t.orientation == "H" else (t.lo, t.hi)
        if t.id in active:
            ax.plot(xs, ys, color="deepskyblue", lw=2.5, zorder=3)
        else:
            ax.plot(xs, ys, color="0.6", lw=1, ls="--", zorder=2)
    links = {l.link_id: l for l in flow.onet.links}
    for lid, tid in flow.assignment.assigned():
        acc = flow.accesses[(lid, tid)]
        l = links[lid]
        for a, b in ((l.driver_pos, acc.mod_pos), (acc.det_pos, l.sink_pos)):
            ax.plot((a[0], a[0], b[0]), (a[1], b[1], b[1]), color="white", lw=0.7, zorder=4)
        ax.plot(*acc.mod_pos, marker="s", ms=3, color="lime", zorder=5)
        ax.plot(*acc.det_pos, marker="o", ms=3, color="magenta", zorder=5)
    for n in flow.onet.nets:
        ax.plot(*n.driver.position, marker="^", ms=5, color="cyan", mec="k", mew=0.4, zorder=6)
        for s in n.sinks:
            ax.plot(*s.position, marker="v", ms=4, color="yellow", mec="k", mew=0.4, zorder=6)
    ax.set_xlim(0, w)
    ax.set_ylim(0, h)
    ax.set_aspect("equal")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    r = flow.report
    ax.set_title(title or f"{flow.algo.upper()}: {r.trunk_count} trunks, "
                 f"{r.channel_count} channels, {r.p_total:.3f} mW")
    _save(fig, path)


def plot_power(reports: dict, path, title: str = "Laser power breakdown") -> None:
    """Stacked bars of the five power terms, one bar per labelled report."""
    fig = Figure(figsize=(1.6 + 1.3 * len(reports), 4.2))
    ax = fig.add_subplot(111)
    labels = list(reports)
    bottom = [0.0] * len(labels)
    for part in _PARTS:
        vals = [getattr(reports[k], part) for k in labels]
        ax.bar(labels, vals, bottom=bottom, label=_LABELS[part], width=0.6)
        bottom = [b + v for b, v in zip(bottom, vals)]
    for k, total in enumerate(bottom):
        ax.annotate(f"{total:.3f}", (k, total), ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("power (mW)")
    ax.set_title(title)
    ax.legend(fontsize=7, frameon=False, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    _save(fig, path)


assert set(_PARTS) < set(POWER_KEYS)
