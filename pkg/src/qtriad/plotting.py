"""Figure rendering for sweep reports.

Kept separate from the evaluation code: the library computes tables, the
CLI optionally renders them to image files next to the CSV output.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .games import SweepRow

_FAMILY_STYLE = {
    "ghz": {
        "xlabel": "three-tangle",
        "title": "XY-game win probability, GHZ-class resource",
    },
    "w": {
        "xlabel": "concurrence sum",
        "title": "ZY-game win probability, single-excitation resource",
    },
    "wn": {
        "xlabel": "concurrence sum",
        "title": "ZY-game win probability, integer-indexed W family",
    },
    "rulemaker-w": {
        "xlabel": "lambda (rad)",
        "title": "Rule-maker game win probability, balanced W resource",
    },
    "rulemaker-ghz": {
        "xlabel": "lambda (rad)",
        "title": "Rule-maker game win probability, GHZ resource",
    },
}


def render_sweep_figure(
    rows: Sequence[SweepRow],
    family: str,
    path: str,
    baseline: float = 0.75,
    note: str | None = None,
) -> None:
    """Render one sweep family as win probability vs its x measure."""
    style = _FAMILY_STYLE.get(family, {"xlabel": "x", "title": family})
    xs = [r.x_measure for r in rows]
    ys = [r.win for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if family == "w":
        ax.plot(xs, ys, ".", ms=3, label="exact enumeration")
    else:
        order = sorted(range(len(xs)), key=lambda i: xs[i])
        ax.plot([xs[i] for i in order], [ys[i] for i in order], "-", lw=1.5, label="exact enumeration")
    ax.axhline(baseline, color="gray", ls="--", lw=1, label=f"classical baseline {baseline:g}")
    ax.set_xlabel(style["xlabel"])
    ax.set_ylabel("win probability")
    ax.set_title(style["title"], fontsize=10)
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8, loc="lower right")
    if note:
        fig.text(0.01, 0.01, note, fontsize=6, wrap=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
