"""Figures for sweep and localization outputs.

Rendered from the same rows that go into the CSV files, so a figure never
shows anything the data files do not contain.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _by_strategy(rows):
    out: dict[str, list] = {}
    for row in rows:
        out.setdefault(row[2], []).append(row)
    return out


def _save(fig, path: Path) -> Path:
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sweep(columns: Sequence[str], rows: Sequence[Sequence], out: Path, stem: str = "",
               s_max: float | None = None) -> list[Path]:
    """Company payoff per strategy, SSE user payoffs and thresholds against T."""
    out = Path(out)
    groups = _by_strategy(rows)
    labels = [c[len("mu_"):] for c in columns if c.startswith("mu_")]
    written = []
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for name, block in groups.items():
            ax.plot([r[1] for r in block], [r[4] for r in block], label=name)
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("visit time T (min)")
        ax.set_ylabel("company payoff")
        ax.legend()
        written.append(_save(fig, out / f"{stem}company_payoff.png"))

        sse = groups.get("SSE", [])
        fig, ax = plt.subplots()
        for i, label in enumerate(labels):
            ax.plot([r[1] for r in sse], [r[5 + 3 * i + 2] for r in sse], label=label)
        ax.set_xlabel("visit time T (min)")
        ax.set_ylabel("user payoff at SSE")
        ax.legend()
        written.append(_save(fig, out / f"{stem}user_payoffs.png"))

        fig, ax = plt.subplots()
        for i, label in enumerate(labels):
            ax.plot([r[1] for r in sse], [r[5 + 3 * i] for r in sse], label=label)
        if s_max is not None:
            ax.axhline(s_max, color="k", lw=0.6, ls="--")
        ax.set_xlabel("visit time T (min)")
        ax.set_ylabel(r"threshold $\mu_i$")
        ax.legend()
        written.append(_save(fig, out / f"{stem}thresholds.png"))
    return written


def plot_localization(runs, out: Path) -> list[Path]:
    """Per-sample error histogram for each packet count."""
    out = Path(out)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for r in runs:
            ax.hist([s.error for s in r.samples], bins=40, histtype="step",
                    label=f"k = {r.packets_per_sample}, mean {r.estimate.mean_error:.3g} m")
        ax.set_xlabel("localization error (m)")
        ax.set_ylabel("samples")
        ax.legend()
        return [_save(fig, out / "localization_errors.png")]
