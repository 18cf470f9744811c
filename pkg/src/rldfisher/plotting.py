"""Figure output for sweeps: log10 RLD and SLD values along the swept axis."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_sweep(rows, path, axis: str = "gamma", title: str | None = None) -> Path:
    """Write the two log curves to ``path``; the suffix picks the format (svg, png, pdf).

    Rows flagged with an error are left out of the curves.
    """
    path = Path(path)
    ok = [r for r in rows if r.ok]
    x = np.array([getattr(r, "gamma" if axis == "gamma" else "n_noise") for r in ok])
    rld = np.array([r.log10_rld_value for r in ok])
    sld = np.array([r.log10_sld_value for r in ok])

    with plt.rc_context({"svg.hashsalt": "rldfisher", "font.size": 10}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        ax.plot(x, rld, "-o", ms=3, label="RLD")
        ax.plot(x, sld, "--s", ms=3, label="SLD (optimized probe)")
        ax.set_xlabel(r"$\gamma$" if axis == "gamma" else r"$N$")
        ax.set_ylabel(r"$\log_{10}$ Fisher information value")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        meta = {"Date": None} if path.suffix.lower() in (".svg", ".pdf") else {}
        fig.savefig(path, metadata=meta)
        plt.close(fig)
    return path
