"""Figure rendering for Monte Carlo reports (file output only)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # headless: figures go to files, never to a display
import matplotlib.pyplot as plt
import numpy as np


def render_mse_figure(report, path) -> Path:
    """Log-log plot of empirical MSE against n, with the fitted slope line
    and, when available, the closed-form reference order."""
    path = Path(path)
    n = np.asarray(report.n, dtype=float)
    mse = np.asarray(report.mse, dtype=float)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(n, mse, "o-", label="empirical MSE")
    if math.isfinite(report.slope) and np.all(mse > 0):
        anchor = mse[0] * (n / n[0]) ** report.slope
        ax.loglog(n, anchor, "--",
                  label=f"fit: slope {report.slope:.3f} ± {report.slope_stderr:.3f}")
    ref = report.reference
    if ref is not None and np.all(mse > 0):
        guide = mse[0] * np.array([ref.order(v) for v in n])
        guide *= mse[0] / guide[0]
        ax.loglog(n, guide, ":", label=f"reference n^{ref.poly:.3f}")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("MSE")
    ax.set_title(f"mode = {report.mode}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
