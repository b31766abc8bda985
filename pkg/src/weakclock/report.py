"""Quick-look rendering of a finished run to a PNG beside the record files.

One fixed-style plot per experiment type. Overlay curves are taken from the
oracle columns already present in the rows, so the image and the record can
never disagree. Timestamps and software tags are stripped for reproducible
bytes.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RC = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "weakclock",
}

_Y_MAIN = {
    "cfi-sweep": ("cfi", "stderr", [("qfi", "quantum limit"), ("fit", "fit")]),
    "bmse-sweep": ("bmse", "stderr", [("threshold_bmse", "threshold model")]),
    "oci": ("bmse_min", None, [("prior_variance", "prior variance")]),
    "cascaded": ("bmse", "stderr", []),
    "threshold": ("predicted_bmse", None, []),
    "light": ("sensitivity", None, [("quantum_limit", "quantum limit")]),
}


def _column(columns: Sequence[str], rows: List[list], name: str) -> List[float]:
    idx = list(columns).index(name)
    return [row[idx] for row in rows]


def render_quicklook(
    experiment: str,
    columns: Sequence[str],
    rows: List[list],
    png_path: str,
    sweep_axis: Optional[str] = None,
) -> str:
    """Write a single-axes summary plot of the run and return its path."""
    axis = sweep_axis or "T"
    x = _column(columns, rows, axis)
    y_name, err_name, overlays = _Y_MAIN[experiment]
    y = _column(columns, rows, y_name)

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if err_name is not None:
            err = _column(columns, rows, err_name)
            ax.errorbar(x, y, yerr=err, fmt="o-", ms=3, capsize=2, label=y_name)
        else:
            ax.plot(x, y, "o-", ms=3, label=y_name)
        for name, label in overlays:
            values = _column(columns, rows, name)
            if all(v is not None and v == v for v in values):
                ax.plot(x, values, "--", lw=1, label=label)
        positive = [v for v in y if isinstance(v, (int, float)) and v > 0]
        if len(positive) == len(y) and len(set(x)) > 2 and min(x) > 0:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(axis)
        ax.set_ylabel(y_name)
        ax.set_title(experiment)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(png_path, metadata={"Software": None})
        plt.close(fig)
    return png_path
