"""
Evaluation Reports

Per-sample CSV, summary JSON and SVG histograms.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .design_eval import EvalResult  # noqa: E402

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "label", "E_m", "E_p", "nu_m", "nu_p", "rho_m", "rho_p", "r_p", "f_p",
    "K_s", "K_theta", "K_star", "eps_r", "eps", "V_m", "d_m", "reliable",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def result_row(
    result: EvalResult,
    K_s: Optional[float] = None,
    V_m: Optional[float] = None,
    d_m: Optional[float] = None,
) -> dict[str, Any]:
    """One CSV row of an evaluated sample."""
    row: dict[str, Any] = {"label": result.label}
    row.update(result.theta_hat.to_dict())
    row.update({
        "K_s": K_s,
        "K_theta": result.K_theta,
        "K_star": result.K_star,
        "eps_r": result.eps_r,
        "eps": result.eps,
        "V_m": V_m,
        "d_m": d_m,
        "reliable": result.reliable,
    })
    return row


def write_results_csv(rows: Sequence[dict[str, Any]], path: Path | str) -> Path:
    """Write evaluation rows in a fixed column order."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in CSV_COLUMNS])
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def write_json(data: dict[str, Any], path: Path | str) -> Path:
    """Write an indented, key-sorted JSON document."""
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def plot_histogram(
    values: Sequence[float],
    path: Path | str,
    xlabel: str,
    title: str = "",
    bins: int = 30,
    markers: Optional[Sequence[float]] = None,
) -> Path:
    """
    Write an SVG histogram.

    Args:
        values: Data (non-finite entries are dropped)
        path: Destination .svg file
        xlabel: Axis label
        title: Plot title
        bins: Number of bins
        markers: Vertical reference lines (e.g. targets)

    Returns:
        The path written
    """
    data = np.asarray(values, dtype=np.float64)
    data = data[np.isfinite(data)]
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "compdiff"}):
        figure, axis = plt.subplots(figsize=(6, 4))
        try:
            axis.hist(data, bins=bins, color="#4c72b0", edgecolor="white")
            for marker in markers or ():
                axis.axvline(marker, color="#c44e52", linestyle="--", linewidth=1)
            axis.set_xlabel(xlabel)
            axis.set_ylabel("count")
            if title:
                axis.set_title(title)
            figure.tight_layout()
            figure.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(figure)
    logger.debug(f"Wrote histogram {path}")
    return path
