"""HTML plots of sweep CSVs."""

from pathlib import Path
from typing import Optional, Union

import pandas as pd
import plotly.graph_objects as go

from .logger import get_logger

logger = get_logger(__name__)

DEFAULT_METRICS = {
    "fig1": "r_tot",
    "fig2": "rc",
    "fig3": "r_tot",
    "fig4": "kappa",
}
PALETTE = ["#7aa2f7", "#f7768e", "#9ece6a", "#e0af68", "#bb9af7", "#7dcfff", "#ff9e64", "#565f89"]


def sweep_figure(frame: pd.DataFrame, metric: Optional[str] = None, title: Optional[str] = None) -> go.Figure:
    """
    One line per series of ``metric`` against the sweep axis.

    Starred rows are drawn as star markers on top of their series.

    Args:
        frame: Rows in the sweep CSV schema
        metric: Column to plot (chosen from the experiment id if omitted)
        title: Figure title
    """
    experiment = str(frame["experiment"].iloc[0]) if len(frame) else "custom"
    metric = metric or DEFAULT_METRICS.get(experiment, "r_tot")
    if experiment == "fig1" and metric == "r_tot":
        metric = "private_sum"
        frame = frame.assign(private_sum=frame["r1"] + frame["r2"])

    fig = go.Figure()
    starred = frame["starred"].astype(bool)
    for i, (series, rows) in enumerate(frame[~starred].groupby("series", sort=False)):
        color = PALETTE[i % len(PALETTE)]
        fig.add_trace(
            go.Scatter(x=rows["sweep_value"], y=rows[metric], mode="lines+markers", name=series, line_color=color)
        )
        stars = frame[starred & (frame["series"] == series)]
        if len(stars):
            fig.add_trace(
                go.Scatter(
                    x=stars["sweep_value"],
                    y=stars[metric],
                    mode="markers",
                    marker=dict(symbol="star", size=14, color=color),
                    name=f"{series} (closed form)",
                )
            )

    x_label = str(frame["sweep_variable"].iloc[0]) if len(frame) else ""
    fig.update_layout(
        title_text=title or f"{experiment}: {metric}",
        xaxis_title=x_label,
        yaxis_title=metric,
        paper_bgcolor="#24283b",
        plot_bgcolor="#2f334d",
        font=dict(color="#c0caf5"),
    )
    fig.update_xaxes(gridcolor="#414868", zerolinecolor="#414868")
    fig.update_yaxes(gridcolor="#414868", zerolinecolor="#414868")
    return fig


def plot_csv(path: Union[str, Path], output: Optional[Union[str, Path]] = None, metric: Optional[str] = None) -> Path:
    """Render a sweep CSV to a standalone HTML file next to it (or at ``output``)."""
    path = Path(path)
    frame = pd.read_csv(path)
    fig = sweep_figure(frame, metric)
    target = Path(output) if output else path.with_suffix(".html")
    fig.write_html(str(target), include_plotlyjs="cdn")
    logger.info(f"Plot written to {target}")
    return target
