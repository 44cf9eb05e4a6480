"""
Chart and summary helpers for the liftcoc dashboard
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import sympy


def get_report_stats(frame: pd.DataFrame) -> dict:
    """Counts shown in the metric tiles of the reproduction page."""
    if frame.empty:
        return {"total": 0, "passed": 0, "unstable": 0, "informational": 0, "wall_time": 0.0}
    return {
        "total": len(frame),
        "passed": int(frame["passed"].sum()),
        "unstable": int((~frame["stable"]).sum()),
        "informational": int(frame["informational"].sum()),
        "wall_time": float(frame["wall_time"].fillna(0).sum()),
    }


def _as_float(text: str) -> float:
    return float(Fraction(text))


def create_report_chart(frame: pd.DataFrame, title: str = "Expected vs computed"):
    """Grouped bars of expected and computed values per report id."""
    long = frame[["id", "expected", "computed"]].melt(
        id_vars="id", var_name="kind", value_name="value"
    )
    long["value"] = long["value"].map(_as_float)
    fig = px.bar(
        long,
        x="id",
        y="value",
        color="kind",
        barmode="group",
        title=title,
        labels={"id": "Report", "value": "Value", "kind": ""},
        color_discrete_sequence=px.colors.qualitative.Set2,
    )
    fig.update_layout(height=400, xaxis={"tickangle": -30})
    return fig


def create_lambda_chart(
    poly: sympy.Poly, samples: Sequence[tuple[int, Fraction]], padding: int = 1
):
    """Interpolated λ-polynomial with the sampled points on top."""
    lam = poly.gens[0]
    points = [p for p, _ in samples]
    grid = [x / 4 for x in range(4 * (min(points) - padding), 4 * (max(points) + padding) + 1)]
    curve = pd.DataFrame(
        {"lambda": grid, "value": [float(poly.as_expr().subs(lam, x)) for x in grid]}
    )

    fig = px.line(
        curve,
        x="lambda",
        y="value",
        title=f"Ψ as a polynomial in λ: {poly.as_expr()}",
        labels={"lambda": "λ", "value": "Ψ"},
    )
    fig.add_trace(
        go.Scatter(
            x=points,
            y=[float(v) for _, v in samples],
            mode="markers",
            name="samples",
            marker={"size": 10},
        )
    )
    fig.update_traces(hovertemplate="λ = %{x}<br>Ψ = %{y}<extra></extra>")
    fig.update_layout(height=400, showlegend=False)
    return fig
