"""
Streamlit pages for liftcoc: experiment reproduction and an interactive evaluator
"""

from __future__ import annotations

from fractions import Fraction

import pandas as pd
import streamlit as st

from src.liftcoc.charts import create_lambda_chart, create_report_chart, get_report_stats
from src.liftcoc.cocycles import CocycleSpec, operands_from_text, psi_stable
from src.liftcoc.config import DEFAULT_DEPTH, DEFAULT_LAMBDAS, REPORT_FILE
from src.liftcoc.errors import LiftcocError
from src.liftcoc.experiments import (
    ExperimentReport,
    format_rational,
    lambda_polynomial,
    load_reports,
    polynomial_from_samples,
    reports_frame,
    reports_to_json,
    run_4_3_4,
    run_4_3_5,
    run_4_4,
    save_reports,
)

_SECTIONS = {
    "Ψ₃ and Ψ₅ on small arguments": "4.3.4",
    "Twisted generators, λ sweep": "4.3.5",
    "Leading term and interval classes": "4.4",
}


# ── Cached runs ──────────────────────────────────────────────────────────


@st.cache_data(show_spinner=False)
def _run_section(section: str, depth: int, n: int) -> list[ExperimentReport]:
    if section == "4.3.4":
        return run_4_3_4(depth)
    if section == "4.3.5":
        return run_4_3_5(DEFAULT_LAMBDAS, depth)
    return run_4_4(n, depth)


@st.cache_data(show_spinner=False)
def _lambda_samples(n: int, depth: int) -> list[tuple[int, Fraction]]:
    _, samples = lambda_polynomial(n, DEFAULT_LAMBDAS, depth)
    return samples


# ── Reproduction page ────────────────────────────────────────────────────


def render_reproduction_page() -> None:
    """Run a named experiment and compare computed values against expectations."""
    st.header("🧮 Reproduction")
    st.caption("Exact rational evaluations, each checked at depth N and N + slack.")

    with st.sidebar:
        with st.expander("⚙️ Run Settings", expanded=True):
            label = st.selectbox("Experiment", options=list(_SECTIONS))
            depth = st.number_input("Depth N", min_value=2, max_value=16, value=DEFAULT_DEPTH)
            n = st.number_input("Variables n (leading-term run only)", min_value=1, max_value=2, value=1)

    section = _SECTIONS[label]
    with st.spinner("🔄 Evaluating cocycles..."):
        try:
            reports = _run_section(section, int(depth), int(n))
        except LiftcocError as exc:
            st.error(str(exc))
            return

    frame = reports_frame(reports)
    stats = get_report_stats(frame)

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric(label="✅ Passed", value=f"{stats['passed']}/{stats['total']}")
    with col2:
        st.metric(
            label="⚠️ Unstable",
            value=stats["unstable"],
            help="Values that changed between depth N and N + slack",
        )
    with col3:
        st.metric(
            label="ℹ️ Informational",
            value=stats["informational"],
            help="Reported for comparison, not counted as failures",
        )
    with col4:
        st.metric(label="⏱️ Wall Time", value=f"{stats['wall_time']:.2f}s")

    st.dataframe(frame, width="stretch", hide_index=True)
    st.download_button(
        "💾 Download JSON",
        data=reports_to_json(reports, timings=True),
        file_name=f"liftcoc-{section}.json",
        mime="application/json",
    )
    if st.button("📌 Keep as last run"):
        path = save_reports(reports)
        st.success(f"Saved {len(reports)} reports to {path}")
    st.plotly_chart(create_report_chart(frame), width="stretch")
    _render_last_run()

    if section in ("4.3.5", "4.4"):
        st.subheader("📈 λ-polynomial")
        poly_n = 1 if section == "4.3.5" else int(n)
        samples = _lambda_samples(poly_n, int(depth))
        poly = polynomial_from_samples(samples)
        st.plotly_chart(create_lambda_chart(poly, samples), width="stretch")


def _render_last_run() -> None:
    if not REPORT_FILE.exists():
        return
    with st.expander("🗂️ Last kept run"):
        try:
            saved = load_reports(REPORT_FILE)
        except (OSError, ValueError, KeyError) as exc:
            st.warning(f"Could not read {REPORT_FILE}: {exc}")
            return
        st.dataframe(reports_frame(saved), width="stretch", hide_index=True)


# ── Evaluator page ───────────────────────────────────────────────────────


def _value_row(spec: CocycleSpec, text: str, lam: str) -> pd.DataFrame:
    build = operands_from_text(text, spec.n, Fraction(lam) if lam.strip() else None)
    result = psi_stable(spec, build)
    return pd.DataFrame(
        [
            {
                "value": format_rational(result.value),
                "stable": result.stable,
                "depths": ", ".join(str(d) for d in result.depths),
                "formula": spec.resolved_formula,
            }
        ]
    )


def render_evaluator_page() -> None:
    """Evaluate Ψ on operators typed in the text form, e.g. `d1, x1^2*d1, E[1,1]`."""
    st.header("🔎 Evaluator")

    col1, col2, col3 = st.columns(3)
    with col1:
        k = st.number_input("k (derivations)", min_value=1, max_value=4, value=2)
    with col2:
        s = st.number_input("s", min_value=1, max_value=3, value=1)
    with col3:
        depth = st.number_input("Depth N", min_value=2, max_value=16, value=DEFAULT_DEPTH)

    formula = st.radio("Formula", ["auto", "interval", "pair", "circle"], horizontal=True)
    arity = int(k) + 2 * int(s) - 1
    text = st.text_input(
        f"Arguments ({arity} operators, comma separated)", value="d1, x1^2*d1, E[1,1]"
    )
    lam = st.text_input(
        "λ (optional)",
        value="",
        help="Prepends ∂_i and x_i·Σx_j∂_j − λx_i to the arguments",
    )

    if not st.button("Evaluate", type="primary"):
        return

    try:
        spec = CocycleSpec.standard(int(k), int(s), int(depth), formula)
        st.dataframe(_value_row(spec, text, lam), width="stretch", hide_index=True)
    except (LiftcocError, ValueError) as exc:
        st.error(f"Could not evaluate: {exc}")
