"""
liftcoc - Lifted Cocycles Dashboard
A Streamlit app for evaluating lifted cocycles and reproducing their known values
"""

import streamlit as st

# ── Page functions ───────────────────────────────────────────────────────


def reproduction_page():
    """Reproduction page: named experiments with expected values."""
    from src.liftcoc.dashboard import render_reproduction_page

    render_reproduction_page()


def evaluator_page():
    """Evaluator page: Ψ on user-supplied operators."""
    from src.liftcoc.dashboard import render_evaluator_page

    render_evaluator_page()


# ── Page config ──────────────────────────────────────────────────────────

st.set_page_config(
    page_title="liftcoc - Lifted Cocycles",
    page_icon="🧮",
    layout="wide",
)

# ── Navigation ───────────────────────────────────────────────────────────

pg = st.navigation(
    [
        st.Page(reproduction_page, title="Reproduction", icon="🧮", default=True),
        st.Page(evaluator_page, title="Evaluator", icon="🔎"),
    ]
)

# ── Sidebar ──────────────────────────────────────────────────────────────

with st.sidebar:
    st.markdown(
        """
        **Operators** are typed as sums of products of
        `x1`, `d1^-2`, `E[1,2]`, `ID` and rationals like `3/2`.
        Plain symbols stand for `ID * symbol`.
        """
    )

# ── Run selected page ────────────────────────────────────────────────────

pg.run()
