import streamlit as st
import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from models.config import RunConfig
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.mqdt import ChannelSet, levels_for_n, levels_frame, lufano_data, window_for_n
from utils.rydberg_pair import c6_perturbative, c6_scaling, c6_scan, pair_potential_curves, target_pair

# Set page configuration
st.set_page_config(
    page_title="Rydberg Interactions",
    page_icon="🔭",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()
if 'pair_curves' not in st.session_state:
    st.session_state.pair_curves = None

config = st.session_state.config
SYMMETRIES = ["nsF12", "nsF32", "npF12", "npF32", "npF52", "ndF32", "ndF52", "ndF72"]


@st.cache_data
def cached_levels(symmetry, nmin, nmax):
    return levels_frame(levels_for_n(symmetry, nmin, nmax))


@st.cache_data
def cached_lufano(symmetries, nmin, nmax):
    window = window_for_n(nmin, nmax)
    return pd.concat([lufano_data(ChannelSet.from_symmetry(symmetry), window).assign(symmetry=symmetry)
                      for symmetry in symmetries], ignore_index=True)


@st.cache_data
def cached_c6(symmetry, nmin, nmax):
    return c6_scan(symmetry, nmin, nmax)


@st.cache_data
def cached_curves(symmetry, n, M, rmin, rmax, points, window):
    target = target_pair(symmetry, n, M=M)
    curves = pair_potential_curves(target, np.linspace(rmin, rmax, points), energy_window_ghz=window)
    return curves.to_frame(count=10), c6_perturbative(target)["C6_GHz_um6"], curves.basis_size


st.title("🔭 Rydberg Interactions")
st.markdown("Multichannel Rydberg levels of He-3 and van der Waals interactions between Rydberg pairs")

tab1, tab2, tab3 = st.tabs(["Levels", "C6 Scaling", "Pair Potentials"])

with tab1:
    col1, col2 = st.columns(2)
    with col1:
        symmetry = st.selectbox("Symmetry", SYMMETRIES, index=1)
    with col2:
        nmin, nmax = st.slider("n range", 10, 120, (30, 80))

    try:
        frame = cached_levels(symmetry, nmin, nmax)
        st.dataframe(frame, use_container_width=True)
        st.download_button("Download CSV", format_result(frame, anchor="MQDT bound states", config_hash=config.config_hash()),
                           file_name=f"mqdt_{symmetry}.csv", mime="text/csv")
    except ToolkitError as e:
        st.error(f"Error computing levels: {e.message}")

    st.subheader("Lu-Fano plot")
    if st.button("Compute Lu-Fano data"):
        try:
            lufano = cached_lufano(("nsF12", "nsF32"), nmin, nmax)
            fig = px.scatter(lufano, x="nu1_mod1", y="nu0_mod1", color="symmetry",
                             labels={"nu1_mod1": "nu1 mod 1", "nu0_mod1": "nu0 mod 1"})
            st.plotly_chart(fig, use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error computing Lu-Fano data: {e.message}")

with tab2:
    col1, col2 = st.columns(2)
    with col1:
        c6_symmetry = st.selectbox("Pair symmetry", ["nsF12", "nsF32"], index=1)
    with col2:
        c6_range = st.slider("n range ", 20, 100, (50, 80))
    if st.button("Scan C6"):
        try:
            frame = cached_c6(c6_symmetry, *c6_range)
            fit = c6_scaling(frame)
            st.metric("Exponent of |C6| in nu", f"{fit['slope']:.2f}")
            fig = px.line(frame.assign(abs_C6=frame["C6_GHz_um6"].abs()), x="nu", y="abs_C6", log_x=True, log_y=True,
                          markers=True, labels={"abs_C6": "|C6| (GHz um^6)"})
            st.plotly_chart(fig, use_container_width=True)
            st.dataframe(frame, use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error scanning C6: {e.message}")

with tab3:
    col1, col2, col3 = st.columns(3)
    with col1:
        pair_symmetry = st.selectbox("Target pair", ["nsF12", "nsF32"], index=1)
        n = st.number_input("n", min_value=20, max_value=120, value=73)
    with col2:
        M = st.number_input("Total projection M", value=3)
        window = st.number_input("Basis window (GHz)", min_value=0.5, value=5.0)
    with col3:
        rmin, rmax = st.slider("Distance (um)", 0.5, 15.0, (1.0, 6.0))
        points = st.number_input("Distance points", min_value=10, max_value=500, value=101)

    if st.button("Diagonalize pair Hamiltonian"):
        try:
            st.session_state.pair_curves = cached_curves(pair_symmetry, int(n), int(M), rmin, rmax, int(points), window)
        except ToolkitError as e:
            st.error(f"Error computing pair curves: {e.message}")

    if st.session_state.pair_curves is not None:
        frame, c6, basis_size = st.session_state.pair_curves
        st.caption(f"{basis_size} pair states, C6 = {c6:.3g} GHz um^6")
        fig = go.Figure()
        for column in [name for name in frame.columns if name.startswith("E")]:
            fig.add_trace(go.Scatter(x=frame["R_um"], y=frame[column], mode="lines",
                                     line={"color": "lightgray"}, showlegend=False))
        fig.add_trace(go.Scatter(x=frame["R_um"], y=frame["tracked_GHz"], mode="lines", name="target"))
        fig.add_trace(go.Scatter(x=frame["R_um"], y=c6 / frame["R_um"] ** 6, mode="lines", name="C6/R^6",
                                 line={"dash": "dash"}))
        fig.update_layout(xaxis_title="R (um)", yaxis_title="Energy (GHz)", yaxis_range=[-1, 1])
        st.plotly_chart(fig, use_container_width=True)
