import streamlit as st
import numpy as np
import plotly.express as px

from models.config import RunConfig
from models.raman import POLARIZATIONS
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.raman import (
    RAMAN_PRESETS,
    SCAN_WINDOWS,
    beta_asymptote,
    beta_scan,
    preset_configuration,
    raman_table1,
    raman_table2,
    zero_field_table_frame,
)

# Set page configuration
st.set_page_config(
    page_title="Raman Gates",
    page_icon="🌈",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()
if 'beta_scan' not in st.session_state:
    st.session_state.beta_scan = None

config = st.session_state.config


@st.cache_data
def cached_scan(species, B, delta_min_ghz, delta_max_ghz, points, polarizations):
    raman = preset_configuration(species, B=B, polarizations=polarizations)
    scan = beta_scan(raman, deltas=np.linspace(delta_min_ghz * 1e9, delta_max_ghz * 1e9, points))
    return scan.to_frame(), scan.maxima, beta_asymptote(raman)["beta"]


@st.cache_data
def cached_table1(points):
    return raman_table1(points=points)


@st.cache_data
def cached_table2(B, points):
    return raman_table2(B=B, points=points)


st.title("🌈 Raman Gates")
st.markdown("Ratio |beta| of Raman Rabi frequency to inelastic scattering and the resulting gate fidelity limit")

tab1, tab2 = st.tabs(["Detuning Scan", "Comparison Tables"])

with tab1:
    col1, col2, col3 = st.columns(3)
    with col1:
        species = st.selectbox("Species", sorted(RAMAN_PRESETS), index=sorted(RAMAN_PRESETS).index("he3"))
        B = st.number_input("Field (G)", min_value=0.0, value=800.0)
    with col2:
        lo, hi = SCAN_WINDOWS[species]
        delta_min = st.number_input("Lowest detuning (GHz)", value=lo * 1e-9)
        delta_max = st.number_input("Highest detuning (GHz)", value=hi * 1e-9)
    with col3:
        default = RAMAN_PRESETS[species]["polarizations"]
        pol_1 = st.selectbox("Beam 1", list(POLARIZATIONS), index=list(POLARIZATIONS).index(default[0]))
        pol_2 = st.selectbox("Beam 2", list(POLARIZATIONS), index=list(POLARIZATIONS).index(default[1]))
        points = st.number_input("Grid points", min_value=20, max_value=5000, value=600)

    if st.button("Scan detuning"):
        try:
            st.session_state.beta_scan = cached_scan(species, B, delta_min, delta_max, int(points), (pol_1, pol_2))
        except ToolkitError as e:
            st.error(f"Error scanning |beta|: {e.message}")

    if st.session_state.beta_scan is not None:
        frame, maxima, asymptote = st.session_state.beta_scan
        col1, col2 = st.columns(2)
        with col1:
            if maxima:
                delta, beta = max(maxima, key=lambda item: item[1])
                st.metric("Best |beta|", f"{beta:.0f}", f"at {delta * 1e-9:.2f} GHz")
            else:
                st.metric("Best |beta|", "no interior maximum")
        with col2:
            st.metric("Far-detuned |beta|", f"{asymptote:.0f}")
        fig = px.line(frame, x="Delta_GHz", y="beta", log_y=True,
                      labels={"Delta_GHz": "Detuning (GHz)", "beta": "|beta|"})
        st.plotly_chart(fig, use_container_width=True)
        st.download_button("Download CSV", format_result(frame, anchor="Raman |beta| scan", config_hash=config.config_hash()),
                           file_name="raman_beta.csv", mime="text/csv")

with tab2:
    st.subheader("Optimal and far-detuned |beta|")
    table_points = st.number_input("Scan points per species", min_value=50, max_value=2000, value=400)
    if st.button("Compute comparison table"):
        try:
            st.dataframe(cached_table1(int(table_points)), use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error computing table: {e.message}")

    st.subheader("He-3 maxima by polarization")
    if st.button("Compute polarization table"):
        try:
            st.dataframe(cached_table2(800.0, 1101), use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error computing table: {e.message}")

    st.subheader("Zero-field couplings")
    col1, col2 = st.columns(2)
    for column, name in zip((col1, col2), ("na23", "yb171")):
        with column:
            st.markdown(f"**{name}**")
            st.dataframe(zero_field_table_frame(name), use_container_width=True)
