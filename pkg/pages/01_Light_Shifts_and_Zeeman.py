import streamlit as st
import numpy as np
import pandas as pd
import plotly.express as px

from models.config import RunConfig
from models.states import STATE_PRESETS
from utils.atomic_data import load_atomic_tables
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.polarizability import find_magic_wavelength, polarizability_curve, trap_from_power, wavelength_grid
from utils.zeeman import SPECIES_CONSTANTS, find_magic_field, zeeman_map

# Set page configuration
st.set_page_config(
    page_title="Light Shifts and Zeeman",
    page_icon="🔦",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()
if 'polarizability' not in st.session_state:
    st.session_state.polarizability = None
if 'zeeman' not in st.session_state:
    st.session_state.zeeman = None

config = st.session_state.config


@st.cache_resource
def get_catalog(path):
    return load_atomic_tables(path)


@st.cache_data
def cached_curves(states, lambda_min_nm, lambda_max_nm, points, theta, path):
    catalog = get_catalog(path)
    grid = wavelength_grid(lambda_min_nm * 1e-9, lambda_max_nm * 1e-9, points)
    return [polarizability_curve(STATE_PRESETS[name], grid, catalog, theta).to_frame().assign(state=name)
            for name in states]


@st.cache_data
def cached_zeeman(species, bmax, points):
    return zeeman_map(species, np.linspace(0.0, bmax, points)).to_frame()


st.title("🔦 Light Shifts and Zeeman Structure")
st.markdown("Dynamic polarizability of the trapped and excited states, and hyperfine Zeeman maps")

tab1, tab2, tab3 = st.tabs(["Polarizability", "Trap Depth", "Zeeman Map"])

with tab1:
    col1, col2, col3 = st.columns(3)
    with col1:
        states = st.multiselect("States", list(STATE_PRESETS), default=["g", "e", "p"])
    with col2:
        lambda_min, lambda_max = st.slider("Wavelength (nm)", 300, 2000, (350, 1600))
    with col3:
        points = st.number_input("Grid points", min_value=50, max_value=5000, value=1251)
        theta = st.number_input("Polarization angle (rad)", value=0.0)

    if st.button("Compute polarizability"):
        try:
            frames = cached_curves(tuple(states), lambda_min, lambda_max, int(points), theta, str(config.catalog))
            st.session_state.polarizability = frames
        except ToolkitError as e:
            st.error(f"Error computing polarizability: {e.message}")

    if st.session_state.polarizability:
        frame = pd.concat(st.session_state.polarizability, ignore_index=True)
        fig = px.line(frame, x="lambda_nm", y="alpha_total_au", color="state",
                      labels={"lambda_nm": "Wavelength (nm)", "alpha_total_au": "Polarizability (a.u.)"})
        fig.update_yaxes(range=[-2000, 2000])
        st.plotly_chart(fig, use_container_width=True)
        st.download_button("Download CSV", format_result(frame, anchor="polarizability", config_hash=config.config_hash()),
                           file_name="polarizability.csv", mime="text/csv")

    st.subheader("Magic Wavelength")
    col1, col2, col3 = st.columns(3)
    with col1:
        state_a = st.selectbox("First state", list(STATE_PRESETS), index=0)
    with col2:
        state_b = st.selectbox("Second state", list(STATE_PRESETS), index=4)
    with col3:
        bracket = st.slider("Search bracket (nm)", 900.0, 1200.0, (1015.0, 1029.0))
    if st.button("Find magic wavelength"):
        try:
            magic = find_magic_wavelength(STATE_PRESETS[state_a], STATE_PRESETS[state_b],
                                          (bracket[0] * 1e-9, bracket[1] * 1e-9), get_catalog(str(config.catalog)))
            st.metric("Magic wavelength", f"{magic * 1e9:.3f} nm")
        except ToolkitError as e:
            st.error(f"No magic wavelength: {e.message}")

with tab2:
    col1, col2, col3 = st.columns(3)
    with col1:
        power_mw = st.number_input("Power (mW)", min_value=0.0, value=10.0)
    with col2:
        waist_um = st.number_input("Waist (um)", min_value=0.1, value=1.0)
    with col3:
        trap_nm = st.number_input("Wavelength (nm)", min_value=300.0, value=1150.0)
    try:
        trap = trap_from_power(power_mw * 1e-3, waist_um * 1e-6, trap_nm * 1e-9, STATE_PRESETS["g"],
                               get_catalog(str(config.catalog)))
        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Depth", f"{trap['depth_hz'] * 1e-6:.2f} MHz")
        with col2:
            st.metric("Radial frequency", f"{trap['omega_r'] / (2 * np.pi) * 1e-3:.1f} kHz")
        with col3:
            st.metric("Axial frequency", f"{trap['omega_z'] / (2 * np.pi) * 1e-3:.1f} kHz")
    except ToolkitError as e:
        st.error(f"Error computing trap: {e.message}")

with tab3:
    col1, col2, col3 = st.columns(3)
    with col1:
        species = st.selectbox("Manifold", sorted(SPECIES_CONSTANTS), index=sorted(SPECIES_CONSTANTS).index("he3-2s3S"))
    with col2:
        bmax = st.number_input("Largest field (G)", min_value=1.0, value=1200.0)
    with col3:
        field_points = st.number_input("Field points", min_value=10, max_value=5000, value=601)

    if st.button("Compute Zeeman map"):
        try:
            st.session_state.zeeman = cached_zeeman(species, bmax, int(field_points))
        except ToolkitError as e:
            st.error(f"Error computing Zeeman map: {e.message}")

    if st.session_state.zeeman is not None:
        frame = st.session_state.zeeman
        long_frame = frame.melt(id_vars="B_G", var_name="branch", value_name="E_Hz")
        long_frame["E_GHz"] = long_frame["E_Hz"] * 1e-9
        fig = px.line(long_frame, x="B_G", y="E_GHz", color="branch",
                      labels={"B_G": "Field (G)", "E_GHz": "Energy (GHz)"})
        st.plotly_chart(fig, use_container_width=True)

    if species == "he3-2s3S" and st.button("Find magic field"):
        try:
            result = find_magic_field("F=3/2,mF=-1/2", "F=1/2,mF=-1/2", (700.0, 900.0), species)
            st.metric("Magic field", f"{result['B_G']:.2f} G")
        except ToolkitError as e:
            st.error(f"No magic field: {e.message}")
