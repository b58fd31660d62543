import streamlit as st
import numpy as np
import plotly.express as px

from models.config import RunConfig
from models.trap import DoubleWellSpec, TrapGeometry
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.trap import aux_sweep_check, dressed_op_ratio, fom_curve
from utils.tunneling import j_map, lowest_eigenpairs

# Set page configuration
st.set_page_config(
    page_title="Trapping and Tunneling",
    page_icon="🪤",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()
if 'j_map' not in st.session_state:
    st.session_state.j_map = None

config = st.session_state.config
GRIDS = {"coarse": (81, 49, 49), "standard": (161, 97, 97)}


@st.cache_data
def cached_fom(depth_min_mhz, depth_max_mhz, points, w0_um, trap_nm):
    depths = np.linspace(depth_min_mhz, depth_max_mhz, points) * 1e6
    return fom_curve(depths, w0=w0_um * 1e-6, trap_wavelength=trap_nm * 1e-9)


@st.cache_data
def cached_j_map(trap_nm, na, depths, ratios, grid):
    spec = DoubleWellSpec(wavelength=trap_nm * 1e-9, na=na, grid=grid)
    return j_map(spec, np.array(depths), np.array(ratios) * spec.w0)


st.title("🪤 Trapping and Tunneling")
st.markdown("Cooling figures of merit in a tweezer and tunneling between neighbouring tweezers")

tab1, tab2, tab3 = st.tabs(["Sideband Cooling", "Dressed Optical Pumping", "Tunneling"])

with tab1:
    col1, col2, col3 = st.columns(3)
    with col1:
        depth_min, depth_max = st.slider("Depth (MHz)", 1, 2000, (10, 1000))
    with col2:
        w0_um = st.number_input("Waist (um)", min_value=0.3, value=1.0)
    with col3:
        trap_nm = st.number_input("Trap wavelength (nm)", min_value=300.0, value=1150.0)
    try:
        frame = cached_fom(depth_min, depth_max, 100, w0_um, trap_nm)
        fig = px.line(frame, x="depth_MHz", y=["fom", "fom_radial"],
                      labels={"depth_MHz": "Depth (MHz)", "value": "Figure of merit"})
        st.plotly_chart(fig, use_container_width=True)
        fig = px.line(frame, x="depth_MHz", y="R_sc", labels={"depth_MHz": "Depth (MHz)", "R_sc": "Trap scattering (1/s)"})
        st.plotly_chart(fig, use_container_width=True)
        st.download_button("Download CSV", format_result(frame, anchor="ground-state figure of merit",
                                                         config_hash=config.config_hash()),
                           file_name="rsc_fom.csv", mime="text/csv")
    except ToolkitError as e:
        st.error(f"Error computing figure of merit: {e.message}")

with tab2:
    col1, col2, col3 = st.columns(3)
    with col1:
        ratio = st.number_input("alpha_e / alpha_g", value=-0.04)
    with col2:
        rabi_mhz = st.number_input("Rabi frequency (MHz)", min_value=0.01, value=5.0)
    with col3:
        trap_depth_mhz = st.number_input("Trap depth (MHz, 0 for none)", min_value=0.0, value=0.0)
    deltas = np.linspace(-50e6, 50e6, 201)
    deltas = deltas[deltas != 0]
    trap = TrapGeometry(trap_depth_mhz * 1e6, 1e-6, 1150e-9) if trap_depth_mhz > 0 else None
    try:
        frame = dressed_op_ratio(ratio, deltas, rabi_mhz * 1e6, trap=trap)
        fig = px.line(frame.replace(np.inf, np.nan), x="delta_MHz", y="ratio", log_y=True,
                      labels={"delta_MHz": "Detuning (MHz)", "ratio": "good / bad decays"})
        st.plotly_chart(fig, use_container_width=True)
    except ToolkitError as e:
        st.error(f"Error computing dressed pumping: {e.message}")

with tab3:
    col1, col2, col3 = st.columns(3)
    with col1:
        tunnel_nm = st.number_input("Tweezer wavelength (nm)", min_value=300.0, value=1013.0)
        na = st.number_input("Numerical aperture", min_value=0.1, max_value=0.95, value=0.7)
    with col2:
        v0 = st.number_input("Depth (E_R)", min_value=0.5, value=6.0)
        separation_um = st.number_input("Separation (um)", min_value=0.0, value=1.2)
    with col3:
        grid_name = st.selectbox("Grid", list(GRIDS))
        sweep_rate = st.number_input("Auxiliary sweep rate (Hz/s)", min_value=1.0, value=1e6, format="%e")

    if st.button("Solve double well"):
        try:
            spec = DoubleWellSpec(wavelength=tunnel_nm * 1e-9, depth_er=v0, separation=separation_um * 1e-6, na=na,
                                  grid=GRIDS[grid_name])
            result = lowest_eigenpairs(spec, k=2)
            if result.merged:
                st.warning("Barrier lies below the first excited state: the wells have merged")
            else:
                st.metric("Tunneling J", f"{result.tunneling_hz:.1f} Hz")
                check = aux_sweep_check(result.tunneling_hz, sweep_rate)
                st.json(check)
        except ToolkitError as e:
            st.error(f"Error solving double well: {e.message}")

    st.subheader("J map")
    depths = st.multiselect("Depths (E_R)", [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0], default=[4.0, 6.0, 8.0, 10.0])
    ratios = st.multiselect("Separations (w0)", [1.0, 1.2, 1.3, 1.4, 1.6], default=[1.3, 1.4])
    if st.button("Compute J map"):
        try:
            st.session_state.j_map = cached_j_map(tunnel_nm, na, tuple(sorted(depths)), tuple(sorted(ratios)),
                                                  GRIDS[grid_name])
        except ToolkitError as e:
            st.error(f"Error computing J map: {e.message}")

    if st.session_state.j_map is not None:
        frame = st.session_state.j_map
        fig = px.line(frame, x="V0_ER", y="J_Hz", color="d_over_w0", log_y=True, markers=True,
                      labels={"V0_ER": "Depth (E_R)", "J_Hz": "J (Hz)", "d_over_w0": "d / w0"})
        st.plotly_chart(fig, use_container_width=True)
        st.dataframe(frame, use_container_width=True)
