import streamlit as st
import numpy as np
import plotly.express as px
import plotly.graph_objects as go

from models.config import RunConfig
from models.results import DriveProtocol
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.motional import anharmonicity_curve, drive_dynamics, perturbative_rabi, pi_pulse, well_potential, well_spectrum

# Set page configuration
st.set_page_config(
    page_title="Motional Qubit",
    page_icon="〰️",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()

config = st.session_state.config


@st.cache_data
def cached_anharmonicity(w0_um):
    return anharmonicity_curve(np.arange(25e3, 650e3, 25e3), w0=w0_um * 1e-6)


@st.cache_data
def cached_drive(depth_khz, w0_um, amplitude_nm, periods):
    spectrum = well_spectrum(depth_khz * 1e3, w0=w0_um * 1e-6)
    protocol = DriveProtocol(amplitude_nm * 1e-9, spectrum.f01, periods / spectrum.f01)
    return drive_dynamics(spectrum, protocol, every=50)


st.title("〰️ Motional Qubit")
st.markdown("Vibrational states of a shallow tweezer used as a qubit, driven by modulating the trap position")

col1, col2, col3 = st.columns(3)
with col1:
    depth_khz = st.number_input("Trap depth (kHz)", min_value=5.0, value=75.0)
with col2:
    w0_um = st.number_input("Waist (um)", min_value=0.3, value=1.0)
with col3:
    amplitude_nm = st.number_input("Modulation amplitude (nm)", min_value=0.1, value=8.5)

tab1, tab2, tab3 = st.tabs(["Bound States", "Anharmonicity", "Drive"])

with tab1:
    try:
        spectrum = well_spectrum(depth_khz * 1e3, w0=w0_um * 1e-6)
        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Bound states", spectrum.n_bound)
        with col2:
            st.metric("f01", f"{spectrum.f01 * 1e-3:.2f} kHz")
        with col3:
            anharmonicity = spectrum.anharmonicity
            st.metric("Anharmonicity", "n/a" if anharmonicity is None else f"{anharmonicity:.3f}")
        x_um = spectrum.x * 1e6
        fig = go.Figure()
        fig.add_trace(go.Scatter(x=x_um, y=well_potential(x_um / w0_um, depth_khz), mode="lines", name="well",
                                 line={"color": "black"}))
        scale = 0.3 * spectrum.f01 * 1e-3 / np.abs(spectrum.wavefunctions).max()
        for level in range(spectrum.n_bound):
            fig.add_trace(go.Scatter(x=x_um, y=spectrum.energies_hz[level] * 1e-3 + scale * spectrum.wavefunctions[level],
                                     mode="lines", name=f"|{level}>"))
        fig.update_layout(xaxis_title="x (um)", yaxis_title="Energy (kHz)")
        st.plotly_chart(fig, use_container_width=True)
    except ToolkitError as e:
        st.error(f"Error solving the well: {e.message}")

with tab2:
    frame = cached_anharmonicity(w0_um)
    fig = px.line(frame, x="depth_kHz", y="anharmonicity", markers=True,
                  labels={"depth_kHz": "Depth (kHz)", "anharmonicity": "(E1-E0)/(E2-E1) - 1"})
    st.plotly_chart(fig, use_container_width=True)

with tab3:
    periods = st.number_input("Drive duration (periods of f01)", min_value=1, max_value=500, value=50)
    if st.button("Run drive"):
        try:
            frame = cached_drive(depth_khz, w0_um, amplitude_nm, periods)
            spectrum = well_spectrum(depth_khz * 1e3, w0=w0_um * 1e-6)
            st.caption(f"Perturbative Rabi frequency {perturbative_rabi(spectrum, amplitude_nm * 1e-9):.0f} Hz")
            fig = px.line(frame, x="t_s", y=["P0", "P1", "P2", "Pleak"], labels={"t_s": "t (s)", "value": "population"})
            st.plotly_chart(fig, use_container_width=True)
            st.download_button("Download CSV", format_result(frame, anchor="driven motional dynamics",
                                                             config_hash=config.config_hash()),
                               file_name="motional_drive.csv", mime="text/csv")
        except ToolkitError as e:
            st.error(f"Error running the drive: {e.message}")
    if st.button("Simulate pi pulse"):
        try:
            result = pi_pulse(well_spectrum(depth_khz * 1e3, w0=w0_um * 1e-6), amplitude_nm * 1e-9)
            col1, col2, col3 = st.columns(3)
            with col1:
                st.metric("Fidelity", f"{result['fidelity']:.5f}")
            with col2:
                st.metric("Rabi frequency", f"{result['rabi_hz']:.0f} Hz")
            with col3:
                st.metric("pi time", f"{result['t_pi_s'] * 1e3:.3f} ms")
        except ToolkitError as e:
            st.error(f"Error simulating the pulse: {e.message}")
