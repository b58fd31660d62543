import streamlit as st
import plotly.express as px

from models.config import RunConfig
from utils.data_processing import format_result
from utils.errors import ToolkitError
from utils.fermion import (
    build_model,
    parse_model_text,
    spinful_encoding_check,
    trotter_error_scaling,
    trotter_evolve,
    vqe_minimize,
)

# Set page configuration
st.set_page_config(
    page_title="Fermionic Gates",
    page_icon="🧮",
    layout="wide"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()
if 'trotter' not in st.session_state:
    st.session_state.trotter = None

config = st.session_state.config
MODEL_NAMES = {"fh": "Fermi-Hubbard", "tt": "t-t' Hubbard", "mfh": "multiband Hubbard", "pam": "periodic Anderson"}


def current_model():
    if model_text.strip():
        kind, params = parse_model_text(model_text)
        return build_model(kind, **params)
    params = {"sites": sites, "t": t, "U": U}
    if kind_choice == "tt":
        params["t_prime"] = t_prime
    return build_model(kind_choice, **params)


st.title("🧮 Fermionic Gates")
st.markdown("Fermionic tunneling and interaction gates, Trotterized Hubbard dynamics and variational ground states")

with st.sidebar:
    st.subheader("Model")
    kind_choice = st.selectbox("Model", ["fh", "tt"], format_func=MODEL_NAMES.get)
    sites = st.number_input("Sites", min_value=1, max_value=7, value=4)
    t = st.number_input("Tunneling t", value=1.0)
    U = st.number_input("Interaction U", value=4.0)
    t_prime = st.number_input("Next-nearest tunneling t'", value=-0.3) if kind_choice == "tt" else 0.0
    model_text = st.text_area("Or a model description", "", help="key = value lines, 'edge i j [t]' and 'nnn i j'")

tab1, tab2, tab3 = st.tabs(["Trotter Evolution", "Error Scaling", "Variational Ground State"])

with tab1:
    col1, col2 = st.columns(2)
    with col1:
        tau = st.number_input("Evolution time", min_value=0.01, value=2.0)
    with col2:
        steps = st.number_input("Trotter steps", min_value=1, max_value=2000, value=64)
    if st.button("Evolve"):
        try:
            st.session_state.trotter = trotter_evolve(current_model(), tau, int(steps))
        except ToolkitError as e:
            st.error(f"Error running Trotter evolution: {e.message}")

    if st.session_state.trotter is not None:
        run = st.session_state.trotter
        counts = run["counts"]
        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Gates per step", counts["gates_per_step"])
        with col2:
            st.metric("Rearrangements per step", counts["rearrangements_per_step"])
        with col3:
            st.metric("Final error", f"{run['frame']['err_norm'].iloc[-1]:.2e}")
        fig = px.line(run["frame"], x="t", y="err_norm", labels={"err_norm": "|psi_trotter - psi_exact|"})
        st.plotly_chart(fig, use_container_width=True)
        st.download_button("Download CSV", format_result(run["frame"], anchor="Trotterized evolution",
                                                         config_hash=config.config_hash(), notes=counts),
                           file_name="fermi_trotter.csv", mime="text/csv")

    if st.button("Check spin-in-trap-location encoding"):
        try:
            check = spinful_encoding_check(sites=min(int(sites), 4), t=t, U=U)
            st.metric("Largest state difference", f"{check['max_difference']:.2e}")
        except ToolkitError as e:
            st.error(f"Error checking the encoding: {e.message}")

with tab2:
    scaling_tau = st.number_input("Evolution time ", min_value=0.01, value=2.0)
    if st.button("Measure error scaling"):
        try:
            frame, fit = trotter_error_scaling(current_model(), scaling_tau)
            st.metric("Error exponent in 1/N", f"{fit['slope']:.3f}")
            fig = px.line(frame, x="steps", y="err_norm", log_x=True, log_y=True, markers=True)
            st.plotly_chart(fig, use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error measuring scaling: {e.message}")

with tab3:
    col1, col2 = st.columns(2)
    with col1:
        layers = st.number_input("Ansatz layers", min_value=0, max_value=6, value=2)
    with col2:
        restarts = st.number_input("Restarts", min_value=1, max_value=16, value=4)
    if st.button("Minimize"):
        try:
            result = vqe_minimize(current_model(), layers=int(layers), restarts=int(restarts), seed=config.seed)
            col1, col2, col3 = st.columns(3)
            with col1:
                st.metric("Variational energy", f"{result['energy']:.6f}")
            with col2:
                st.metric("Exact energy", f"{result['exact']:.6f}")
            with col3:
                st.metric("Gap", f"{result['gap']:.2e}")
            if result["stagnated"]:
                st.warning("Every restart hit the evaluation budget before converging")
            fig = px.line(result["trace"], x="evaluation", y="best", color="restart",
                          labels={"best": "best energy so far"})
            st.plotly_chart(fig, use_container_width=True)
        except ToolkitError as e:
            st.error(f"Error minimizing: {e.message}")
