import streamlit as st
import pandas as pd

from models.config import RunConfig
from utils.atomic_data import catalog_to_frame, load_atomic_tables
from utils.errors import ToolkitError

# Set page configuration
st.set_page_config(
    page_title="He-3 Tweezer Array Toolkit",
    page_icon="⚛️",
    layout="wide",
    initial_sidebar_state="expanded"
)

if 'config' not in st.session_state:
    st.session_state.config = RunConfig.build()


@st.cache_resource
def get_catalog(path):
    return load_atomic_tables(path)


# Main page header
st.title("⚛️ He-3 Tweezer Array Toolkit")
st.markdown("""
Numerical explorer for metastable helium-3 in optical tweezers: trap light shifts, hyperfine
Zeeman structure, Raman gate limits, Rydberg interactions, tunneling, motional qubits and
fermionic gate circuits.

Use the sidebar navigation to open each calculation. The same computations are available
from the command line as `he3-toolkit <command>`.
""")

config = st.session_state.config

st.subheader("Atomic Data")
try:
    catalog = get_catalog(str(config.catalog))
    frame = catalog_to_frame(catalog)
    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Levels", int((frame["kind"] == "level").sum()))
    with col2:
        st.metric("Lines", int((frame["kind"] == "line").sum()))
    with col3:
        st.metric("Seed", config.seed)
    with st.expander("Catalog table"):
        st.dataframe(frame, use_container_width=True)
except ToolkitError as e:
    st.error(f"Error loading atomic data: {e.message}")

st.subheader("Run Configuration")
st.caption(f"Config hash `{config.config_hash()}`")
uploaded = st.file_uploader("Load a key = value config file", type=["cfg", "txt", "ini"])
if uploaded is not None:
    try:
        st.session_state.config = RunConfig.from_text(uploaded.getvalue().decode("utf-8"))
        st.success("Configuration loaded")
        st.rerun()
    except ToolkitError as e:
        st.error(f"Invalid configuration: {e.message}")
st.json(config.to_dict())

# Quick actions section
st.subheader("Calculations")

pages = pd.DataFrame([
    ("Light Shifts and Zeeman", "pages/01_Light_Shifts_and_Zeeman.py", "polarizability, magic wavelength, Breit-Rabi maps"),
    ("Raman Gates", "pages/02_Raman_Gates.py", "|beta| scans and comparison tables"),
    ("Rydberg Interactions", "pages/03_Rydberg_Interactions.py", "MQDT levels, Lu-Fano data, C6 and pair curves"),
    ("Trapping and Tunneling", "pages/04_Trapping_and_Tunneling.py", "cooling figure of merit, dressed pumping, J maps"),
    ("Motional Qubit", "pages/05_Motional_Qubit.py", "anharmonicity and driven pi pulses"),
    ("Fermionic Gates", "pages/06_Fermionic_Gates.py", "Trotter circuits and variational ground states"),
], columns=["name", "page", "contents"])

cols = st.columns(3)
for index, row in pages.iterrows():
    with cols[index % 3]:
        st.markdown(f"### {row['name']}")
        st.markdown(row["contents"])
        if st.button(f"Open {row['name']}"):
            st.switch_page(row["page"])

# Footer
st.markdown("---")
