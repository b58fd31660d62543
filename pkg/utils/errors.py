"""
Exception types shared by the computation modules.

Each error carries a short machine-readable ``code`` so the CLI can print a
single ``code=<name> msg=<text>`` line and the Streamlit pages can show the
message unchanged.
"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""

    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self):
        return {"code": self.code, "message": self.message, **self.context}


class CatalogError(ToolkitError):
    """Malformed or inconsistent atomic table data"""

    code = "catalog"


class DomainError(ToolkitError):
    """Input outside the domain of an operation"""

    code = "domain"


class ResonanceError(DomainError):
    """Frequency or detuning inside a resonance exclusion window"""

    code = "resonance"


class NoRootError(ToolkitError):
    """No sign change or stationary point inside the bracket"""

    code = "no_root"


class ConvergenceError(ToolkitError):
    code = "convergence"


class RegimeError(ToolkitError):
    """Physical regime of the model is lost (merged wells, Lamb-Dicke breakdown)"""

    code = "regime"


class ConfigError(ToolkitError):
    code = "config"
