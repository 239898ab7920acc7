"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes; library users can catch the
base class or the specific failure they care about.
"""


class C60ScatterError(Exception):
    """Base class for all package errors."""


class GridError(C60ScatterError):
    """Invalid radial grid or grid mismatch between tables."""


class PotentialError(C60ScatterError):
    """Invalid potential parameters or malformed potential file."""


class IntegrationError(C60ScatterError):
    """Radial integration failed (NaN/overflow despite renormalization)."""

    def __init__(self, message: str, ell: int | None = None, energy: float | None = None):
        if ell is not None or energy is not None:
            message = f"{message} (l={ell}, E={energy})"
        super().__init__(message)
        self.ell = ell
        self.energy = energy


class ExtractionError(IntegrationError):
    """Phase-shift extraction failed for every candidate matching pair."""


class BoundStateNotFound(C60ScatterError):
    """No bound state with the requested (l, node count) in the window.

    Distinct from IntegrationError: the search ran fine, the state simply
    does not exist where it was looked for.
    """


class ScfError(C60ScatterError):
    """Hard SCF failure (an orbital required by the filling is missing)."""


class FitError(C60ScatterError):
    """Nonlinear fit failed structurally (singular normal equations)."""


class ConfigError(C60ScatterError):
    """Bad run configuration or malformed/tampered input file."""
