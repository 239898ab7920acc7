"""Partial-wave toolkit for low-energy elastic electron scattering off C60.

Four interaction models are supported: an annular square well (ASW), the
same well with a static dipole polarization tail (ASW-P), a self-consistent
jellium-shell LDA potential (DFT), and its polarized variant (DFT-P).  The
package computes phase shifts, partial/total cross-sections, Wigner-type
time delays, and Fano resonance parameters, and ships a CLI that runs the
full pipeline from a single config file.
"""

__version__ = "0.1.0"

from .grid import RadialGrid
from .potentials import (
    AswParams,
    JelliumParams,
    PolarizationParams,
    PotentialTable,
    build_asw,
    build_polarization,
    compose_effective,
    shell_coulomb,
)
from .scattering import ScatterConfig, PhaseShiftScan, CrossSections, scan, cross_sections
from .delays import TimeDelayCurve, ews_delay, average_delay, threshold_fit
from .fano import FanoFit, ResonanceCandidate, detect, fano_eval, fano_fit

__all__ = [
    "RadialGrid",
    "AswParams",
    "PolarizationParams",
    "JelliumParams",
    "PotentialTable",
    "build_asw",
    "build_polarization",
    "shell_coulomb",
    "compose_effective",
    "ScatterConfig",
    "PhaseShiftScan",
    "CrossSections",
    "scan",
    "cross_sections",
    "TimeDelayCurve",
    "ews_delay",
    "average_delay",
    "threshold_fit",
    "FanoFit",
    "ResonanceCandidate",
    "detect",
    "fano_eval",
    "fano_fit",
    "__version__",
]
