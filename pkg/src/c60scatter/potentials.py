"""Static radial potentials and their composition.

All builders are pure: the same parameters and grid give bit-identical
tables.  Values are potential energies of the scattered electron in
hartree.  The r = 0 entry always stores the analytic limit so the
integrator never sees an evaluated singularity.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GridError, PotentialError
from .grid import RadialGrid

# Default model parameters (bohr / hartree).
ASW_DEPTH = 0.2599
ASW_MEAN_RADIUS = 6.71
ASW_THICKNESS = 2.91
POLARIZABILITY = 850.0
POLARIZATION_CUTOFF = 8.0
JELLIUM_RADIUS = 6.699
JELLIUM_THICKNESS = 2.411
JELLIUM_CHARGE = 240.0

MODEL_TAGS = ("ASW", "ASW-P", "DFT", "DFT-P", "custom")


@dataclass(frozen=True)
class AswParams:
    """Annular square well: depth, mean shell radius, shell thickness."""

    depth: float = ASW_DEPTH
    mean_radius: float = ASW_MEAN_RADIUS
    thickness: float = ASW_THICKNESS

    def __post_init__(self):
        if self.depth <= 0.0:
            raise PotentialError(f"well depth must be positive, got {self.depth}")
        if self.thickness <= 0.0:
            raise PotentialError(f"thickness must be positive, got {self.thickness}")
        if self.inner_edge <= 0.0:
            raise PotentialError(
                f"inner edge r_c - thickness/2 = {self.inner_edge} must be positive"
            )

    @property
    def inner_edge(self) -> float:
        return self.mean_radius - 0.5 * self.thickness

    @property
    def outer_edge(self) -> float:
        return self.mean_radius + 0.5 * self.thickness

    def value(self, r: float) -> float:
        """Pointwise well value; edge points count as inside."""
        return -self.depth if self.inner_edge <= r <= self.outer_edge else 0.0


@dataclass(frozen=True)
class PolarizationParams:
    """Static dipole polarization tail: -alpha / (2 (r^2 + b^2)^2)."""

    polarizability: float = POLARIZABILITY
    cutoff: float = POLARIZATION_CUTOFF

    def __post_init__(self):
        if self.polarizability < 0.0:
            raise PotentialError(f"polarizability must be >= 0, got {self.polarizability}")
        if self.cutoff <= 0.0:
            raise PotentialError(f"cutoff must be positive, got {self.cutoff}")

    def value(self, r: float) -> float:
        return -self.polarizability / (2.0 * (r * r + self.cutoff**2) ** 2)


@dataclass(frozen=True)
class JelliumParams:
    """Positive jellium shell of the sixty smeared C4+ cores."""

    mean_radius: float = JELLIUM_RADIUS
    thickness: float = JELLIUM_THICKNESS
    charge: float = JELLIUM_CHARGE
    pseudo_v0: float = 0.0

    def __post_init__(self):
        if self.inner_edge <= 0.0:
            raise PotentialError(
                f"inner edge R - thickness/2 = {self.inner_edge} must be positive"
            )
        if self.charge < 0.0:
            raise PotentialError(f"shell charge must be >= 0, got {self.charge}")

    @property
    def inner_edge(self) -> float:
        return self.mean_radius - 0.5 * self.thickness

    @property
    def outer_edge(self) -> float:
        return self.mean_radius + 0.5 * self.thickness


@dataclass(frozen=True)
class PotentialTable:
    """A radial potential sampled on a uniform grid.

    The common currency between potential builders, the SCF loop, and the
    scattering engine.  Values are immutable once built.
    """

    grid: RadialGrid
    values: np.ndarray
    model: str = "custom"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise GridError(
                f"table length {vals.shape} does not match grid ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(vals)):
            raise PotentialError("potential table contains non-finite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_model(self, model: str) -> "PotentialTable":
        return PotentialTable(self.grid, self.values, model)

    def dump(self, header_extra: Iterable[str] = ()) -> str:
        """Two-column text (r, V) in atomic units with a '#' header."""
        buf = io.StringIO()
        buf.write(f"# model={self.model}\n")
        buf.write(f"# r_max={self.grid.r_max!r} n_points={self.grid.n_points}\n")
        for line in header_extra:
            buf.write(f"# {line}\n")
        buf.write("# columns: r[bohr] V[hartree]\n")
        for r, v in zip(self.grid.points, self.values):
            buf.write(f"{r:.12e} {v:.12e}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dump())


def load_potential(path) -> PotentialTable:
    """Read a two-column (r, V) text file; the ingestion path for custom models."""
    model = "custom"
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "model=" in line:
                    model = line.split("model=", 1)[1].split()[0]
                continue
            parts = line.split()
            if len(parts) < 2:
                raise PotentialError(f"malformed potential line: {line!r}")
            rows.append((float(parts[0]), float(parts[1])))
    if len(rows) < 16:
        raise PotentialError(f"potential file {path} has too few rows ({len(rows)})")
    r = np.array([p[0] for p in rows])
    v = np.array([p[1] for p in rows])
    h = r[1] - r[0]
    if r[0] != 0.0 or not np.allclose(np.diff(r), h, rtol=0, atol=1e-10 * max(h, 1.0)):
        raise PotentialError("potential file must be sampled on a uniform grid from r=0")
    grid = RadialGrid(r_max=float(r[-1]), n_points=len(r))
    return PotentialTable(grid, v, model)


def build_asw(params: AswParams, grid: RadialGrid) -> PotentialTable:
    """Tabulate the annular square well; grid points on an edge take the inside value."""
    r = grid.points
    inside = (r >= params.inner_edge) & (r <= params.outer_edge)
    if int(inside.sum()) < 20:
        raise GridError(
            f"grid too coarse: only {int(inside.sum())} points inside the shell "
            f"[{params.inner_edge}, {params.outer_edge}]"
        )
    v = np.where(inside, -params.depth, 0.0)
    return PotentialTable(grid, v, "ASW")


def build_polarization(params: PolarizationParams, grid: RadialGrid) -> PotentialTable:
    r = grid.points
    v = -params.polarizability / (2.0 * (r * r + params.cutoff**2) ** 2)
    return PotentialTable(grid, v, "custom")


def shell_coulomb_value(charge: float, a: float, b: float, r: float) -> float:
    """Electron potential energy in the field of a uniform positive shell a<=r<=b.

    Piecewise solution of Poisson's equation: constant inside the cavity,
    -Q/r outside, continuous and once-differentiable at both edges.
    """
    if not 0.0 < a < b:
        raise PotentialError(f"shell edges must satisfy 0 < a < b, got a={a}, b={b}")
    if charge < 0.0:
        raise PotentialError(f"shell charge must be >= 0, got {charge}")
    denom = b**3 - a**3
    if r <= a:
        return -1.5 * charge * (b * b - a * a) / denom
    if r >= b:
        return -charge / r
    q_enc = charge * (r**3 - a**3) / denom
    outer = 1.5 * charge * (b * b - r * r) / denom
    return -(q_enc / r + outer)


def shell_coulomb(charge: float, a: float, b: float, grid: RadialGrid) -> PotentialTable:
    """Tabulated uniform-shell Coulomb attraction (see shell_coulomb_value)."""
    if not 0.0 < a < b:
        raise PotentialError(f"shell edges must satisfy 0 < a < b, got a={a}, b={b}")
    if charge < 0.0:
        raise PotentialError(f"shell charge must be >= 0, got {charge}")
    r = grid.points
    denom = b**3 - a**3
    cavity = -1.5 * charge * (b * b - a * a) / denom
    v = np.empty_like(r)
    v[r <= a] = cavity
    mid = (r > a) & (r < b)
    rm = r[mid]
    v[mid] = -(charge * (rm**3 - a**3) / denom / rm + 1.5 * charge * (b * b - rm * rm) / denom)
    out = r >= b
    v[out] = -charge / r[out]
    return PotentialTable(grid, v, "custom")


def jellium_potential(params: JelliumParams, grid: RadialGrid) -> PotentialTable:
    """Bare jellium shell attraction (no pseudo-potential constant)."""
    return shell_coulomb(params.charge, params.inner_edge, params.outer_edge, grid)


def shell_indicator(params: JelliumParams, grid: RadialGrid) -> np.ndarray:
    """1 on the jellium shell support, 0 elsewhere (edges count as inside)."""
    r = grid.points
    return ((r >= params.inner_edge) & (r <= params.outer_edge)).astype(float)


_COMPOSED_TAG = {"ASW": "ASW-P", "DFT": "DFT-P"}


def compose_effective(
    base: PotentialTable,
    pol: PotentialTable | None = None,
    pseudo: tuple[float, JelliumParams] | None = None,
) -> PotentialTable:
    """Pointwise sum of the base potential, an optional polarization table,
    and an optional constant pseudo-potential on the jellium shell support.

    The model tag is advanced (ASW -> ASW-P, DFT -> DFT-P) when a
    polarization term is added.
    """
    v = base.values.copy()
    tag = base.model
    if pol is not None:
        if pol.grid != base.grid:
            raise GridError("cannot compose potentials on different grids")
        v = v + pol.values
        tag = _COMPOSED_TAG.get(base.model, "custom")
    if pseudo is not None:
        v0, jel = pseudo
        v = v + v0 * shell_indicator(jel, base.grid)
    return PotentialTable(base.grid, v, tag)
