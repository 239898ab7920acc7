"""Continuum solutions, phase shifts, and elastic cross-sections.

The radial equation is integrated outward with Numerov's method, the
solution is continued with V = 0 past the table's r_max, and the phase
shift is extracted from two sample points r1 < r2 beyond r_max:

    tan d_l = [z j_l(k r1) - j_l(k r2)] / [z y_l(k r1) - y_l(k r2)],
    z = r1 u(r2) / (r2 u(r1)).

The implementation clears both denominators (multiplies through by
r2 u(r1)) so a node at one sample point cannot overflow, and keeps the
atan2 quadrant before reducing modulo pi.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import numerov
from .bessel import spherical_jn, spherical_yn
from .errors import ExtractionError, GridError, IntegrationError
from .potentials import PotentialTable

PI = math.pi
DEFAULT_LMAX = 15
DEFAULT_N_ENERGIES = 2000
DEFAULT_E_MAX = 0.5
DEFAULT_MATCH_GAP = 0.5  # r2 - r1 in bohr


@dataclass(frozen=True)
class ScatterConfig:
    """Energy window, partial-wave count, and matching radii for a scan."""

    lmax: int = DEFAULT_LMAX
    e_max: float = DEFAULT_E_MAX
    n_energies: int = DEFAULT_N_ENERGIES
    energies: tuple[float, ...] | None = None  # overrides (e_max, n_energies)
    r1: float | None = None  # default: r_max of the potential grid
    r2: float | None = None  # default: r1 + 0.5
    refine: bool = True
    refine_threshold: float = PI / 4.0
    max_refine_levels: int = 10

    def __post_init__(self):
        if self.lmax < 0:
            raise GridError(f"lmax must be >= 0, got {self.lmax}")
        if self.energies is None:
            if self.e_max <= 0.0 or self.n_energies < 2:
                raise GridError("need e_max > 0 and at least 2 energies")
        else:
            e = np.asarray(self.energies, dtype=float)
            if len(e) < 1 or np.any(e <= 0.0):
                raise GridError("explicit energy list must be positive")

    def energy_grid(self) -> np.ndarray:
        if self.energies is not None:
            return np.sort(np.asarray(self.energies, dtype=float))
        n = self.n_energies
        return self.e_max * np.arange(1, n + 1) / n


@dataclass(frozen=True)
class ContinuumSolution:
    """Radial solution u_l(r;E) on the (extended) grid, u(0) = 0."""

    ell: int
    energy: float
    k: float
    r: np.ndarray
    u: np.ndarray
    source: PotentialTable

    def u_at(self, radius: float) -> float:
        h = self.r[1] - self.r[0]
        idx = int(round(radius / h))
        if not 0 <= idx < len(self.u):
            raise ExtractionError(
                f"radius {radius} outside integrated range", self.ell, self.energy
            )
        return float(self.u[idx])


@dataclass(frozen=True)
class PhaseShiftScan:
    """Unwrapped phase shifts d_l(E_j) on a shared energy grid."""

    energies: np.ndarray
    k: np.ndarray
    deltas: np.ndarray  # shape (lmax+1, nE), radians, continuous per l
    model: str
    r1: float
    r2: float
    refine_levels: int = 0

    @property
    def lmax(self) -> int:
        return self.deltas.shape[0] - 1

    def dump(self) -> str:
        buf = io.StringIO()
        buf.write(f"# model={self.model} r1={self.r1!r} r2={self.r2!r}\n")
        buf.write(f"# refine_levels={self.refine_levels}\n")
        cols = " ".join(f"delta_{l}" for l in range(self.lmax + 1))
        buf.write(f"# columns: E[hartree] k[1/bohr] {cols}\n")
        for j in range(len(self.energies)):
            row = " ".join(f"{self.deltas[l, j]:.12e}" for l in range(self.lmax + 1))
            buf.write(f"{self.energies[j]:.12e} {self.k[j]:.12e} {row}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dump())


@dataclass(frozen=True)
class CrossSections:
    """Partial and total elastic cross-sections in bohr^2."""

    energies: np.ndarray
    k: np.ndarray
    partial: np.ndarray  # shape (lmax+1, nE)
    total: np.ndarray
    model: str

    @property
    def lmax(self) -> int:
        return self.partial.shape[0] - 1

    def dump(self) -> str:
        buf = io.StringIO()
        buf.write(f"# model={self.model}\n")
        cols = " ".join(f"sigma_{l}" for l in range(self.lmax + 1))
        buf.write(f"# columns: E[hartree] {cols} sigma_total [bohr^2]\n")
        for j in range(len(self.energies)):
            row = " ".join(f"{self.partial[l, j]:.12e}" for l in range(self.lmax + 1))
            buf.write(f"{self.energies[j]:.12e} {row} {self.total[j]:.12e}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dump())


# ---------------------------------------------------------------------------
# single-energy integration
# ---------------------------------------------------------------------------


def _extended_potential(table: PotentialTable, r_stop: float) -> tuple[np.ndarray, float]:
    """Table values continued with V = 0 up to at least r_stop."""
    h = table.grid.h
    n_needed = int(math.ceil(r_stop / h)) + 2
    n_table = table.grid.n_points
    if n_needed <= n_table:
        return table.values, h
    v_ext = np.zeros(n_needed)
    v_ext[:n_table] = table.values
    return v_ext, h


def numerov_integrate(
    table: PotentialTable, ell: int, energy: float, r_stop: float | None = None
) -> ContinuumSolution:
    """Outward Numerov solution at one (l, E), continued past r_max.

    Starts from u(0) = 0 with the r^(l+1) indicial behavior (correct for
    any potential finite at the origin; the centrifugal term dominates).
    """
    if energy <= 0.0:
        raise IntegrationError("continuum integration requires E > 0", ell, energy)
    if r_stop is None:
        r_stop = table.grid.r_max + 2.0 * DEFAULT_MATCH_GAP
    v_ext, h = _extended_potential(table, r_stop)
    n = len(v_ext)
    _, _, full = numerov.outward(
        v_ext, h, ell, np.array([energy]), record_at=np.array([n - 1]), keep_full=True
    )
    u = full[:, 0]
    scale = np.max(np.abs(u))
    if scale > 0:
        u = u / scale
    r = np.arange(n) * h
    k = math.sqrt(2.0 * energy)
    return ContinuumSolution(ell, energy, k, r, u, table)


# ---------------------------------------------------------------------------
# phase-shift extraction
# ---------------------------------------------------------------------------


def _reduce_mod_pi(delta):
    """Reduce to the representative in (-pi/2, pi/2]."""
    out = delta - PI * np.round(np.asarray(delta, dtype=float) / PI)
    out = np.where(out <= -PI / 2, out + PI, out)
    out = np.where(out > PI / 2, out - PI, out)
    return out


def _delta_from_samples(ell, k, r1, r2, u1, u2):
    """Denominator-cleared Eq.-(8) extraction; returns delta mod pi."""
    j1 = spherical_jn(ell, k * r1)
    j2 = spherical_jn(ell, k * r2)
    y1 = spherical_yn(ell, k * r1)
    y2 = spherical_yn(ell, k * r2)
    num = r1 * u2 * j1 - r2 * u1 * j2
    den = r1 * u2 * y1 - r2 * u1 * y2
    return _reduce_mod_pi(np.arctan2(num, den))


def extract_phase_shift(
    sol: ContinuumSolution,
    r1: float,
    r2: float,
    node_tolerance: float = 1e-9,
) -> float:
    """Phase shift (mod pi) from two sample radii beyond the potential range.

    If a sample sits on a node of u (relative amplitude below
    node_tolerance), both radii are shifted outward by a quarter local
    wavelength and the extraction is retried once; failure of both pairs
    raises ExtractionError.
    """
    r_max = sol.source.grid.r_max
    if not (r2 > r1 >= r_max - 1e-9):
        raise ExtractionError(
            f"matching radii must satisfy r2 > r1 >= r_max={r_max}", sol.ell, sol.energy
        )

    def attempt(s: ContinuumSolution, ra: float, rb: float) -> float | None:
        ua, ub = s.u_at(ra), s.u_at(rb)
        amp = np.max(np.abs(s.u[int(len(s.u) * 0.8):]))
        if abs(ua) < node_tolerance * amp or abs(ub) < node_tolerance * amp:
            return None
        return float(_delta_from_samples(s.ell, s.k, ra, rb, ua, ub))

    value = attempt(sol, r1, r2)
    if value is not None:
        return value
    shift = PI / (2.0 * sol.k)  # quarter wavelength
    r1b, r2b = r1 + shift, r2 + shift
    solb = sol
    if r2b > sol.r[-1]:
        solb = numerov_integrate(sol.source, sol.ell, sol.energy, r_stop=r2b + shift)
    value = attempt(solb, r1b, r2b)
    if value is None:
        raise ExtractionError(
            "both matching-point pairs are ill-conditioned", sol.ell, sol.energy
        )
    return value


# ---------------------------------------------------------------------------
# scans over (l, E)
# ---------------------------------------------------------------------------


def _matching_indices(table: PotentialTable, config: ScatterConfig) -> tuple[int, int]:
    h = table.grid.h
    r_max = table.grid.r_max
    r1 = config.r1 if config.r1 is not None else r_max
    r2 = config.r2 if config.r2 is not None else r1 + DEFAULT_MATCH_GAP
    i1 = int(round(r1 / h))
    i2 = int(round(r2 / h))
    if i2 <= i1:
        i2 = i1 + 1
    if i1 * h < r_max - h / 2:
        raise GridError(f"r1={r1} must lie at or beyond the grid r_max={r_max}")
    return i1, i2


def _raw_deltas(
    table: PotentialTable, ell: int, energies: np.ndarray, i1: int, i2: int
) -> np.ndarray:
    """Batched mod-pi phase shifts for one partial wave."""
    h = table.grid.h
    v_ext, _ = _extended_potential(table, (i2 + 2) * h)
    rec, _, _ = numerov.outward(v_ext, h, ell, energies, record_at=np.array([i1, i2]))
    u1, u2 = rec[0], rec[1]
    k = np.sqrt(2.0 * energies)
    r1, r2 = i1 * h, i2 * h
    deltas = _delta_from_samples(ell, k, r1, r2, u1, u2)

    # a node exactly at a sample point is harmless for the cleared formula
    # unless both samples vanish; re-extract those (rare) energies at
    # quarter-wavelength-shifted radii.
    amp = np.maximum(np.abs(u1), np.abs(u2))
    bad = amp < 1e-12 * np.median(amp) if len(amp) > 1 else amp < 1e-300
    for idx in np.nonzero(bad)[0]:
        sol = numerov_integrate(table, ell, float(energies[idx]))
        deltas[idx] = extract_phase_shift(sol, r1, r2)
    return deltas


def _count_bound_nodes(table: PotentialTable, ell: int, energy: float) -> int:
    """Levinson node count: interior nodes in (0, r_max] beyond the free count."""
    h = table.grid.h
    n = table.grid.n_points
    rec_at = np.array([n - 1])
    _, nodes_v, _ = numerov.outward(
        table.values, h, ell, np.array([energy]), record_at=rec_at, node_limit=n - 1
    )
    _, nodes_free, _ = numerov.outward(
        np.zeros(n), h, ell, np.array([energy]), record_at=rec_at, node_limit=n - 1
    )
    return max(0, int(nodes_v[0]) - int(nodes_free[0]))


def _unwrap(raw: np.ndarray, offset0: float) -> np.ndarray:
    out = np.empty_like(raw)
    prev = raw[0] + offset0
    out[0] = prev
    for j in range(1, len(raw)):
        val = raw[j] + PI * round((prev - raw[j]) / PI)
        out[j] = val
        prev = val
    return out


def scan(table: PotentialTable, config: ScatterConfig | None = None) -> PhaseShiftScan:
    """Unwrapped phase shifts over the energy grid for l = 0..lmax.

    The l = 0 branch is pinned near threshold by Levinson counting of
    interior nodes (pi per bound s state; zero for a free particle), the
    l > 0 branches start on the branch nearest zero, and continuity in E is
    enforced by adding integer multiples of pi.  Where an unwrapped step
    still exceeds the refinement threshold the energy grid is bisected
    locally, up to max_refine_levels deep.
    """
    if config is None:
        config = ScatterConfig()
    i1, i2 = _matching_indices(table, config)
    h = table.grid.h
    energies = config.energy_grid()
    lmax = config.lmax

    raw = np.vstack([_raw_deltas(table, ell, energies, i1, i2) for ell in range(lmax + 1)])

    offset0 = PI * _count_bound_nodes(table, 0, float(energies[0]))
    levels = 0
    while True:
        deltas = np.vstack(
            [_unwrap(raw[ell], offset0 if ell == 0 else 0.0) for ell in range(lmax + 1)]
        )
        if not config.refine or levels >= config.max_refine_levels:
            break
        steps = np.abs(np.diff(deltas, axis=1))
        flagged = np.nonzero(np.any(steps > config.refine_threshold, axis=0))[0]
        if len(flagged) == 0:
            break
        new_e = 0.5 * (energies[flagged] + energies[flagged + 1])
        new_raw = np.vstack(
            [_raw_deltas(table, ell, new_e, i1, i2) for ell in range(lmax + 1)]
        )
        energies = np.concatenate([energies, new_e])
        order = np.argsort(energies, kind="stable")
        energies = energies[order]
        raw = np.concatenate([raw, new_raw], axis=1)[:, order]
        levels += 1

    k = np.sqrt(2.0 * energies)
    return PhaseShiftScan(
        energies=energies,
        k=k,
        deltas=deltas,
        model=table.model,
        r1=i1 * h,
        r2=i2 * h,
        refine_levels=levels,
    )


def cross_sections(phase_scan: PhaseShiftScan) -> CrossSections:
    """sigma_l = (4 pi / k^2) (2l+1) sin^2 d_l and their sum."""
    if len(phase_scan.energies) == 0:
        raise GridError("empty scan")
    k2 = phase_scan.k**2
    weights = np.array([2 * ell + 1 for ell in range(phase_scan.lmax + 1)])
    partial = 4.0 * PI / k2 * weights[:, None] * np.sin(phase_scan.deltas) ** 2
    total = partial.sum(axis=0)
    return CrossSections(
        energies=phase_scan.energies,
        k=phase_scan.k,
        partial=partial,
        total=total,
        model=phase_scan.model,
    )
