"""Eisenbud-Wigner-Smith time delays from unwrapped phase shifts.

tau_l(E) = 2 d(delta_l)/dE in atomic time units, reported in attoseconds.
Differentiation uses the three-point Lagrange derivative on the (possibly
non-uniform) energy grid with one-sided stencils at the window edges; no
smoothing is applied, so the resolution of a resonant peak is set entirely
by the local grid step, which is recorded as metadata.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .scattering import CrossSections, PhaseShiftScan
from .units import AS_PER_ATOMIC_TIME


@dataclass(frozen=True)
class PartialDelays:
    """Per-partial-wave EWS delays tau_l(E) in attoseconds."""

    energies: np.ndarray
    tau: np.ndarray  # shape (lmax+1, nE)
    model: str
    step_estimate: np.ndarray  # per-l step-halving error estimate (as)

    @property
    def lmax(self) -> int:
        return self.tau.shape[0] - 1


@dataclass(frozen=True)
class TimeDelayCurve:
    """Partial and cross-section-weighted average delays in attoseconds."""

    energies: np.ndarray
    tau: np.ndarray
    tau_avg: np.ndarray
    weights: np.ndarray  # sigma_l / sigma_total, shape (lmax+1, nE)
    model: str
    step_estimate: np.ndarray
    s_wave_divergent: bool  # near-threshold l=0 divergence present (not clipped)

    @property
    def lmax(self) -> int:
        return self.tau.shape[0] - 1

    def dump(self) -> str:
        buf = io.StringIO()
        buf.write(f"# model={self.model}\n")
        buf.write(f"# atomic_time_as={AS_PER_ATOMIC_TIME!r}\n")
        est = " ".join(f"{v:.3e}" for v in self.step_estimate)
        buf.write(f"# step_halving_estimate_as: {est}\n")
        buf.write(f"# s_wave_divergent={self.s_wave_divergent}\n")
        cols = " ".join(f"tau_{l}" for l in range(self.lmax + 1))
        buf.write(f"# columns: E[hartree] {cols} tau_avg [attoseconds]\n")
        for j in range(len(self.energies)):
            row = " ".join(f"{self.tau[l, j]:.10e}" for l in range(self.lmax + 1))
            buf.write(f"{self.energies[j]:.12e} {row} {self.tau_avg[j]:.10e}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dump())


def _lagrange_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point Lagrange dy/dx on a non-uniform grid, one-sided at edges."""
    n = len(x)
    if n < 3:
        raise GridError(f"need at least 3 points to differentiate, got {n}")
    out = np.empty_like(y)
    x0, x1, x2 = x[:-2], x[1:-1], x[2:]
    y0, y1, y2 = y[:-2], y[1:-1], y[2:]
    out[1:-1] = (
        y0 * (x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (2 * x1 - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (x1 - x0) / ((x2 - x0) * (x2 - x1))
    )
    for edge, (a, b, c) in ((0, (0, 1, 2)), (n - 1, (n - 3, n - 2, n - 1))):
        xa, xb, xc = x[a], x[b], x[c]
        out[edge] = (
            y[a] * (2 * x[edge] - xb - xc) / ((xa - xb) * (xa - xc))
            + y[b] * (2 * x[edge] - xa - xc) / ((xb - xa) * (xb - xc))
            + y[c] * (2 * x[edge] - xa - xb) / ((xc - xa) * (xc - xb))
        )
    return out


def ews_delay(scan: PhaseShiftScan) -> PartialDelays:
    """tau_l(E) = 2 d(delta_l)/dE, converted to attoseconds.

    The attached step estimate is the largest change in tau_l when the
    derivative is recomputed on the half-density (every other point) grid,
    a cheap a-posteriori resolution check.
    """
    e = scan.energies
    if len(e) < 3:
        raise GridError(f"need at least 3 energies per partial wave, got {len(e)}")
    tau = np.vstack(
        [2.0 * _lagrange_derivative(e, scan.deltas[l]) * AS_PER_ATOMIC_TIME
         for l in range(scan.lmax + 1)]
    )
    est = np.zeros(scan.lmax + 1)
    if len(e) >= 6:
        e2 = e[::2]
        for l in range(scan.lmax + 1):
            tau2 = 2.0 * _lagrange_derivative(e2, scan.deltas[l, ::2]) * AS_PER_ATOMIC_TIME
            est[l] = float(np.max(np.abs(tau2 - tau[l, ::2])))
    return PartialDelays(energies=e, tau=tau, model=scan.model, step_estimate=est)


def average_delay(delays: PartialDelays, xs: CrossSections) -> TimeDelayCurve:
    """Cross-section-weighted average tau_avg = sum_l (sigma_l/sigma_total) tau_l."""
    if delays.tau.shape[1] != len(xs.energies) or not np.allclose(
        delays.energies, xs.energies, rtol=0, atol=0
    ):
        raise GridError("delay and cross-section energy grids are not aligned")
    if delays.tau.shape[0] != xs.partial.shape[0]:
        raise GridError("delay and cross-section lmax differ")
    if np.any(xs.total <= 0.0):
        raise GridError("sigma_total vanishes at a grid point; weights undefined")
    weights = xs.partial / xs.total
    tau_avg = (weights * delays.tau).sum(axis=0)

    tau0 = delays.tau[0]
    med = float(np.median(np.abs(tau0))) or 1.0
    divergent = bool(tau0[0] < 0.0 and abs(tau0[0]) > 10.0 * med)
    return TimeDelayCurve(
        energies=delays.energies,
        tau=delays.tau,
        tau_avg=tau_avg,
        weights=weights,
        model=delays.model,
        step_estimate=delays.step_estimate,
        s_wave_divergent=divergent,
    )


@dataclass(frozen=True)
class ThresholdFit:
    """Power-law fit log|y| = exponent*log(E) + log_prefactor."""

    exponent: float
    log_prefactor: float
    residual: float


def threshold_fit(source, ell: int, window: tuple[float, float]) -> ThresholdFit:
    """Least-squares power-law exponent of |delta_l| or |tau_l| near threshold.

    source may be a PhaseShiftScan (fits the phase) or PartialDelays (fits
    the delay).  A sign change inside the window means the curve is not a
    power law there and is rejected.
    """
    if isinstance(source, PhaseShiftScan):
        e, y = source.energies, source.deltas[ell]
    elif isinstance(source, PartialDelays):
        e, y = source.energies, source.tau[ell]
    else:
        e, y = source
        e = np.asarray(e, dtype=float)
        y = np.asarray(y, dtype=float)[ell] if np.ndim(y) == 2 else np.asarray(y, dtype=float)
    lo, hi = window
    mask = (e >= lo) & (e <= hi)
    if int(mask.sum()) < 3:
        raise GridError(f"threshold window {window} holds fewer than 3 grid points")
    ew, yw = e[mask], y[mask]
    signs = np.sign(yw)
    if np.any(signs == 0.0) or not np.all(signs == signs[0]):
        raise GridError("series changes sign inside the window: not a power law")
    lx = np.log(ew)
    ly = np.log(np.abs(yw))
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(a, ly, rcond=None)
    resid = float(np.sqrt(res[0] / len(lx))) if len(res) else 0.0
    return ThresholdFit(exponent=float(coef[0]), log_prefactor=float(coef[1]), residual=resid)


def resonant_peak(delays: PartialDelays, ell: int, e_center: float, half_width: float):
    """(E_peak, tau_peak) of tau_l within [e_center - hw, e_center + hw]."""
    e = delays.energies
    mask = (e >= e_center - half_width) & (e <= e_center + half_width)
    if not np.any(mask):
        raise GridError(f"no delay samples within {half_width} of E={e_center}")
    tau = delays.tau[ell, mask]
    j = int(np.argmax(tau))
    return float(e[mask][j]), float(tau[j])
