"""Fano profiles: resonance detection and nonlinear least-squares fitting.

sigma_r(E) = sigma0 (q + eps)^2 / (1 + eps^2),  eps = (E - E_r) / (Gamma/2).

The fitter is a damped Gauss-Newton (Levenberg-Marquardt trust parameter)
iteration on (E_r, q, Gamma/2, sigma0) with the analytic Jacobian; steps
are accepted only when the cost decreases, so the final residual never
exceeds the residual at the initial guess.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .delays import PartialDelays
from .errors import FitError, GridError
from .scattering import CrossSections, PhaseShiftScan

PI = math.pi

MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-8
MIRROR_Q_THRESHOLD = 10.0


@dataclass(frozen=True)
class ResonanceCandidate:
    """A delay-peak-seeded resonance with its fitting window."""

    ell: int
    e_r_estimate: float  # tau_l peak position
    width_estimate: float  # FWHM of the tau_l peak (hartree)
    window: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.window
        if not lo < self.e_r_estimate < hi:
            raise GridError("candidate window must contain the peak")
        if hi - lo < 4.0 * self.width_estimate:
            raise GridError("candidate window narrower than 4x the width estimate")


@dataclass(frozen=True)
class FanoFit:
    """Fitted Fano parameters for one resonance."""

    e_r: float
    q: float
    gamma_half: float
    sigma0: float
    residual: float  # RMS over the window (bohr^2)
    covariance: np.ndarray | None
    converged: bool
    n_iterations: int
    mirror: tuple[float, float] | None = None  # (q, sigma0) of the mirrored fit

    def params(self) -> np.ndarray:
        return np.array([self.e_r, self.q, self.gamma_half, self.sigma0])


def fano_eval(e_r: float, q: float, gamma_half: float, sigma0: float, energy):
    """Direct evaluation of the Fano profile (Gamma > 0 required)."""
    if gamma_half <= 0.0:
        raise FitError(f"Gamma/2 must be positive, got {gamma_half}")
    eps = (np.asarray(energy, dtype=float) - e_r) / gamma_half
    out = sigma0 * (q + eps) ** 2 / (1.0 + eps**2)
    return float(out) if np.ndim(energy) == 0 else out


def fano_jacobian(params: np.ndarray, energy: np.ndarray) -> np.ndarray:
    """Analytic partials of the profile w.r.t. (E_r, q, Gamma/2, sigma0)."""
    e_r, q, g, sigma0 = params
    eps = (energy - e_r) / g
    denom = 1.0 + eps**2
    qe = q + eps
    d_sigma0 = qe**2 / denom
    d_q = 2.0 * sigma0 * qe / denom
    d_eps = 2.0 * sigma0 * qe * (1.0 - eps * q) / denom**2
    d_er = -d_eps / g
    d_g = -eps / g * d_eps
    return np.column_stack([d_er, d_q, d_g, d_sigma0])


def _initial_guess(energy: np.ndarray, sigma: np.ndarray, cand: ResonanceCandidate):
    g0 = max(cand.width_estimate / 2.0, 1e-7)
    edge = max(3, len(energy) // 10)
    sigma0 = float(np.median(np.concatenate([sigma[:edge], sigma[-edge:]])))
    sigma0 = max(sigma0, 1e-6 * float(np.max(sigma)), 1e-12)
    i_peak = int(np.argmax(sigma))
    q_mag = math.sqrt(max(float(sigma[i_peak]) / sigma0, 1.0))
    i_min = int(np.argmin(sigma))
    q_sign = 1.0 if energy[i_min] < energy[i_peak] else -1.0
    return np.array([cand.e_r_estimate, q_sign * q_mag, g0, sigma0])


def _levenberg_marquardt(energy, sigma, p0):
    """Damped Gauss-Newton with monotone acceptance; returns (p, cov, converged, iters)."""

    def cost(p):
        return float(np.sum((fano_eval(*p, energy) - sigma) ** 2))

    p = p0.copy()
    c = cost(p)
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        resid = fano_eval(*p, energy) - sigma
        jac = fano_jacobian(p, energy)
        a = jac.T @ jac
        g = jac.T @ resid
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(a + lam * np.diag(np.diag(a)) + 1e-300 * np.eye(4), -g)
            except np.linalg.LinAlgError as exc:
                raise FitError("singular normal equations in Fano fit") from exc
            if not np.all(np.isfinite(step)):
                raise FitError("singular normal equations in Fano fit")
            trial = p + step
            if trial[2] > 0.0 and trial[3] >= 0.0:
                c_trial = cost(trial)
                if c_trial <= c:
                    rel = float(np.max(np.abs(step) / (np.abs(p) + 1e-30)))
                    p, c = trial, c_trial
                    lam = max(lam / 3.0, 1e-14)
                    accepted = True
                    if rel < STEP_TOLERANCE:
                        converged = True
                    break
            lam *= 3.0
            if lam > 1e14:
                break
        if converged or not accepted:
            break
    cov = None
    try:
        jac = fano_jacobian(p, energy)
        dof = max(len(energy) - 4, 1)
        cov = np.linalg.inv(jac.T @ jac) * (cost(p) / dof)
    except np.linalg.LinAlgError:
        cov = None
    return p, cov, converged, iterations


def fano_fit(xs: CrossSections, candidate: ResonanceCandidate) -> FanoFit:
    """Least-squares Fano parameters against the partial cross-section sigma_l.

    The caller must supply a scan whose grid holds at least 50 points inside
    the candidate window (refine the scan locally if fewer).
    """
    lo, hi = candidate.window
    mask = (xs.energies >= lo) & (xs.energies <= hi)
    n_in = int(mask.sum())
    if n_in < 50:
        raise GridError(
            f"fit window [{lo}, {hi}] holds {n_in} < 50 scan points; refine the grid"
        )
    energy = xs.energies[mask]
    sigma = xs.partial[candidate.ell, mask]

    p0 = _initial_guess(energy, sigma, candidate)
    p, cov, converged, iters = _levenberg_marquardt(energy, sigma, p0)
    rms = math.sqrt(float(np.mean((fano_eval(*p, energy) - sigma) ** 2)))

    mirror = None
    if abs(p[1]) > MIRROR_Q_THRESHOLD:
        # near-Lorentzian: the sign of q is poorly determined; report the
        # mirrored solution as well
        pm = np.array([p[0], -p[1], p[2], p[3]])
        pm, _, conv_m, _ = _levenberg_marquardt(energy, sigma, pm)
        if conv_m:
            mirror = (float(pm[1]), float(pm[3]))

    return FanoFit(
        e_r=float(p[0]),
        q=float(p[1]),
        gamma_half=float(p[2]),
        sigma0=float(p[3]),
        residual=rms,
        covariance=cov,
        converged=converged,
        n_iterations=iters,
        mirror=mirror,
    )


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------

RISE_SPAN = 0.05  # hartree
RISE_MIN = PI / 2.0
PEAK_OVER_BACKGROUND = 5.0
WINDOW_HALF_WIDTHS = 8.0  # window = E_r +- 8 (Gamma/2 estimate)


def _max_rise(e: np.ndarray, d: np.ndarray, span: float) -> float:
    """Largest increase of d over any sub-interval shorter than span."""
    best = 0.0
    i = 0
    run_min = d[0]
    for j in range(1, len(e)):
        while e[j] - e[i] >= span:
            i += 1
            run_min = float(np.min(d[i:j]))
        run_min = min(run_min, float(np.min(d[i:j])))
        best = max(best, d[j] - run_min)
    return best


def _peak_fwhm(e: np.ndarray, tau: np.ndarray, j: int, floor: float) -> float:
    half = floor + 0.5 * (tau[j] - floor)
    left = j
    while left > 0 and tau[left] > half:
        left -= 1
    right = j
    while right < len(tau) - 1 and tau[right] > half:
        right += 1
    width = float(e[right] - e[left])
    local_step = float(e[min(j + 1, len(e) - 1)] - e[max(j - 1, 0)]) / 2.0
    return max(width, local_step, 1e-7)


def detect(scan: PhaseShiftScan, delays: PartialDelays) -> list[ResonanceCandidate]:
    """Flag resonances: a >= pi/2 phase rise within a 0.05-hartree span plus
    a tau_l peak standing at least 5x above the local background median."""
    if len(scan.energies) != len(delays.energies) or not np.array_equal(
        scan.energies, delays.energies
    ):
        raise GridError("scan and delay grids differ")
    e = scan.energies
    out: list[ResonanceCandidate] = []
    for ell in range(scan.lmax + 1):
        tau = delays.tau[ell]
        delta = scan.deltas[ell]
        interior = np.nonzero((tau[1:-1] > tau[:-2]) & (tau[1:-1] >= tau[2:]))[0] + 1
        maxima = [j for j in interior if tau[j] > 0.0]
        maxima.sort(key=lambda j: -tau[j])
        accepted: list[tuple[int, float]] = []
        for j in maxima:
            e_p = e[j]
            near = (e >= e_p - RISE_SPAN) & (e <= e_p + RISE_SPAN)
            if int(near.sum()) < 3:
                continue
            if _max_rise(e[near], delta[near], RISE_SPAN) < RISE_MIN * 0.999:
                continue
            bg_region = (np.abs(e - e_p) <= 2.0 * RISE_SPAN) & (np.abs(e - e_p) > 0.0)
            fwhm = _peak_fwhm(e, tau, j, float(np.median(tau[bg_region])) if np.any(bg_region) else 0.0)
            bg_mask = bg_region & (np.abs(e - e_p) > 2.0 * fwhm)
            if not np.any(bg_mask):
                bg_mask = np.abs(e - e_p) > 2.0 * fwhm
            background = float(np.median(np.abs(tau[bg_mask]))) if np.any(bg_mask) else 0.0
            if tau[j] < PEAK_OVER_BACKGROUND * max(background, 1e-30):
                continue
            if any(abs(e_p - ep0) < 4.0 * max(fwhm, f0) for ep0, f0 in accepted):
                continue
            accepted.append((float(e_p), fwhm))
        accepted.sort()
        for idx, (e_p, fwhm) in enumerate(accepted):
            g_half = fwhm / 2.0
            lo = e_p - WINDOW_HALF_WIDTHS * g_half
            hi = e_p + WINDOW_HALF_WIDTHS * g_half
            if idx > 0:
                lo = max(lo, 0.5 * (accepted[idx - 1][0] + e_p))
            if idx < len(accepted) - 1:
                hi = min(hi, 0.5 * (e_p + accepted[idx + 1][0]))
            lo = max(lo, float(e[0]))
            hi = min(hi, float(e[-1]))
            span = max(hi - lo, 4.0 * fwhm)
            if hi - lo < 4.0 * fwhm:  # keep the window valid near grid edges
                lo = max(float(e[0]), e_p - span)
                hi = min(float(e[-1]), e_p + span)
            out.append(
                ResonanceCandidate(
                    ell=ell, e_r_estimate=e_p, width_estimate=fwhm, window=(lo, hi)
                )
            )
    out.sort(key=lambda c: (c.ell, c.e_r_estimate))
    return out


def fit_report(fits: list[tuple[str, FanoFit | None, ResonanceCandidate]]) -> str:
    """Fixed-width report, one row per resonance (regenerates the data tables)."""
    buf = io.StringIO()
    buf.write("# columns: model l E_r[hartree] q gamma_half[hartree] sigma0[bohr^2] "
              "rms_residual converged\n")
    for model, fit, cand in fits:
        if fit is None:
            buf.write(f"{model:8s} {cand.ell:3d} fit-failed\n")
            continue
        buf.write(
            f"{model:8s} {cand.ell:3d} {fit.e_r:.6f} {fit.q:+9.3f} "
            f"{fit.gamma_half:.6e} {fit.sigma0:12.4f} {fit.residual:.4e} "
            f"{str(fit.converged):5s}\n"
        )
    return buf.getvalue()
