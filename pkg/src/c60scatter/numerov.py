"""Numerov propagation kernels for the radial equation u'' = f(r) u.

f(r; l, E) = 2 (V(r) - E) + l(l+1)/r^2 in hartree atomic units.  The
kernels are vectorized over a batch of energies (continuum) or a batch of
(l, E) states (bound search): the three-term recursion runs over the grid
index while every arithmetic step operates on the whole batch.

All propagations use the w-form of Numerov's method,

    w_i = (1 - h^2 f_i / 12) u_i,
    w_{i+1} = 2 w_i - w_{i-1} + h^2 f_i u_i,

which never evaluates f at r = 0 (u_0 = 0 makes w_0 = 0 exactly) and is
overflow-guarded by periodic per-column renormalization; recorded samples
are kept in the same running scale so ratios between them stay exact.
"""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError

_RENORM_EVERY = 512
_RENORM_HI = 1e100
_RENORM_LO = 1e-100


def _r2inv(n: int, h: float) -> np.ndarray:
    r2 = (np.arange(n) * h) ** 2
    out = np.zeros(n)
    out[1:] = 1.0 / r2[1:]
    return out


def outward(
    v_ext: np.ndarray,
    h: float,
    ell: int,
    energies: np.ndarray,
    record_at: np.ndarray,
    node_limit: int | None = None,
    keep_full: bool = False,
):
    """Propagate u outward from u(0)=0, u(h) ~ r^(l+1) for a batch of energies.

    Parameters
    ----------
    v_ext : potential on the uniform grid, already extended (zeros) past the
        physical table if matching radii lie beyond it.
    record_at : sorted grid indices at which u is sampled.
    node_limit : if set, count strict sign changes of u for r_i <= this index.
    keep_full : additionally return the whole solution (use with small batches).

    Returns
    -------
    recorded : (len(record_at), nE) samples in a common per-column scale
    nodes : (nE,) int counts (zeros if node_limit is None)
    full : (n, nE) array or None
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    if np.any(energies <= 0.0):
        raise IntegrationError("continuum propagation requires E > 0")
    n = len(v_ext)
    record_at = np.asarray(record_at, dtype=int)
    if record_at.max() > n - 1:
        raise IntegrationError("record index beyond extended grid")
    n_stop = int(record_at.max()) + 1

    ne = len(energies)
    h2 = h * h
    c12 = h2 / 12.0
    ll = float(ell * (ell + 1))
    g = 2.0 * v_ext + ll * _r2inv(n, h)  # f_i = g_i - 2E
    e2 = 2.0 * energies

    u_prev = np.zeros(ne)
    u_cur = np.full(ne, 1e-10)
    f_cur = g[1] - e2
    w_prev = np.zeros(ne)
    w_cur = (1.0 - c12 * f_cur) * u_cur

    recorded = np.zeros((len(record_at), ne))
    rec_pos = {int(idx): k for k, idx in enumerate(record_at)}
    nodes = np.zeros(ne, dtype=int)
    full = np.zeros((n_stop, ne)) if keep_full else None
    if keep_full:
        full[1] = u_cur
    if 1 in rec_pos:
        recorded[rec_pos[1]] = u_cur

    for i in range(1, n_stop - 1):
        w_next = 2.0 * w_cur - w_prev + h2 * f_cur * u_cur
        f_next = g[i + 1] - e2
        u_next = w_next / (1.0 - c12 * f_next)

        if node_limit is not None and i + 1 <= node_limit:
            nodes += u_next * u_cur < 0.0

        if keep_full:
            full[i + 1] = u_next
        pos = rec_pos.get(i + 1)
        if pos is not None:
            recorded[pos] = u_next

        if (i + 1) % _RENORM_EVERY == 0:
            mag = np.maximum(np.abs(u_next), np.abs(u_cur))
            big = mag > _RENORM_HI
            small = (mag < _RENORM_LO) & (mag > 0.0)
            if np.any(big) or np.any(small):
                scale = np.ones(ne)
                scale[big] = 1.0 / mag[big]
                scale[small] = 1.0 / mag[small]
                u_next *= scale
                u_cur *= scale
                w_next *= scale
                w_cur *= scale
                recorded *= scale
                if keep_full:
                    full *= scale

        u_prev, u_cur = u_cur, u_next
        w_prev, w_cur = w_cur, w_next
        f_cur = f_next

    if not np.all(np.isfinite(u_cur)):
        bad = int(np.nonzero(~np.isfinite(u_cur))[0][0])
        raise IntegrationError(
            "non-finite radial solution despite renormalization",
            ell=ell,
            energy=float(energies[bad]),
        )
    return recorded, nodes, full


def bound_outward(
    v: np.ndarray,
    h: float,
    ll_vec: np.ndarray,
    eps_vec: np.ndarray,
    im_vec: np.ndarray,
    keep_full: bool = False,
):
    """Outward propagation for a batch of bound-state trials.

    Each column has its own l(l+1), trial energy, and matching index; the
    recursion runs to max(im)+1.  Returns u at (im-1, im, im+1) per column,
    interior node counts for r_i <= im, and optionally full solutions.
    """
    ne = len(eps_vec)
    n_stop = int(im_vec.max()) + 2
    h2 = h * h
    c12 = h2 / 12.0
    r2i = _r2inv(len(v), h)

    u_prev = np.zeros(ne)
    u_cur = np.full(ne, 1e-10)
    f_cur = 2.0 * (v[1] - eps_vec) + ll_vec * r2i[1]
    w_prev = np.zeros(ne)
    w_cur = (1.0 - c12 * f_cur) * u_cur

    rec = np.zeros((3, ne))
    nodes = np.zeros(ne, dtype=int)
    full = np.zeros((n_stop, ne)) if keep_full else None
    if keep_full:
        full[1] = u_cur
    for row, off in enumerate((-1, 0, 1)):
        hit = im_vec + off == 1
        rec[row, hit] = u_cur[hit]

    for i in range(1, n_stop - 1):
        w_next = 2.0 * w_cur - w_prev + h2 * f_cur * u_cur
        f_next = 2.0 * (v[i + 1] - eps_vec) + ll_vec * r2i[i + 1]
        u_next = w_next / (1.0 - c12 * f_next)

        nodes += (u_next * u_cur < 0.0) & (i + 1 <= im_vec)
        for row, off in enumerate((-1, 0, 1)):
            hit = im_vec + off == i + 1
            if np.any(hit):
                rec[row, hit] = u_next[hit]
        if keep_full:
            full[i + 1] = u_next

        if (i + 1) % _RENORM_EVERY == 0:
            mag = np.maximum(np.abs(u_next), np.abs(u_cur))
            big = mag > _RENORM_HI
            if np.any(big):
                scale = np.ones(ne)
                scale[big] = 1.0 / mag[big]
                u_next *= scale
                u_cur *= scale
                w_next *= scale
                w_cur *= scale
                rec *= scale
                if keep_full:
                    full *= scale

        u_prev, u_cur = u_cur, u_next
        w_prev, w_cur = w_cur, w_next
        f_cur = f_next

    return rec, nodes, full


def bound_inward(
    v: np.ndarray,
    h: float,
    ll_vec: np.ndarray,
    eps_vec: np.ndarray,
    im_vec: np.ndarray,
    keep_full: bool = False,
):
    """Inward propagation from the grid edge for a batch of bound trials.

    Starts with a decaying exponential at r_max and recurses down to
    min(im)-1.  Returns u at (im-1, im, im+1) per column.
    """
    ne = len(eps_vec)
    n = len(v)
    i_stop = int(im_vec.min()) - 1
    h2 = h * h
    c12 = h2 / 12.0
    r2i = _r2inv(n, h)

    kap2 = 2.0 * (v[n - 1] - eps_vec) + ll_vec * r2i[n - 1]
    kappa = np.sqrt(np.maximum(kap2, 1e-12))
    u_cur = np.full(ne, 1e-12)  # u(r_max)
    u_next = u_cur * np.exp(kappa * h)  # u(r_max - h): grows going inward
    f_cur = 2.0 * (v[n - 1] - eps_vec) + ll_vec * r2i[n - 1]
    f_next = 2.0 * (v[n - 2] - eps_vec) + ll_vec * r2i[n - 2]
    w_cur = (1.0 - c12 * f_cur) * u_cur
    w_next = (1.0 - c12 * f_next) * u_next

    rec = np.zeros((3, ne))
    full = np.zeros((n, ne)) if keep_full else None
    if keep_full:
        full[n - 1] = u_cur
        full[n - 2] = u_next
    for row, off in enumerate((-1, 0, 1)):
        for idx, val in ((n - 1, u_cur), (n - 2, u_next)):
            hit = im_vec + off == idx
            rec[row, hit] = val[hit]

    u_prev, u_cur = u_cur, u_next
    w_prev, w_cur = w_cur, w_next
    f_cur = f_next
    steps = 0
    for i in range(n - 2, i_stop, -1):
        w_next = 2.0 * w_cur - w_prev + h2 * f_cur * u_cur
        f_next = 2.0 * (v[i - 1] - eps_vec) + ll_vec * r2i[i - 1]
        u_next = w_next / (1.0 - c12 * f_next)

        for row, off in enumerate((-1, 0, 1)):
            hit = im_vec + off == i - 1
            if np.any(hit):
                rec[row, hit] = u_next[hit]
        if keep_full:
            full[i - 1] = u_next

        steps += 1
        if steps % _RENORM_EVERY == 0:
            mag = np.maximum(np.abs(u_next), np.abs(u_cur))
            big = mag > _RENORM_HI
            if np.any(big):
                scale = np.ones(ne)
                scale[big] = 1.0 / mag[big]
                u_next *= scale
                u_cur *= scale
                w_next *= scale
                w_cur *= scale
                rec *= scale
                if keep_full:
                    full *= scale

        u_prev, u_cur = u_cur, u_next
        w_prev, w_cur = w_cur, w_next
        f_cur = f_next

    return rec, full
