"""Product-integration rules for square-root singular kernels.

All rules integrate a piecewise-linear interpolant of the smooth factor
exactly against the singular weight.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special

WEIGHTS = {"none": (0.0, 0.0), "both": (-0.5, -0.5), "left": (-0.5, 0.0), "right": (0.0, -0.5)}


def exponents(weight) -> tuple[float, float]:
    """Endpoint exponents ``(e0, eT)`` of ``w(s) = s**e0 (T - s)**eT``.

    ``weight`` is a name from ``WEIGHTS`` or an explicit pair.
    """
    if isinstance(weight, str):
        try:
            return WEIGHTS[weight]
        except KeyError:
            raise ValueError(f"unknown weight {weight!r}; expected one of {sorted(WEIGHTS)} or a pair") from None
    e0, eT = (float(x) for x in weight)
    if not (e0 > -1.0 and eT > -1.0):
        raise ValueError(f"weight exponents must exceed -1, got {(e0, eT)}")
    return e0, eT


def graded_nodes(n: int, T: float) -> np.ndarray:
    """``n + 1`` nodes on ``[0, T]`` clustered quadratically at both ends."""
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of intervals >= 2, got {n}")
    half = (np.arange(n // 2 + 1) / (n // 2)) ** 2 * (T / 2)
    return np.concatenate([half, T - half[-2::-1]])


def sqrt_weights(t: np.ndarray) -> np.ndarray:
    """Lower-triangular ``W`` with ``sum_j W[i, j] F(t_j) = int_{t_0}^{t_i} F(s) / sqrt(t_i - s) ds``.

    Exact for piecewise-linear ``F``. The formulas avoid the
    ``sqrt(da) - sqrt(db)`` cancellation on long rows.
    """
    t = np.asarray(t, dtype=float)
    n = t.size
    W = np.zeros((n, n))
    if n < 2:
        return W
    L = np.diff(t)
    da = t[:, None] - t[None, :-1]
    db = t[:, None] - t[None, 1:]
    mask = db >= 0
    da = np.where(mask, da, 1.0)
    db = np.where(mask, db, 0.0)
    ra, rb = np.sqrt(da), np.sqrt(db)
    den = (ra + rb) ** 2
    wa = np.where(mask, (2.0 * L / 3.0) * (ra + 2.0 * rb) / den, 0.0)
    wb = np.where(mask, (2.0 * L / 3.0) * (2.0 * ra + rb) / den, 0.0)
    W[:, :-1] += wa
    W[:, 1:] += wb
    return W


def jacobi_moments(n: int, p: float, q: float) -> np.ndarray:
    """Weights ``w_r`` with ``sum_r w_r F(r) = int_0^n F(u) u**p (n - u)**q du``.

    ``F`` is piecewise linear on the integer nodes ``0..n``; ``p, q > -1``.
    """
    if n == 0:
        return np.zeros(1)
    x = np.arange(n + 1) / n
    a0, a1, bq = p + 1.0, p + 2.0, q + 1.0
    c0 = n ** (p + q + 1.0) * special.beta(a0, bq) * special.betainc(a0, bq, x)
    c1 = n ** (p + q + 2.0) * special.beta(a1, bq) * special.betainc(a1, bq, x)
    m0 = np.diff(c0)
    m1 = np.diff(c1)
    r = np.arange(n)
    w = np.zeros(n + 1)
    w[:-1] += (r + 1) * m0 - m1
    w[1:] += m1 - r * m0
    return w


@lru_cache(maxsize=64)
def _gauss_jacobi(nq: int, alpha: float, beta: float):
    if alpha == 0.0 and beta == 0.0:
        return np.polynomial.legendre.leggauss(nq)
    x, w = special.roots_jacobi(nq, alpha, beta)
    return x, w


def _factor(s, t, T, side, e0, eT, skip):
    """Product of the singular factors not captured by the Jacobi weight."""
    out = np.ones_like(s)
    if "dist" not in skip:
        out = out * np.abs(t - s) ** -0.5
    if e0 and "zero" not in skip:
        out = out * s ** e0
    if eT and "end" not in skip:
        out = out * (T - s) ** eT
    return out


def abel_matrix(points, nodes, side: str, kernel=None, weight: str = "both",
                nq: int = 16, divergent: float = 0.0) -> np.ndarray:
    """Matrix of the one-sided Abel operator on the weighted hat basis.

    Entry ``[p, j]`` is ``int k(t_p, s) w(s) phi_j(s) |t_p - s|**-0.5 ds``
    over ``s < t_p`` (``side='left'``) or ``s > t_p`` (``side='right'``),
    where ``phi_j`` are hat functions on ``nodes`` and ``w`` is the endpoint
    weight named by ``weight`` (see ``WEIGHTS``). ``kernel(t, s)`` must
    broadcast; ``None`` means 1. Entries whose integral diverges (point at
    a weighted endpoint) are set to ``divergent``.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    nodes = np.asarray(nodes, dtype=float)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    e0, eT = exponents(weight)
    T = nodes[-1]
    a, b = nodes[:-1], nodes[1:]
    L = b - a
    ne = a.size
    tol = 1e-12 * max(T, 1.0)
    kern = kernel if kernel is not None else (lambda t, s: np.ones(np.broadcast(t, s).shape))

    xg, wg = _gauss_jacobi(nq, 0.0, 0.0)
    sq = 0.5 * (a + b)[:, None] + 0.5 * L[:, None] * xg[None, :]
    hl = 0.5 * (1.0 - xg)[None, :] * np.ones((ne, 1))
    hr = 0.5 * (1.0 + xg)[None, :] * np.ones((ne, 1))
    wq = 0.5 * L[:, None] * wg[None, :]
    wfix = np.ones_like(sq)
    if e0:
        wfix = wfix * sq ** e0
    if eT:
        wfix = wfix * (T - sq) ** eT
    weighted_el = np.zeros(ne, dtype=bool)
    if e0:
        weighted_el[0] = True
    if eT:
        weighted_el[-1] = True

    M = np.zeros((points.size, nodes.size))
    chunk = max(1, 400000 // (ne * nq))
    for start in range(0, points.size, chunk):
        tp = points[start:start + chunk]
        if side == "left":
            regular = (b[None, :] < tp[:, None] - tol)
        else:
            regular = (a[None, :] > tp[:, None] + tol)
        regular &= ~weighted_el[None, :]
        if np.any(regular):
            tt = tp[:, None, None]
            f = kern(tt, sq[None, :, :]) * wfix[None] * np.abs(tt - sq[None]) ** -0.5 * wq[None]
            f = f * regular[:, :, None]
            cl = np.sum(f * hl[None], axis=2)
            cr = np.sum(f * hr[None], axis=2)
            M[start:start + tp.size, :-1] += cl
            M[start:start + tp.size, 1:] += cr
        for pi, t in enumerate(tp):
            row = start + pi
            for e in range(ne):
                if regular[pi, e]:
                    continue
                lo, hi = a[e], b[e]
                if side == "left":
                    if lo >= t - tol:
                        continue
                    hi_sub = min(hi, t)
                    lo_sub = lo
                else:
                    if hi <= t + tol:
                        continue
                    lo_sub = max(lo, t)
                    hi_sub = hi
                sing_lo = sing_hi = 0.0
                skip = set()
                if side == "left" and abs(hi_sub - t) <= tol:
                    sing_hi += -0.5
                    skip.add("dist")
                if side == "right" and abs(lo_sub - t) <= tol:
                    sing_lo += -0.5
                    skip.add("dist")
                if e0 and lo_sub <= tol:
                    sing_lo += e0
                    skip.add("zero")
                if eT and hi_sub >= T - tol:
                    sing_hi += eT
                    skip.add("end")
                if sing_lo <= -1.0 or sing_hi <= -1.0:
                    M[row, e] += divergent
                    M[row, e + 1] += divergent
                    continue
                x, w = _gauss_jacobi(nq, sing_hi, sing_lo)
                half = 0.5 * (hi_sub - lo_sub)
                s = lo_sub + half * (1.0 + x)
                scale = half ** (1.0 + sing_lo + sing_hi)
                g = kern(t, s) * _factor(s, t, T, side, e0, eT, skip) * w * scale
                M[row, e] += np.sum(g * (hi - s) / (hi - lo))
                M[row, e + 1] += np.sum(g * (s - lo) / (hi - lo))
    return M


def hat_integrals(nodes, weight: str = "none", nq: int = 16) -> np.ndarray:
    """``int_0^T w(s) phi_j(s) ds`` for each hat function on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    return cumulative_hat_integrals(nodes[-1:], nodes, weight, nq)[0]


def _partial_hat(lo, hi, top, bottom, T, e0, eT, nq):
    """Integrals of the two hats of ``[lo, hi]`` times the weight over ``[bottom, top]``."""
    sl = e0 if (e0 and bottom <= 0.0) else 0.0
    sh = eT if (eT and top >= T) else 0.0
    x, w = _gauss_jacobi(nq, sh, sl)
    half = 0.5 * (top - bottom)
    s = bottom + half * (1.0 + x)
    f = np.ones_like(s)
    if e0 and not sl:
        f = f * s ** e0
    if eT and not sh:
        f = f * (T - s) ** eT
    g = f * w * half ** (1.0 + sl + sh)
    return np.sum(g * (hi - s)) / (hi - lo), np.sum(g * (s - lo)) / (hi - lo)


def cumulative_hat_integrals(points, nodes, weight: str = "none", nq: int = 16) -> np.ndarray:
    """Matrix ``[p, j] = int_0^{t_p} w(s) phi_j(s) ds``."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    nodes = np.asarray(nodes, dtype=float)
    e0, eT = exponents(weight)
    T = nodes[-1]
    a, b = nodes[:-1], nodes[1:]
    ne = a.size
    full = np.array([_partial_hat(a[e], b[e], b[e], a[e], T, e0, eT, nq) for e in range(ne)])
    # running totals of completed elements
    node_int = np.zeros((ne + 1, ne + 1))
    for e in range(ne):
        node_int[e + 1] = node_int[e]
        node_int[e + 1, e] += full[e, 0]
        node_int[e + 1, e + 1] += full[e, 1]
    el = np.clip(np.searchsorted(nodes, points, side="right") - 1, 0, ne - 1)
    out = node_int[el].copy()
    xg, wg = _gauss_jacobi(nq, 0.0, 0.0)
    special_el = np.zeros(ne, dtype=bool)
    if e0:
        special_el[0] = True
    if eT:
        special_el[-1] = True
    reg = ~special_el[el] & (points > a[el])
    if np.any(reg):
        lo, hi, tp = a[el[reg]], b[el[reg]], points[reg]
        half = 0.5 * (tp - lo)
        s = (lo + half)[:, None] + half[:, None] * xg[None, :]
        f = basis_weight(s, T, weight) * wg[None, :] * half[:, None]
        L = (hi - lo)[:, None]
        rows = np.nonzero(reg)[0]
        out[rows, el[reg]] += np.sum(f * (hi[:, None] - s) / L, axis=1)
        out[rows, el[reg] + 1] += np.sum(f * (s - lo[:, None]) / L, axis=1)
    for p in np.nonzero(~reg)[0]:
        t, e = points[p], el[p]
        if t <= a[e]:
            continue
        if t >= b[e]:
            out[p, e] += full[e, 0]
            out[p, e + 1] += full[e, 1]
            continue
        if e0 and e == 0 or not (eT and e == ne - 1):
            cl, cr = _partial_hat(a[e], b[e], t, a[e], T, e0, eT, nq)
        else:
            tl, tr = _partial_hat(a[e], b[e], b[e], t, T, e0, eT, nq)
            cl, cr = full[e, 0] - tl, full[e, 1] - tr
        out[p, e] += cl
        out[p, e + 1] += cr
    return out


def basis_weight(s, T: float, weight: str = "both"):
    e0, eT = exponents(weight)
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    if e0:
        out = out * s ** e0
    if eT:
        out = out * (T - s) ** eT
    return out
