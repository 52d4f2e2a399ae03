"""Field reconstruction from the interface trace, and the finite-difference
heat oracle used to cross-check every flux computed by the integral path."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import linalg

from .curves import Interface, SideData
from .errors import PhaseExitError, ValidationError
from .phase_model import PhaseLaw, phi


def dirichlet_from_trace(law: PhaseLaw, m, t=None, strict: bool = True):
    """Boundary values ``(g-, g+)`` on the two sides for trace samples ``m``.

    With ``strict`` the trace must lie in the open interval ``(A, B)``;
    otherwise the closed interval is accepted. The first offending time
    (index when ``t`` is not given) is carried by :class:`PhaseExitError`.
    """
    m = np.asarray(m, dtype=float)
    flat = np.atleast_1d(m)
    bad = (flat <= law.A) | (flat >= law.B) if strict else (flat < law.A) | (flat > law.B)
    if np.any(bad):
        i = int(np.argmax(bad))
        when = float(np.atleast_1d(t)[i]) if t is not None else float(i)
        raise PhaseExitError(
            f"trace value {flat[i]:.6g} at t={when:.6g} leaves ({law.A}, {law.B})", when)
    return (m - law.delta0) / law.gamma0, (m - law.delta2) / law.gamma2


@dataclass
class OracleResult:
    t: np.ndarray
    y: np.ndarray
    w: np.ndarray  # shape (len(t), len(y))
    flux: np.ndarray
    advisories: list = field(default_factory=list)


def far_boundary(w0: Callable, gamma: float, T: float, speed: float, tol: float = 1e-12,
                 y_limit: float = 400.0) -> float:
    """Truncation point past which ``w0`` varies by less than ``tol``, padded by the diffusion and drift reach."""
    y = np.linspace(0.0, y_limit, 40001)
    v = w0(y)
    tail = np.abs(v - v[-1])
    # running sup of the variation from the right
    sup_right = np.maximum.accumulate(tail[::-1])[::-1]
    idx = np.nonzero(sup_right >= tol)[0]
    y_data = y[idx[-1]] if idx.size else 0.0
    return float(y_data + 8.0 * np.sqrt(gamma * T) + abs(speed) * T + 1.0)


def fd_oracle_heat(gamma: float, xi: Interface, g: Callable, w0: Callable, n_space: int = 2048,
                   n_time: int = 2048, y_max: float | None = None, T: float | None = None,
                   rannacher: int = 2) -> OracleResult:
    """Crank-Nicolson for ``w_t = gamma w_yy + xi'(t) w_y`` on ``0 < y < y_max``.

    ``w(0, t) = g(t)``, ``w_y(y_max, t) = 0``, ``w(y, 0) = w0(y)``. The first
    ``rannacher`` steps are each replaced by two implicit Euler half steps
    to damp the corner incompatibility. Returns the field and the flux
    ``w_y(0, t)`` from the second-order one-sided difference.
    """
    if not gamma > 0:
        raise ValidationError(f"oracle diffusivity must be positive, got {gamma}")
    T = xi.T if T is None else float(T)
    nodes = np.linspace(0.0, T, 201)
    speed = float(np.max(np.abs(xi.derivative(nodes))))
    if y_max is None:
        y_max = far_boundary(w0, gamma, T, speed)
    y = np.linspace(0.0, y_max, n_space + 1)
    dy = y[1] - y[0]
    t = np.linspace(0.0, T, n_time + 1)
    dt = t[1] - t[0]
    advisories = []
    peclet = speed * dy / gamma
    if peclet > 2.0:
        msg = f"cell Peclet number {peclet:.3g} > 2; refine the spatial grid"
        advisories.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    n = n_space  # unknowns are y[1..n]
    W = np.empty((n_time + 1, n_space + 1))
    w = np.asarray(w0(y), dtype=float).copy()
    w[0] = g(np.float64(0.0))
    W[0] = w
    dif = gamma / dy ** 2

    def operator_bands(tk):
        adv = float(xi.derivative(np.float64(tk))) / (2.0 * dy)
        lower = np.full(n, dif - adv)  # coefficient of w_{i-1}
        diag = np.full(n, -2.0 * dif)
        upper = np.full(n, dif + adv)  # coefficient of w_{i+1}
        # Neumann ghost at y_n: w_{n+1} = w_{n-1}
        lower[-1] += upper[-1]
        upper[-1] = 0.0
        return lower, diag, upper

    def apply_op(bands, v, left_value):
        lo, di, up = bands
        out = di * v[1:]
        out[1:] += lo[1:] * v[1:-1]
        out[0] += lo[0] * left_value
        out[:-1] += up[:-1] * v[2:]
        return out

    def step(v, t0, t1, theta):
        h = t1 - t0
        b1 = operator_bands(t1)
        rhs = v[1:].copy()
        if theta < 1.0:
            rhs += (1.0 - theta) * h * apply_op(operator_bands(t0), v, v[0])
        g1 = float(g(np.float64(t1)))
        rhs[0] += theta * h * b1[0][0] * g1
        ab = np.zeros((3, n))
        ab[0, 1:] = -theta * h * b1[2][:-1]
        ab[1] = 1.0 - theta * h * b1[1]
        ab[2, :-1] = -theta * h * b1[0][1:]
        out = np.empty_like(v)
        out[0] = g1
        out[1:] = linalg.solve_banded((1, 1), ab, rhs)
        return out

    for k in range(n_time):
        if k < rannacher:
            mid = 0.5 * (t[k] + t[k + 1])
            w = step(step(w, t[k], mid, 1.0), mid, t[k + 1], 1.0)
        else:
            w = step(w, t[k], t[k + 1], 0.5)
        W[k + 1] = w
    flux = (-3.0 * W[:, 0] + 4.0 * W[:, 1] - W[:, 2]) / (2.0 * dy)
    return OracleResult(t, y, W, flux, advisories)


@dataclass
class SolutionBundle:
    """Interface traces, one-sided fluxes and (optionally) the region fields.

    ``u_left``/``u_right`` are the traces ``u(xi(t)-, t)``, ``u(xi(t)+, t)``;
    ``vx_left``/``vx_right`` the one-sided values of ``v_x = (phi(u))_x``.
    Region fields are stored in distance-from-interface coordinates:
    ``x = xi(t) - y_left`` and ``x = xi(t) + y_right``.
    """

    law: PhaseLaw
    t: np.ndarray
    xi: np.ndarray
    xi_prime: np.ndarray
    m: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray
    vx_left: np.ndarray | None
    vx_right: np.ndarray | None
    y_left: np.ndarray | None = None
    y_right: np.ndarray | None = None
    U_left: np.ndarray | None = None
    U_right: np.ndarray | None = None
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_traces(cls, law: PhaseLaw, t, xi, xi_prime, u_left, u_right, vx_left, vx_right):
        t = np.asarray(t, dtype=float)
        as_arr = lambda v: np.broadcast_to(np.asarray(v, dtype=float), t.shape).copy()
        ul, ur = as_arr(u_left), as_arr(u_right)
        return cls(law, t, as_arr(xi), as_arr(xi_prime), phi(law, ur), ul, ur,
                   None if vx_left is None else as_arr(vx_left),
                   None if vx_right is None else as_arr(vx_right))

    @property
    def V_left(self):
        return None if self.U_left is None else phi(self.law, self.U_left)

    @property
    def V_right(self):
        return None if self.U_right is None else phi(self.law, self.U_right)

    def write(self, directory) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = []
        p = d / "interface.csv"
        cols = {"t": self.t, "xi": self.xi, "xi_prime": self.xi_prime, "m": self.m,
                "u_left": self.u_left, "u_right": self.u_right}
        if self.vx_left is not None:
            cols["vx_left"] = self.vx_left
        if self.vx_right is not None:
            cols["vx_right"] = self.vx_right
        _write_columns(p, cols)
        paths.append(p)
        shapes = {}
        for name, ys, U, sign in (("left", self.y_left, self.U_left, -1.0),
                                  ("right", self.y_right, self.U_right, 1.0)):
            if U is None:
                continue
            p = d / f"region_{name}.csv"
            x = self.xi[:, None] + sign * ys[None, :]
            tt = np.broadcast_to(self.t[:, None], U.shape)
            _write_columns(p, {"x": x.ravel(), "t": tt.ravel(), "u": U.ravel(),
                               "v": phi(self.law, U).ravel()})
            paths.append(p)
            shapes[name] = list(U.shape)
        manifest = {"grid_shapes": shapes, "n_times": int(self.t.size),
                    "interface_nodes": int(self.t.size), "flags": self.flags, **self.meta,
                    "law": self.law.to_dict()}
        p = d / "solution.json"
        p.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
        paths.append(p)
        return paths


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _write_columns(path, cols: dict) -> None:
    names = list(cols)
    data = np.column_stack([np.asarray(cols[k], dtype=float) for k in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data:
            w.writerow([repr(float(x)) for x in row])


def reconstruct(law: PhaseLaw, xi: Interface, side: SideData, m: Callable, n_space: int = 512,
                n_time: int = 512, strict: bool = True, keep_every: int = 1,
                tol: float = 1e-6) -> SolutionBundle:
    """Solve both regions given the trace ``m(t)``.

    The stable region is integrated forward with diffusivity ``gamma2``.
    The unstable region is integrated in reversed time ``sigma = T - t``
    on the reflected domain ``y = xi(T - sigma) - x > 0`` with diffusivity
    ``|gamma0|``, which is a forward problem.
    """
    T, K = xi.T, xi.K
    a = -law.gamma0
    t = np.linspace(0.0, T, n_time + 1)
    m_t = np.asarray(m(t), dtype=float)
    g_minus, g_plus = dirichlet_from_trace(law, m_t, t, strict=strict)

    gp = lambda s: (np.asarray(m(s), dtype=float) - law.delta2) / law.gamma2
    gm = lambda s: (np.asarray(m(T - np.asarray(s)), dtype=float) - law.delta0) / law.gamma0
    right = fd_oracle_heat(law.gamma2, xi, gp, side.u0, n_space, n_time)
    left = fd_oracle_heat(a, xi.reflected(1.0), gm, lambda y: side.uT(K - np.asarray(y)),
                          n_space, n_time)
    U_left = left.w[::-1]
    flux_left = -left.flux[::-1]   # u_x(xi-, t) = -w_y(0, T - t)
    flux_right = right.flux

    sl = slice(None, None, keep_every)
    bundle = SolutionBundle(
        law, t, xi(t), xi.derivative(t), m_t, g_minus, g_plus,
        law.gamma0 * flux_left, law.gamma2 * flux_right,
        left.y[sl], right.y[sl], U_left[:, sl], right.w[:, sl],
        meta={"oracle_advisories": left.advisories + right.advisories,
              "y_max": {"left": float(left.y[-1]), "right": float(right.y[-1])}})
    # branch confinement inside each region
    bad_r = right.w < law.c - tol
    bad_l = (U_left < law.b - tol) | (U_left > law.c + tol)
    bundle.flags = {
        "right_phase_ok": not bool(np.any(bad_r)),
        "left_phase_ok": not bool(np.any(bad_l)),
        "right_first_violation_t": float(t[np.argmax(np.any(bad_r, axis=1))]) if np.any(bad_r) else None,
        "left_first_violation_t": float(t[np.argmax(np.any(bad_l, axis=1))]) if np.any(bad_l) else None,
        "corner_mismatch_start": float(abs(g_plus[0] - side.u0(np.float64(0.0)))),
        "corner_mismatch_end": float(abs(g_minus[-1] - side.uT(np.float64(K)))),
    }
    return bundle
