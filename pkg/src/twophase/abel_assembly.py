"""Reduction of the two-phase matching conditions to an Abel equation for ``m'``.

Along the interface the chemical potential ``m(t) = v(xi(t), t)`` fixes the
Dirichlet data on both sides, ``g- = (m - delta0)/gamma0`` and
``g+ = (m - delta2)/gamma2``. Both one-sided fluxes then follow from the
DtN Volterra equations, and the Rankine-Hugoniot relation

    xi' (g+ - g-) = |gamma0| f1(|gamma0| (T - t)) - gamma2 f2(gamma2 t)

becomes, after splitting each forcing into a data part and an ``m'`` part,

    (1/sqrt(gamma2)) int_0^t k1 m' / sqrt(t - s)
      - (1/sqrt|gamma0|) int_t^T k2 m' / sqrt(s - t)
      + int_0^T T(t, s) m'(s) ds = h(t).

The whole equation is scaled by ``sqrt(pi)`` so that the singular
coefficients are exactly ``1/sqrt(gamma2)`` and ``-1/sqrt|gamma0|``.

Discretization: ``m' = psi* w`` with ``psi*`` piecewise linear on graded
nodes and ``w = 1/sqrt(t (T - t))`` (or 1), collocated at two Gauss
points per element.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import interpolate, linalg

from .curves import Interface, SideData
from .dtn_volterra import (SQRT_PI, VolterraProblem, data_term, gaussian_factor,
                           kernel_smooth, resolvent_series)
from .errors import ConfigurationError, ValidationError
from .phase_model import PhaseLaw
from .quadrature import (_gauss_jacobi, abel_matrix, cumulative_hat_integrals,
                         graded_nodes)

S8_VARIANTS = ("difference", "elapsed")


def check_law(law: PhaseLaw) -> None:
    if not (law.gamma2 > 0 and law.gamma0 < 0):
        raise ValidationError(
            f"Abel reduction needs gamma2 > 0 > gamma0, got gamma2={law.gamma2}, gamma0={law.gamma0}")


def default_m0(law: PhaseLaw, side: SideData) -> float:
    """Corner value ``phi(u0(0))`` on the stable branch."""
    return float(law.gamma2 * side.u0(np.float64(0.0)) + law.delta2)


def trace_coefficient(law: PhaseLaw, m) -> np.ndarray:
    """``g+ - g-`` as a function of the trace value ``m``."""
    return (np.asarray(m) - law.delta2) / law.gamma2 - (np.asarray(m) - law.delta0) / law.gamma0


def endpoint_exponents(law: PhaseLaw) -> tuple[float, float]:
    """Exponents ``(e0, eT)`` of the homogeneous solution ``t**e0 (T - t)**eT`` of the dominant equation.

    With ``c1 = 1/sqrt(gamma2)`` and ``c2 = -1/sqrt|gamma0|`` the powers
    solve ``tan(pi theta) = c1 / c2``; the two ends always add up to
    ``-3/2``, and both equal ``-3/4`` when ``gamma2 = |gamma0|``.
    """
    check_law(law)
    theta0 = 1.0 - np.arctan(np.sqrt(-law.gamma0 / law.gamma2)) / np.pi
    return -theta0, -(1.5 - theta0)


def resolve_weight(law: PhaseLaw, weight):
    return endpoint_exponents(law) if isinstance(weight, str) and weight == "adapted" else weight


def collocation_points(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two Gauss points per element and their quadrature weights."""
    a, b = nodes[:-1], nodes[1:]
    g = 1.0 / np.sqrt(3.0)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = np.column_stack([mid - half * g, mid + half * g]).ravel()
    w = np.repeat(half, 2)
    return pts, w


@dataclass
class SideOperator:
    """Discrete DtN machinery on one side, in that side's own time ``tau``.

    ``W`` holds the product-integration weights of the side kernel on
    ``tau``; ``solve(F)`` applies ``(pi I - W)^-1``.
    """

    tau: np.ndarray
    W: np.ndarray
    curve: Interface

    def solve(self, F: np.ndarray) -> np.ndarray:
        return linalg.solve_triangular(np.pi * np.eye(self.tau.size) - self.W, F, lower=True)

    def split(self, F: np.ndarray) -> dict:
        """Terms of ``(pi I - W)^-1 F`` ordered by kernel power.

        ``direct = F/pi``, ``kernel = W F / pi**2``, ``resolvent`` the rest.
        """
        full = self.solve(F)
        direct = F / np.pi
        kern = self.W @ F / np.pi ** 2
        return {"direct": direct, "kernel": kern, "resolvent": full - direct - kern, "full": full}


def side_operator(curve: Interface, tau: np.ndarray) -> SideOperator:
    near = np.min(np.diff(tau)) / 8.0
    prob = VolterraProblem(tau, np.zeros_like(tau), lambda t, s: kernel_smooth(curve, t, s, near))
    return SideOperator(tau, prob.weight_matrix(), curve)


def split_forcing(law: PhaseLaw, xi: Interface, side: SideData):
    """Data-only forcing evaluators ``(N1_data, N2_data)`` in each side's own time."""
    check_law(law)
    a, g2 = -law.gamma0, law.gamma2
    lower, upper = xi.reflected(a), xi.rescaled(g2)
    mirror = side.u0_prime_mirror()
    return (lambda tau: data_term(lower, mirror, tau),
            lambda tau: data_term(upper, side.du0, tau))


@dataclass
class DataTerms:
    """Data-driven pieces sampled on the original time grid ``t``."""

    t: np.ndarray
    s: dict
    h: np.ndarray
    residue: np.ndarray


def _grid(nodes: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    vt = np.unique(np.concatenate([nodes, points]))
    return vt, np.searchsorted(vt, nodes), np.searchsorted(vt, points)


def build_data_terms(law: PhaseLaw, xi: Interface, side: SideData, t: np.ndarray, m0: float,
                     operators: dict | None = None) -> DataTerms:
    """``s1..s6`` and ``h`` on the increasing grid ``t`` (which must span ``[0, T]``).

    ``operators`` maps ``1`` and ``2`` to prebuilt :class:`SideOperator`
    objects (the discrete resolvents); they are built when omitted.
    """
    check_law(law)
    a, g2, T = -law.gamma0, law.gamma2, xi.T
    if operators is None:
        operators = {1: side_operator(xi.reflected(a), a * (T - t[::-1])),
                     2: side_operator(xi.rescaled(g2), g2 * t)}
    missing = [k for k in (1, 2) if k not in operators]
    if missing:
        raise ConfigurationError(f"resolvent operators missing for side(s) {missing}")
    N1, N2 = split_forcing(law, xi, side)
    op1, op2 = operators[1], operators[2]
    p1 = op1.split(N1(op1.tau))
    p2 = op2.split(N2(op2.tau))
    s = {
        "s1": a * p1["direct"][::-1], "s3": a * p1["kernel"][::-1], "s5": a * p1["resolvent"][::-1],
        "s2": -g2 * p2["direct"], "s4": -g2 * p2["kernel"], "s6": -g2 * p2["resolvent"],
    }
    total = sum(s.values())
    residue = xi.derivative(t) * trace_coefficient(law, m0)
    h = SQRT_PI * (residue - total)
    return DataTerms(t, s, h, residue)


@dataclass
class UnknownKernels:
    """Pointwise evaluators of the unknown-dependent kernels.

    ``k1(t, s)`` for ``s < t`` and ``k2(t, s)`` for ``s > t`` are the
    unit-diagonal Gaussian factors; ``T(t, s)`` is the regular remainder.
    """

    k1: Callable
    k2: Callable
    T: Callable
    law: PhaseLaw
    xi: Interface


def _elapsed_factor(xi: Interface, gamma: float) -> Callable:
    def k(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        d2 = (xi(s) - xi(t)) ** 2
        return np.exp(-d2 / (4.0 * gamma * np.maximum(s, 1e-300)))
    return k


def build_unknown_kernels(law: PhaseLaw, xi: Interface, s8_variant: str = "difference",
                          n_resolvent: int = 128, n_terms: int = 8, nq: int = 24) -> UnknownKernels:
    """Kernel evaluators of the Abel equation.

    ``s8_variant='elapsed'`` uses ``4 gamma2 s`` in the Gaussian of ``k1``
    instead of ``4 gamma2 (t - s)``.
    """
    check_law(law)
    if s8_variant not in S8_VARIANTS:
        raise ConfigurationError(f"s8_variant must be one of {S8_VARIANTS}, got {s8_variant!r}")
    a, g2, T = -law.gamma0, law.gamma2, xi.T
    if s8_variant == "difference":
        k1 = lambda t, s: gaussian_factor(xi, t, s, g2)
    else:
        k1 = _elapsed_factor(xi, g2)
    k2 = lambda t, s: gaussian_factor(xi, t, s, a)

    lower, upper = xi.reflected(a), xi.rescaled(g2)
    res = {}
    for key, curve in ((1, lower), (2, upper)):
        with np.errstate(all="ignore"):
            res[key] = resolvent_series(lambda t, s, c=curve: kernel_smooth(c, t, s), curve.T,
                                        n_resolvent, n_terms)
    interp = {}
    for key, series in res.items():
        interp[key] = [interpolate.RegularGridInterpolator((series.nodes, series.nodes), km)
                       for km in series.iterates[1:]]

    def resolvent_part(key, tau, sigma):
        """Scaled resolvent ``H(tau, sigma)`` times ``sqrt(tau - sigma)``."""
        curve = lower if key == 1 else upper
        d = np.maximum(tau - sigma, 0.0)
        out = kernel_smooth(curve, tau, sigma) / np.pi
        pts = np.column_stack([np.ravel(tau), np.ravel(sigma)])
        for m, f in enumerate(interp[key], start=2):
            out = out + f(pts).reshape(np.shape(tau)) * d ** ((m - 1) / 2.0)
        return out

    x, w = _gauss_jacobi(nq, -0.5, -0.5)

    def T_eval(t, s):
        t, s = float(t), float(s)
        if t == s:
            raise ValueError("regular kernel is evaluated off the diagonal only")
        lo, hi = min(t, s), max(t, s)
        half = 0.5 * (hi - lo)
        y = lo + half * (1.0 + x)
        if s < t:
            # sqrt(gamma2) int_s^t H2(g2 t, g2 y) E2(y, s) / sqrt(y - s) dy
            tau, sig = g2 * t + 0 * y, g2 * y
            Hs = resolvent_part(2, tau, sig) / np.sqrt(g2)
            val = np.sqrt(g2) * np.sum(w * Hs * gaussian_factor(xi, y, s, g2))
            return val - SQRT_PI * xi.derivative(t) * (1.0 / g2 + 1.0 / a)
        tau, sig = a * (T - t) + 0 * y, a * (T - y)
        Hs = resolvent_part(1, tau, sig) / np.sqrt(a)
        return -np.sqrt(a) * np.sum(w * Hs * gaussian_factor(xi, y, s, a))

    return UnknownKernels(k1, k2, T_eval, law, xi)


@dataclass
class AbelSystem:
    """Collocation form of the Abel equation for ``psi*`` nodal values.

    Rows are collocation points, columns hat functions on ``nodes``.
    ``left``/``right`` are the singular parts with their coefficients
    ``1/sqrt(gamma2)`` and ``-1/sqrt|gamma0|`` already applied.
    """

    nodes: np.ndarray
    points: np.ndarray
    point_weights: np.ndarray
    weight: str
    left: np.ndarray
    right: np.ndarray
    regular: np.ndarray
    h: np.ndarray
    m0: float
    coefficients: tuple
    law: PhaseLaw | None = None
    xi: Interface | None = None
    data: DataTerms | None = None
    kernels: UnknownKernels | None = None
    meta: dict = field(default_factory=dict)

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def matrix(self) -> np.ndarray:
        return self.left + self.right + self.regular

    @property
    def dominant(self) -> np.ndarray:
        return self.left + self.right

    @property
    def is_dominant(self) -> bool:
        return bool(self.meta.get("dominant", False))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def with_forcing(self, h: np.ndarray) -> "AbelSystem":
        out = AbelSystem(**{**self.__dict__})
        out.h = np.asarray(h, dtype=float)
        return out

    def scaled(self, factor: float) -> "AbelSystem":
        out = AbelSystem(**{**self.__dict__})
        out.left, out.right, out.regular = factor * self.left, factor * self.right, factor * self.regular
        out.h = factor * self.h
        return out

    def dump(self, directory) -> list[Path]:
        """Write ``abel_system.json`` plus CSV samples; returns the written paths."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        meta = {
            "n_nodes": int(self.nodes.size), "n_points": int(self.points.size),
            "weight": self.weight if isinstance(self.weight, str) else list(self.weight),
            "m0": self.m0,
            "coefficients": list(self.coefficients),
            "law": self.law.to_dict() if self.law else None,
            "interface": self.xi.to_dict() if self.xi else None,
            **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool))},
        }
        paths = [d / "abel_system.json", d / "abel_forcing.csv", d / "abel_nodes.csv",
                 d / "abel_matrix.csv"]
        paths[0].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        with open(paths[1], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["t", "weight", "h"]
            extra = []
            if self.data is not None:
                idx = np.searchsorted(self.data.t, self.points)
                extra = sorted(self.data.s)
                cols += extra
            w.writerow(cols)
            for i, p in enumerate(self.points):
                row = [repr(float(p)), repr(float(self.point_weights[i])), repr(float(self.h[i]))]
                row += [repr(float(self.data.s[k][idx[i]])) for k in extra]
                w.writerow(row)
        with open(paths[2], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"])
            w.writerows([[repr(float(x))] for x in self.nodes])
        np.savetxt(paths[3], self.matrix, delimiter=",", fmt="%.17g")
        return paths


def dominant_system(gamma2: float, gamma0: float, nodes, weight: str = "both",
                    left_coef: float | None = None, right_coef: float | None = None,
                    h=None) -> AbelSystem:
    """Constant-kernel system; coefficients default to ``1/sqrt(gamma2)``, ``-1/sqrt|gamma0|``."""
    if not (gamma2 > 0 and gamma0 < 0):
        raise ValidationError(f"need gamma2 > 0 > gamma0, got {gamma2}, {gamma0}")
    nodes = np.asarray(nodes, dtype=float)
    pts, pw = collocation_points(nodes)
    cl = 1.0 / np.sqrt(gamma2) if left_coef is None else left_coef
    cr = -1.0 / np.sqrt(-gamma0) if right_coef is None else right_coef
    L = cl * abel_matrix(pts, nodes, "left", weight=weight) if cl else np.zeros((pts.size, nodes.size))
    R = cr * abel_matrix(pts, nodes, "right", weight=weight) if cr else np.zeros((pts.size, nodes.size))
    hv = np.zeros(pts.size) if h is None else (h(pts) if callable(h) else np.asarray(h, dtype=float))
    return AbelSystem(nodes, pts, pw, weight, L, R, np.zeros_like(L), hv, 0.0, (cl, cr),
                      meta={"dominant": True})


def assemble(law: PhaseLaw, xi: Interface, side: SideData, m0: float | None = None,
             n: int = 256, weight: str = "both", s8_variant: str = "difference",
             nodes: np.ndarray | None = None, with_kernels: bool = False) -> AbelSystem:
    """Assemble the collocation system on ``n`` graded elements of ``[0, T]``."""
    check_law(law)
    if s8_variant not in S8_VARIANTS:
        raise ConfigurationError(f"s8_variant must be one of {S8_VARIANTS}, got {s8_variant!r}")
    a, g2, T = -law.gamma0, law.gamma2, xi.T
    weight = resolve_weight(law, weight)
    nodes = graded_nodes(n, T) if nodes is None else np.asarray(nodes, dtype=float)
    m0 = default_m0(law, side) if m0 is None else float(m0)
    pts, pw = collocation_points(nodes)
    vt, inode, ipt = _grid(nodes, pts)

    lower, upper = xi.reflected(a), xi.rescaled(g2)
    op1 = side_operator(lower, a * (T - vt[::-1]))
    op2 = side_operator(upper, g2 * vt)
    data = build_data_terms(law, xi, side, vt, m0, {1: op1, 2: op2})

    E2 = lambda t, s: gaussian_factor(xi, t, s, g2)
    E1 = lambda t, s: gaussian_factor(xi, t, s, a)
    k1 = E2 if s8_variant == "difference" else _elapsed_factor(xi, g2)
    left = abel_matrix(pts, nodes, "left", kernel=k1, weight=weight) / np.sqrt(g2)
    right = -abel_matrix(pts, nodes, "right", kernel=E1, weight=weight) / np.sqrt(a)

    # m'-parts of the forcings, on each side's own time grid
    N2m = -(SQRT_PI / g2 ** 1.5) * abel_matrix(vt, nodes, "left", kernel=E2, weight=weight)
    N1m = -(SQRT_PI / a ** 1.5) * abel_matrix(vt, nodes, "right", kernel=E1, weight=weight)[::-1]
    reg2 = -g2 * (op2.solve(op2.W @ N2m) / np.pi)
    reg1 = a * (op1.solve(op1.W @ N1m) / np.pi)[::-1]
    C = cumulative_hat_integrals(pts, nodes, weight)
    regular = SQRT_PI * (reg2[ipt] + reg1[ipt]) \
        - SQRT_PI * (xi.derivative(pts) * (1.0 / g2 + 1.0 / a))[:, None] * C

    kernels = build_unknown_kernels(law, xi, s8_variant) if with_kernels else None
    return AbelSystem(nodes, pts, pw, weight, left, right, regular, data.h[ipt], m0,
                      (1.0 / np.sqrt(g2), -1.0 / np.sqrt(a)), law, xi,
                      DataTerms(pts, {k: v[ipt] for k, v in data.s.items()}, data.h[ipt], data.residue[ipt]),
                      kernels, {"s8_variant": s8_variant, "dominant": False})
