"""Least-squares collocation solver for the two-sided Abel equation."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .abel_assembly import AbelSystem
from .errors import SingularSystemError, ValidationError
from scipy import linalg

from .quadrature import basis_weight, cumulative_hat_integrals, hat_integrals

COND_LIMIT = 1e14
NULL_TOL = 1e-8


@dataclass
class WeightedDensity:
    """``m'(t) = psi*(t) w(t)`` with ``psi*`` piecewise linear on ``nodes``."""

    nodes: np.ndarray
    coeffs: np.ndarray
    weight: str = "both"
    m0: float = 0.0

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    def psi(self, t):
        return np.interp(t, self.nodes, self.coeffs)

    def __call__(self, t):
        """``m'(t)``; infinite at a weighted endpoint unless ``psi*`` vanishes there."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.psi(t) * basis_weight(t, self.T, self.weight)

    def integral(self, t):
        """``int_0^t m'(s) ds`` (exact for the piecewise-linear ``psi*``)."""
        t = np.asarray(t, dtype=float)
        out = cumulative_hat_integrals(np.atleast_1d(t), self.nodes, self.weight) @ self.coeffs
        return out.reshape(t.shape)

    def m(self, t):
        return self.m0 + self.integral(t)

    @classmethod
    def interpolate(cls, func, nodes, weight: str = "both", m0: float = 0.0) -> "WeightedDensity":
        """Represent a given ``m'`` by sampling ``psi* = m' / w`` at the nodes."""
        nodes = np.asarray(nodes, dtype=float)
        T = nodes[-1]
        inner = nodes[1:-1]
        psi = np.empty_like(nodes)
        psi[1:-1] = func(inner) / basis_weight(inner, T, weight)
        # endpoint values by linear extrapolation of psi* from the interior
        psi[0] = psi[1] + (psi[1] - psi[2]) * (nodes[1] - nodes[0]) / (nodes[2] - nodes[1])
        psi[-1] = psi[-2] + (psi[-2] - psi[-3]) * (nodes[-1] - nodes[-2]) / (nodes[-2] - nodes[-3])
        if weight == "none" or weight == "right":
            psi[0] = func(nodes[:1])[0] / basis_weight(nodes[:1], T, weight)[0]
        if weight == "none" or weight == "left":
            psi[-1] = func(nodes[-1:])[0] / basis_weight(nodes[-1:], T, weight)[0]
        return cls(nodes, psi, weight, m0)

    def write_csv(self, path, t=None) -> None:
        t = self.nodes if t is None else np.asarray(t, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            mp = np.nan_to_num(self(t), nan=0.0, posinf=np.inf, neginf=-np.inf)
        m = self.m(t)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "m_prime", "m"])
            for row in zip(t, mp, m):
                w.writerow([repr(float(x)) for x in row])


@dataclass
class SolveReport:
    residual: float
    condition: float
    near_null: int
    adjoint_defects: list = field(default_factory=list)
    regularization: float = 0.0
    singular_values: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        d = asdict(self)
        d["singular_values"] = [float(x) for x in self.singular_values]
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


def _weighted(system: AbelSystem, h: np.ndarray):
    rw = np.sqrt(system.point_weights)
    return system.matrix * rw[:, None], h * rw, rw


def _svd(A):
    return np.linalg.svd(A, full_matrices=False)


def _ridge(U, s, Vt, b, lam):
    return Vt.T @ ((s / (s * s + lam)) * (U.T @ b))


def _residual(system: AbelSystem, psi, h) -> float:
    r = system.matrix @ psi - h
    w = system.point_weights
    den = np.sqrt(np.sum(w * h * h))
    num = np.sqrt(np.sum(w * r * r))
    return float(num / den) if den > 0 else float(num)


def _defects(U, s, b, tol):
    smax = s[0] if s.size else 0.0
    idx = np.nonzero(s < tol * smax)[0]
    return [float(abs(U[:, i] @ b)) for i in idx]


def total_increment_row(system: AbelSystem) -> np.ndarray:
    """Row ``c`` with ``c @ psi = int_0^T m'``."""
    return hat_integrals(system.nodes, system.weight)


def solve_full(system: AbelSystem, h=None, regularization: float | None = None,
               relative: bool = True, terminal: float | None = None) -> tuple[WeightedDensity, SolveReport]:
    """Ridge least-squares solve of the collocation system.

    ``regularization`` is ``lambda`` (relative to ``sigma_max**2`` when
    ``relative``); ``None`` selects the default ``1e-10``. With
    ``lambda = 0`` an ill-conditioned matrix raises
    :class:`SingularSystemError`. ``terminal`` imposes ``m(T) = terminal``
    exactly; the least-squares problem is then solved on the affine
    subspace of coefficient vectors meeting it.
    """
    h = system.h if h is None else np.asarray(h, dtype=float)
    if h.shape != system.points.shape:
        raise ValidationError(f"forcing has shape {h.shape}, expected {system.points.shape}")
    A, b, _ = _weighted(system, h)
    shift = np.zeros(system.nodes.size)
    basis = None
    if terminal is not None:
        c = total_increment_row(system)
        shift = c * (terminal - system.m0) / (c @ c)
        basis = linalg.null_space(c[None, :])
        b = b - A @ shift
        A = A @ basis
    U, s, Vt = _svd(A)
    smax = float(s[0])
    cond = float(smax / s[-1]) if s[-1] > 0 else float("inf")
    lam_rel = 1e-10 if regularization is None else float(regularization)
    if lam_rel < 0:
        raise ValidationError("regularization must be nonnegative")
    lam = lam_rel * smax ** 2 if relative else lam_rel
    if lam == 0 and cond > COND_LIMIT:
        raise SingularSystemError(
            f"collocation matrix condition {cond:.3e} exceeds {COND_LIMIT:.0e}; use regularization > 0", cond)
    psi = _ridge(U, s, Vt, b, lam)
    if basis is not None:
        psi = shift + basis @ psi
    report = SolveReport(_residual(system, psi, h), cond, int(np.sum(s < NULL_TOL * smax)),
                         _defects(U, s, b, NULL_TOL), lam, s.tolist())
    if report.near_null:
        report.notes.append(f"{report.near_null} singular value(s) below {NULL_TOL:g} sigma_max")
    return WeightedDensity(system.nodes, psi, system.weight, system.m0), report


def solve_dominant(system: AbelSystem, h=None, regularization: float = 0.0) -> WeightedDensity:
    """Solve a constant-kernel system (see ``dominant_system``)."""
    if not system.is_dominant or np.any(system.regular):
        raise ValidationError("solve_dominant needs a constant-kernel system without regular part")
    density, _ = solve_full(system, h, regularization)
    return density


def probe_null_space(system: AbelSystem, h=None, tol: float = NULL_TOL) -> SolveReport:
    """SVD diagnostics: near-null count and solvability defects of the adjoint vectors."""
    h = system.h if h is None else np.asarray(h, dtype=float)
    A, b, _ = _weighted(system, h)
    U, s, Vt = _svd(A)
    smax = float(s[0])
    cond = float(smax / s[-1]) if s[-1] > 0 else float("inf")
    return SolveReport(float("nan"), cond, int(np.sum(s < tol * smax)), _defects(U, s, b, tol), 0.0,
                       s.tolist())
