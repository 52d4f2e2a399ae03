"""Dirichlet-to-Neumann map of the heat equation on ``{x > xi(t)}``.

The boundary flux ``f(t) = u_x(xi(t), t)`` solves the second-kind Volterra
equation

    pi f(t) = N(t) + int_0^t K(t, s) f(s) ds,

with ``K(t, s) = k(t, s) / sqrt(t - s)`` weakly singular. The stable side
is handled by a time rescaling, the unstable (backward) side by reflecting
space and reversing time so that only forward problems are solved.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import linalg, special

from .curves import Interface, SideData
from .errors import DomainError, NumericalBreakdown
from .phase_model import PhaseLaw
from .quadrature import _gauss_jacobi, jacobi_moments, sqrt_weights

SQRT_PI = np.sqrt(np.pi)
_Y_CUT = 6.1  # exp(-6.1**2) < 1e-16


def _quotient(xi: Interface, t, s, near: float = 0.0):
    """Difference quotient of ``xi``, replaced by ``xi'(t)`` when ``t - s <= near``."""
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    d = t - s
    close = np.abs(d) <= near
    safe = np.where(close, 1.0, d)
    q = (xi(t) - xi(s)) / safe
    return np.where(close, xi.derivative(t), q), d


def gaussian_factor(xi: Interface, t, s, diffusivity: float = 1.0, near: float = 0.0):
    """``exp(-(xi(t) - xi(s))**2 / (4 D |t - s|))``, equal to 1 on the diagonal."""
    q, d = _quotient(xi, t, s, near)
    return np.exp(-q * q * np.abs(d) / (4.0 * diffusivity))


def kernel_smooth(xi: Interface, t, s, near: float = 0.0):
    """``sqrt(t - s) * K(t, s)``; bounded, with diagonal value ``(sqrt(pi)/2) xi'(t)``."""
    q, d = _quotient(xi, t, s, near)
    return 0.5 * SQRT_PI * q * np.exp(-q * q * d / 4.0)


def kernel_K(xi: Interface, t: float, s: float) -> float:
    """Volterra kernel at ``s < t``."""
    if not s < t:
        raise DomainError(f"kernel_K needs s < t, got t={t}, s={s}")
    return float(kernel_smooth(xi, t, s) / np.sqrt(t - s))


def data_term(xi: Interface, q0_prime: Callable, t, panels: int = 24, order: int = 8):
    """``(sqrt(pi)/sqrt(t)) int_0^inf exp(-(xi(t) - x)**2 / 4t) q0'(x) dx`` for each ``t``.

    Substituting ``x = xi(t) + 2 sqrt(t) y`` turns this into
    ``2 sqrt(pi) int_{y0}^inf exp(-y**2) q0'(xi + 2 sqrt(t) y) dy``, which is
    truncated once ``exp(-y**2) < 1e-16`` and done by composite Gauss-Legendre.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rt = np.sqrt(t)
    x0 = xi(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        y0 = np.where(rt > 0, -x0 / (2.0 * np.where(rt > 0, rt, 1.0)), 0.0)
    y1 = np.maximum(_Y_CUT, y0 + 1.0)
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    u = (0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * np.diff(edges)[:, None] * xg[None, :]).ravel()
    wu = (0.5 * np.diff(edges)[:, None] * wg[None, :]).ravel()
    y = y0[:, None] + (y1 - y0)[:, None] * u[None, :]
    x = np.maximum(x0[:, None] + 2.0 * rt[:, None] * y, 0.0)
    vals = np.exp(-y * y) * q0_prime(x)
    out = 2.0 * SQRT_PI * (y1 - y0) * (vals @ wu)
    if not np.all(np.isfinite(out)):
        from .errors import DataError
        raise DataError("initial-data integral is not finite; check the decay of q0'")
    return out


def boundary_term(xi: Interface, g0_prime: Callable, t, nq: int = 48):
    """``sqrt(pi) int_0^t E(t, s) g0'(s) / sqrt(t - s) ds`` by Gauss-Jacobi product integration."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x, w = _gauss_jacobi(nq, -0.5, 0.0)
    s = 0.5 * t[:, None] * (1.0 + x[None, :])
    tt = np.broadcast_to(t[:, None], s.shape)
    vals = gaussian_factor(xi, tt, s) * g0_prime(s)
    return SQRT_PI * np.sqrt(0.5 * t) * (vals @ w)


def forcing_N(xi: Interface, q0_prime: Callable, g0_prime: Callable, t):
    """Forcing of the Volterra equation: data term minus boundary term."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > xi.T * (1 + 1e-12)):
        raise DomainError(f"forcing_N needs t in [0, {xi.T}]")
    out = data_term(xi, q0_prime, t) - boundary_term(xi, g0_prime, t)
    return out[0] if t.ndim == 0 else out


@dataclass(frozen=True)
class VolterraProblem:
    """``coefficient * f = N + int_0^t k(t, s) f(s) / sqrt(t - s) ds`` on ``nodes``."""

    nodes: np.ndarray
    forcing: np.ndarray
    smooth_kernel: Callable
    coefficient: float = np.pi

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @classmethod
    def on_curve(cls, xi: Interface, q0_prime: Callable, g0_prime: Callable, nodes) -> "VolterraProblem":
        nodes = np.asarray(nodes, dtype=float)
        near = np.min(np.diff(nodes)) / 8.0
        return cls(nodes, forcing_N(xi, q0_prime, g0_prime, nodes),
                   lambda t, s: kernel_smooth(xi, t, s, near))

    def kernel_matrix(self) -> np.ndarray:
        t = self.nodes
        k = self.smooth_kernel(t[:, None], t[None, :])
        k = np.where(t[:, None] >= t[None, :], k, 0.0)
        if not np.all(np.isfinite(k)):
            raise NumericalBreakdown("kernel is not bounded by C / sqrt(t - s) on the grid")
        return k

    def weight_matrix(self) -> np.ndarray:
        """``W[i, j]``: product-integration weights of ``K`` (lower triangular)."""
        return self.kernel_matrix() * sqrt_weights(self.nodes)


def solve_volterra_second_kind(problem: VolterraProblem) -> np.ndarray:
    """March the discrete equation ``(pi I - W) f = N`` forward in time."""
    if problem.nodes.size < 2:
        raise DomainError("need at least two grid nodes")
    A = problem.coefficient * np.eye(problem.nodes.size) - problem.weight_matrix()
    diag = np.abs(np.diag(A))
    if np.min(diag) < 1e-12:
        i = int(np.argmin(diag))
        raise NumericalBreakdown(f"marching system singular at t={problem.nodes[i]} (|pi - w_ii| = {diag[i]:.3e})")
    return linalg.solve_triangular(A, np.asarray(problem.forcing, dtype=float), lower=True)


def dtn_flux(xi: Interface, q0_prime: Callable, g0_prime: Callable, nodes) -> np.ndarray:
    """Flux ``u_x(xi(t)+, t)`` of the forward heat problem on ``{x > xi(t)}``."""
    return solve_volterra_second_kind(VolterraProblem.on_curve(xi, q0_prime, g0_prime, nodes))


def dtn_stable_side(law: PhaseLaw, xi: Interface, u0_prime: Callable, g0_plus_prime: Callable,
                    nodes) -> np.ndarray:
    """``f+(t) = u+_x(xi(t)+, t)`` for ``u_t = gamma2 u_xx`` right of the interface."""
    g2 = law.gamma2
    nodes = np.asarray(nodes, dtype=float)
    curve = xi.rescaled(g2) if g2 != 1.0 else xi
    return dtn_flux(curve, u0_prime, lambda s: g0_plus_prime(np.asarray(s) / g2) / g2, g2 * nodes)


def dtn_unstable_side(law: PhaseLaw, xi: Interface, uT_prime: Callable, g0_minus_prime: Callable,
                      nodes) -> np.ndarray:
    """``f-(t) = u-_x(xi(t)-, t)`` for the backward equation ``u_t = gamma0 u_xx`` left of the interface.

    With ``a = |gamma0|`` and ``theta(y, tau) = u-(K - y, T - tau/a)`` the
    problem becomes a forward one on ``{y > K - xi(T - tau/a)}``.
    """
    a = -law.gamma0
    nodes = np.asarray(nodes, dtype=float)
    T, K = xi.T, xi.K
    curve = xi.reflected(a)
    tau = a * (T - nodes[::-1])
    f1 = dtn_flux(curve, lambda x: -uT_prime(K - np.asarray(x)),
                  lambda s: -g0_minus_prime(T - np.asarray(s) / a) / a, tau)
    return -f1[::-1]


def dtn_both_sides(law: PhaseLaw, xi: Interface, side: SideData, g_minus_prime: Callable,
                   g_plus_prime: Callable, nodes) -> tuple[np.ndarray, np.ndarray]:
    return (dtn_unstable_side(law, xi, side.duT, g_minus_prime, nodes),
            dtn_stable_side(law, xi, side.du0, g_plus_prime, nodes))


def write_flux_csv(path, t, f) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "f"])
        for a, b in zip(t, f):
            w.writerow([repr(float(a)), repr(float(b))])


# -- resolvent (Neumann series) path --------------------------------------

@dataclass
class ResolventSeries:
    """Iterated kernels ``H_m = k_m(t, s) (t - s)**(m/2 - 1)`` on a uniform grid.

    ``iterates[m-1]`` holds ``k_m`` (bounded) for the kernel scaled by
    ``scale``; ``H_1`` is the scaled kernel itself.
    """

    nodes: np.ndarray
    iterates: list
    M: float
    scale: float
    bound_terms: np.ndarray
    converged: bool
    notes: list = field(default_factory=list)

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def bound(self, m: int) -> float:
        """Sup bound on ``k_m``: ``M**m pi**(m/2) / Gamma(m/2)``."""
        return float(self.M ** m * np.pi ** (m / 2.0) / special.gamma(m / 2.0))

    def H(self, m: int) -> np.ndarray:
        """``H_m`` on grid pairs ``i > j`` (zero elsewhere)."""
        t = self.nodes
        d = t[:, None] - t[None, :]
        with np.errstate(divide="ignore"):
            p = np.where(d > 0, np.abs(d) ** (m / 2.0 - 1.0), 0.0)
        return self.iterates[m - 1] * p

    def resolvent(self) -> np.ndarray:
        return sum(self.H(m) for m in range(1, len(self.iterates) + 1))

    def G(self) -> np.ndarray:
        """Part of the resolvent beyond the first iterate, on grid pairs ``i > j``."""
        return sum(self.H(m) for m in range(2, len(self.iterates) + 1))

    def apply(self, F: np.ndarray) -> np.ndarray:
        """``int_0^{t_i} H(t_i, s) F(s) ds`` by per-iterate product integration."""
        n = self.nodes.size
        h = self.h
        out = np.zeros(n)
        for m, km in enumerate(self.iterates, start=1):
            q = m / 2.0 - 1.0
            for i in range(1, n):
                w = jacobi_moments(i, 0.0, q) * h ** (q + 1.0)
                out[i] += np.dot(w, km[i, :i + 1] * F[:i + 1])
        return out


def resolvent_series(smooth_kernel: Callable, T: float, n_intervals: int, n_terms: int = 8,
                     scale: float = 1.0 / np.pi) -> ResolventSeries:
    """Neumann series of ``scale * K`` with ``K = k / sqrt(t - s)``.

    Each iterate is computed on a uniform grid from the recursion
    ``k_m(t, s) (t-s)**(m/2-1) = int_s^t k_1(t, z) (t-z)**-1/2 k_{m-1}(z, s) (z-s)**((m-1)/2-1) dz``
    with product weights exact for piecewise-linear ``k_1 k_{m-1}``.
    """
    t = np.linspace(0.0, T, n_intervals + 1)
    h = t[1] - t[0]
    k1 = scale * smooth_kernel(t[:, None], t[None, :])
    k1 = np.where(t[:, None] >= t[None, :], k1, 0.0)
    M = float(np.max(np.abs(k1)))
    iterates = [k1]
    n = t.size
    for m in range(2, n_terms + 1):
        prev = iterates[-1]
        km = np.zeros_like(k1)
        p = (m - 1) / 2.0 - 1.0
        for off in range(1, n):
            w = jacobi_moments(off, p, -0.5)
            j = np.arange(0, n - off)
            r = np.arange(off + 1)
            F = k1[(j + off)[:, None], j[:, None] + r[None, :]] * prev[j[:, None] + r[None, :], j[:, None]]
            km[j + off, j] = (F @ w) / off ** (m / 2.0 - 1.0)
        diag = np.diag(k1) ** m * np.pi ** (m / 2.0) / special.gamma(m / 2.0)
        km[np.arange(n), np.arange(n)] = diag
        iterates.append(km)
    terms = np.array([M ** m * np.pi ** (m / 2.0) / special.gamma(m / 2.0) * T ** (m / 2.0)
                      for m in range(1, n_terms + 1)])
    converged = bool(terms[-1] < terms[-2]) if n_terms >= 2 else True
    series = ResolventSeries(t, iterates, M, scale, terms, converged)
    if not converged:
        msg = (f"resolvent tail bound is not decreasing at {n_terms} terms "
               f"(M={M:.3g}, T={T:.3g}); series path disabled")
        series.notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return series


def solve_via_resolvent(problem: VolterraProblem, n_terms: int = 12) -> np.ndarray:
    """``f = L + int H L`` with ``L = N / pi`` and ``H`` the series resolvent of ``K / pi``.

    Needs a uniform grid starting at 0.
    """
    t = problem.nodes
    if not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0):
        raise DomainError("resolvent path needs a uniform grid")
    series = resolvent_series(problem.smooth_kernel, t[-1], t.size - 1, n_terms,
                              scale=1.0 / problem.coefficient)
    if not series.converged:
        raise NumericalBreakdown(series.notes[-1])
    L = np.asarray(problem.forcing, dtype=float) / problem.coefficient
    return L + series.apply(L)
