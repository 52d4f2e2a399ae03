"""Piecewise-linear cubic-type constitutive law and its entropy primitives.

The law has three affine branches::

    phi(u) = gamma1*u + delta1   for u <= b          (stable, branch 1)
             gamma0*u + delta0   for b < u < c       (unstable, branch 0)
             gamma2*u + delta2   for u >= c          (stable, branch 2)

with ``gamma1, gamma2 > 0 > gamma0``, local max ``B = phi(b)`` and local
min ``A = phi(c) < B``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, ValidationError

_CONTINUITY_TOL = 1e-12


@dataclass(frozen=True)
class Branch:
    """One monotone branch ``u -> gamma*u + delta`` on ``[u_lo, u_hi]``."""

    index: int
    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float
    gamma: float
    delta: float

    def contains_v(self, v, tol: float = 0.0):
        v = np.asarray(v, dtype=float)
        return (v >= self.v_lo - tol) & (v <= self.v_hi + tol)


@dataclass(frozen=True)
class PhaseLaw:
    gamma0: float
    gamma1: float
    gamma2: float
    delta0: float
    delta1: float
    delta2: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValidationError(
                f"stable slopes must be positive: gamma1={self.gamma1}, gamma2={self.gamma2}")
        if not self.gamma0 < 0:
            raise ValidationError(f"unstable slope must be negative: gamma0={self.gamma0}")
        if not self.b < self.c:
            raise ValidationError(f"need b < c, got b={self.b}, c={self.c}")
        scale = 1.0 + abs(self.A) + abs(self.B)
        left = abs(self.gamma1 * self.b + self.delta1 - (self.gamma0 * self.b + self.delta0))
        right = abs(self.gamma0 * self.c + self.delta0 - (self.gamma2 * self.c + self.delta2))
        if left > _CONTINUITY_TOL * scale or right > _CONTINUITY_TOL * scale:
            raise ValidationError(
                f"law is discontinuous: jump {left:.3e} at b, {right:.3e} at c")
        if not self.A < self.B:
            raise ValidationError(f"need A < B, got A={self.A}, B={self.B}")

    @classmethod
    def from_critical(cls, b: float, c: float, A: float, B: float,
                      gamma1: float = 1.0, gamma2: float = 1.0) -> "PhaseLaw":
        """Build the law from the phase boundaries, critical values and stable slopes."""
        gamma0 = (A - B) / (c - b)
        return cls(gamma0=gamma0, gamma1=gamma1, gamma2=gamma2,
                   delta0=B - gamma0 * b, delta1=B - gamma1 * b, delta2=A - gamma2 * c,
                   b=b, c=c)

    @classmethod
    def reference(cls) -> "PhaseLaw":
        """Canonical test law: b=0, c=1, A=0, B=1 with unit stable slopes."""
        return cls.from_critical(b=0.0, c=1.0, A=0.0, B=1.0)

    @property
    def A(self) -> float:
        return self.gamma2 * self.c + self.delta2

    @property
    def B(self) -> float:
        return self.gamma1 * self.b + self.delta1

    def branch(self, i: int) -> Branch:
        if i == 1:
            return Branch(1, -np.inf, self.b, -np.inf, self.B, self.gamma1, self.delta1)
        if i == 0:
            return Branch(0, self.b, self.c, self.A, self.B, self.gamma0, self.delta0)
        if i == 2:
            return Branch(2, self.c, np.inf, self.A, np.inf, self.gamma2, self.delta2)
        raise DomainError(f"branch index must be 0, 1 or 2, got {i}")

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("gamma0", "gamma1", "gamma2", "delta0", "delta1", "delta2", "b", "c")}

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseLaw":
        keys = ("gamma0", "gamma1", "gamma2", "delta0", "delta1", "delta2", "b", "c")
        missing = [k for k in keys if k not in data]
        if missing:
            raise ValidationError(f"phase law is missing keys {missing}")
        extra = set(data) - set(keys)
        if extra:
            raise ValidationError(f"unexpected phase law keys {sorted(extra)} (A, B are derived)")
        return cls(**{k: float(data[k]) for k in keys})

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "PhaseLaw":
        return cls.from_dict(json.loads(Path(path).read_text()))


def phi(law: PhaseLaw, u):
    """Evaluate the constitutive function; vectorized over ``u``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u <= law.b, law.gamma1 * u + law.delta1,
                   np.where(u >= law.c, law.gamma2 * u + law.delta2,
                            law.gamma0 * u + law.delta0))
    return out[()] if out.ndim == 0 else out


def branch_inverse(law: PhaseLaw, i: int, v, tol: float = 0.0):
    """Invert branch ``i`` at ``v``; raises DomainError outside its range."""
    br = law.branch(i)
    v = np.asarray(v, dtype=float)
    ok = br.contains_v(v, tol)
    if not np.all(ok):
        bad = np.atleast_1d(v)[~np.atleast_1d(ok)][0]
        raise DomainError(
            f"v={bad!r} outside the range [{br.v_lo}, {br.v_hi}] of branch {i}")
    out = (v - br.delta) / br.gamma
    return out[()] if out.ndim == 0 else out


class MonotoneFunction:
    """Piecewise-linear function with linear extrapolation beyond its knots.

    Used as the entropy test function ``g``; the constructor rejects
    decreasing data.
    """

    def __init__(self, knots, values, left_slope: float = 0.0, right_slope: float = 0.0,
                 name: str | None = None):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.knots.ndim != 1 or self.knots.shape != self.values.shape or self.knots.size == 0:
            raise ValidationError("knots and values must be matching non-empty 1-d arrays")
        if np.any(np.diff(self.knots) <= 0):
            raise ValidationError("knots must be strictly increasing")
        if np.any(np.diff(self.values) < 0) or left_slope < 0 or right_slope < 0:
            raise ValidationError("g must be nondecreasing")
        self.left_slope = float(left_slope)
        self.right_slope = float(right_slope)
        self.name = name or "g"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.interp(s, self.knots, self.values)
        out = np.where(s < self.knots[0],
                       self.values[0] + self.left_slope * (s - self.knots[0]), out)
        out = np.where(s > self.knots[-1],
                       self.values[-1] + self.right_slope * (s - self.knots[-1]), out)
        return out[()] if out.ndim == 0 else out

    def __repr__(self):
        return f"MonotoneFunction({self.name})"

    @classmethod
    def constant(cls, value: float = 1.0) -> "MonotoneFunction":
        return cls([0.0], [value], name=f"const({value:g})")

    @classmethod
    def ramp(cls, w: float) -> "MonotoneFunction":
        """``max(s - w, 0)``."""
        return cls([w, w + 1.0], [0.0, 1.0], right_slope=1.0, name=f"ramp({w:.6g})")

    @classmethod
    def normalized_identity(cls, A: float, B: float) -> "MonotoneFunction":
        """``(s - A) / (B - A)``."""
        slope = 1.0 / (B - A)
        return cls([A, B], [0.0, 1.0], left_slope=slope, right_slope=slope,
                   name="normalized_identity")


def _check_monotone(g: Callable, lo: float, hi: float, n: int = 257) -> None:
    s = np.linspace(lo, hi, n)
    gs = np.asarray([g(x) for x in s], dtype=float)
    scale = 1.0 + np.max(np.abs(gs))
    if np.any(np.diff(gs) < -1e-12 * scale):
        raise ValidationError("entropy test function g is not nondecreasing")


def _phi_preimages(law: PhaseLaw, w: float) -> list[float]:
    pts = []
    if w <= law.B:
        pts.append((w - law.delta1) / law.gamma1)
    if law.A <= w <= law.B:
        pts.append((w - law.delta0) / law.gamma0)
    if w >= law.A:
        pts.append((w - law.delta2) / law.gamma2)
    return pts


def _G_scalar(law: PhaseLaw, g, k: float, u: float) -> float:
    if u == k:
        return 0.0
    lo, hi = (k, u) if u > k else (u, k)
    sign = 1.0 if u > k else -1.0
    if isinstance(g, MonotoneFunction):
        # g o phi is piecewise linear in s: trapezoid is exact between kinks
        cuts = [law.b, law.c]
        for kn in g.knots:
            cuts.extend(_phi_preimages(law, kn))
        pts = np.unique(np.array([lo, hi] + [x for x in cuts if lo < x < hi]))
        vals = g(phi(law, pts))
        return sign * float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))
    brk = [x for x in (law.b, law.c) if lo < x < hi]
    val, _ = integrate.quad(lambda s: g(phi(law, s)), lo, hi, points=brk or None,
                            epsrel=1e-10, epsabs=0.0, limit=200)
    return sign * val


def _G_piecewise(law: PhaseLaw, g: "MonotoneFunction", k: float, u: np.ndarray) -> np.ndarray:
    """Exact ``G`` for piecewise-linear ``g``: ``g o phi`` is linear between the breakpoints."""
    cuts = [law.b, law.c, k]
    for kn in g.knots:
        cuts.extend(_phi_preimages(law, kn))
    bp = np.unique(np.array(cuts, dtype=float))
    fb = g(phi(law, bp))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (fb[1:] + fb[:-1]) * np.diff(bp))])
    i = np.clip(np.searchsorted(bp, u, side="right") - 1, 0, bp.size - 1)
    fu = g(phi(law, u))
    C = cum[i] + 0.5 * (fb[i] + fu) * (u - bp[i])
    ik = int(np.searchsorted(bp, k))
    return C - cum[ik]


def entropy_G(law: PhaseLaw, g, u, k: float | None = None, check: bool = True):
    """``G(u) = int_k^u g(phi(s)) ds`` for a nondecreasing ``g``.

    ``k`` defaults to ``c``. Exact for :class:`MonotoneFunction` ``g``,
    adaptive quadrature (rtol 1e-10) otherwise.
    """
    k = law.c if k is None else float(k)
    u = np.asarray(u, dtype=float)
    if check and not isinstance(g, MonotoneFunction):
        lo = float(phi(law, min(k, np.min(u))))
        vals = phi(law, np.array([k, np.min(u), np.max(u), law.b, law.c]))
        _check_monotone(g, min(lo, np.min(vals)), max(np.max(vals), law.B))
    if isinstance(g, MonotoneFunction):
        out = _G_piecewise(law, g, k, u)
    else:
        out = np.array([_G_scalar(law, g, k, float(x)) for x in u.ravel()]).reshape(u.shape)
    return out[()] if out.ndim == 0 else out


def entropy_F(g, v, base: float):
    """Primitive ``F(v) = int_base^v g(s) ds`` by adaptive quadrature."""
    v = np.asarray(v, dtype=float)
    out = np.array([integrate.quad(g, base, float(x), epsrel=1e-10)[0] for x in v.ravel()])
    out = out.reshape(v.shape)
    return out[()] if out.ndim == 0 else out
