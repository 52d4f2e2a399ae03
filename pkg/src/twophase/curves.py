"""Interface curves and side data (initial datum on the stable side, final
datum on the unstable side)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, special

from .errors import DataError, ValidationError
from .phase_model import PhaseLaw

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Interface:
    """A curve ``x = xi(t)`` on ``[0, T]`` with its derivative."""

    position: Fn
    velocity: Fn
    T: float
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.position(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.velocity(np.asarray(t, dtype=float))

    @property
    def K(self) -> float:
        return float(self.position(np.float64(self.T)))

    # -- analytic families ------------------------------------------------
    @classmethod
    def constant(cls, T: float = 1.0) -> "Interface":
        return cls(lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                   lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                   T, "constant", {})

    @classmethod
    def linear(cls, slope: float, T: float = 1.0) -> "Interface":
        return cls(lambda t: slope * np.asarray(t, dtype=float),
                   lambda t: slope + 0.0 * np.asarray(t, dtype=float),
                   T, "linear", {"slope": slope})

    @classmethod
    def quadratic(cls, a1: float, a2: float, T: float = 1.0) -> "Interface":
        """``xi(t) = a1 t + a2 t**2``."""
        return cls(lambda t: a1 * np.asarray(t) + a2 * np.asarray(t) ** 2,
                   lambda t: a1 + 2.0 * a2 * np.asarray(t),
                   T, "quadratic", {"a1": a1, "a2": a2})

    @classmethod
    def from_nodes(cls, t, x, dx=None) -> "Interface":
        """Cubic (Hermite if ``dx`` is given) spline through node values."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.shape != x.shape or np.any(np.diff(t) <= 0):
            raise ValidationError("interface nodes must be increasing 1-d arrays of equal size")
        if abs(t[0]) > 1e-14:
            raise ValidationError(f"interface nodes must start at t=0, got {t[0]}")
        if dx is not None:
            spl = interpolate.CubicHermiteSpline(t, x, np.asarray(dx, dtype=float))
        else:
            spl = interpolate.CubicSpline(t, x)
        der = spl.derivative()
        params = {"t": t.tolist(), "x": x.tolist()}
        if dx is not None:
            params["dx"] = np.asarray(dx, dtype=float).tolist()
        return cls(lambda s: spl(s), lambda s: der(s), float(t[-1]), "spline", params)

    @classmethod
    def from_dict(cls, desc: dict) -> "Interface":
        desc = dict(desc)
        family = desc.pop("family", "nodes" if "t" in desc else None)
        T = float(desc.pop("T", 1.0))
        if family == "constant":
            return cls.constant(T)
        if family == "linear":
            return cls.linear(float(desc["slope"]), T)
        if family == "quadratic":
            return cls.quadratic(float(desc.get("a1", 0.0)), float(desc.get("a2", 0.0)), T)
        if family in ("spline", "nodes"):
            return cls.from_nodes(desc["t"], desc["x"], desc.get("dx"))
        raise ValidationError(f"unknown interface family {family!r}")

    def to_dict(self) -> dict:
        if self.family == "spline":
            return {"family": "spline", **self.params}
        return {"family": self.family, "T": self.T, **self.params}

    # -- changes of variable ----------------------------------------------
    def rescaled(self, rate: float) -> "Interface":
        """``tau -> xi(tau / rate)`` on ``[0, rate * T]``."""
        pos, vel = self.position, self.velocity
        return Interface(lambda s: pos(np.asarray(s) / rate),
                         lambda s: vel(np.asarray(s) / rate) / rate,
                         rate * self.T, self.family + ":rescaled", {"rate": rate})

    def reflected(self, rate: float) -> "Interface":
        """``tau -> K - xi(T - tau / rate)`` on ``[0, rate * T]``."""
        pos, vel, T, K = self.position, self.velocity, self.T, self.K
        return Interface(lambda s: K - pos(T - np.asarray(s) / rate),
                         lambda s: vel(T - np.asarray(s) / rate) / rate,
                         rate * T, self.family + ":reflected", {"rate": rate})

    # -- diagnostics --------------------------------------------------------
    def holder_quotient(self, nodes, exponent: float = 0.5) -> float:
        """``max |xi'(t) - xi'(s)| / |t - s|**exponent`` over node pairs."""
        nodes = np.asarray(nodes, dtype=float)
        d = self.derivative(nodes)
        dt = np.abs(nodes[:, None] - nodes[None, :])
        dd = np.abs(d[:, None] - d[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dt > 0, dd / dt ** exponent, 0.0)
        return float(np.max(q))

    def check(self, nodes, tol: float = 1e-10) -> dict:
        """Report the admissibility-related facts about the curve on ``nodes``."""
        nodes = np.asarray(nodes, dtype=float)
        d = np.atleast_1d(self.derivative(nodes))
        worst = int(np.argmax(d))
        return {
            "xi0": float(self(0.0)),
            "K": self.K,
            "max_velocity": float(d[worst]),
            "max_velocity_time": float(nodes[worst]),
            "nonincreasing": bool(d[worst] <= tol),
            "holder_half": self.holder_quotient(nodes),
        }


def _tail_check(fprime: Fn, name: str) -> None:
    """Reject derivatives whose absolute integral over dyadic windows does not shrink."""
    f = lambda x: abs(float(fprime(np.float64(x))))
    head = integrate.quad(f, 0.0, 25.0, limit=200)[0]
    pieces = [integrate.quad(f, X, 2.0 * X, limit=200)[0] for X in (25.0, 50.0, 100.0)]
    if not np.all(np.isfinite([head] + pieces)):
        raise DataError(f"{name} is not finite on its sample range")
    scale = 1.0 + head
    if pieces[-1] > 1e-6 * scale or not pieces[-1] <= pieces[0] + 1e-14:
        raise DataError(f"{name} is not absolutely integrable (window integrals {pieces})")


@dataclass(frozen=True)
class SideData:
    """Initial datum on ``x > 0`` and final datum on ``x < K``."""

    u0: Fn
    du0: Fn
    uT: Fn
    duT: Fn
    K: float = 0.0
    desc: dict = field(default_factory=dict)

    def u0_prime_mirror(self) -> Fn:
        """``x -> -uT'(K - x)``: the initial slope of the reflected backward problem."""
        duT, K = self.duT, self.K
        return lambda x: -duT(K - np.asarray(x, dtype=float))

    def validate(self, law: PhaseLaw, strict: bool = True, check_tails: bool = True) -> dict:
        x = np.linspace(0.0, 60.0, 6001)
        u0 = self.u0(x)
        uT = self.uT(self.K - x)
        report = {"inf_u0": float(np.min(u0)), "sup_uT": float(np.max(uT)),
                  "inf_uT": float(np.min(uT))}
        ok0 = report["inf_u0"] > law.c if strict else report["inf_u0"] >= law.c
        okT = (report["sup_uT"] < law.c and report["inf_uT"] > law.b) if strict else \
            (report["sup_uT"] <= law.c and report["inf_uT"] >= law.b)
        if not ok0:
            raise ValidationError(f"u0 leaves the stable phase: inf u0 = {report['inf_u0']} vs c = {law.c}")
        if not okT:
            raise ValidationError(
                f"uT leaves the unstable phase ({law.b}, {law.c}): range "
                f"[{report['inf_uT']}, {report['sup_uT']}]")
        if check_tails:
            _tail_check(self.du0, "u0'")
            _tail_check(self.u0_prime_mirror(), "uT'")
            d2_0 = np.gradient(self.du0(x), x)
            d2_T = np.gradient(self.duT(self.K - x), x)
            if not (np.all(np.isfinite(d2_0)) and np.all(np.isfinite(d2_T))):
                raise DataError("second derivatives of the data are not bounded on the sample range")
            report["max_u0_dd"] = float(np.max(np.abs(d2_0)))
            report["max_uT_dd"] = float(np.max(np.abs(d2_T)))
        return report

    @classmethod
    def from_dict(cls, desc: dict, K: float = 0.0) -> "SideData":
        u0, du0 = _profile(desc["u0"], sign=-1.0, origin=0.0)
        uT, duT = _profile(desc["uT"], sign=1.0, origin=K)
        return cls(u0, du0, uT, duT, K, desc)


def _profile(desc: dict, sign: float, origin: float) -> tuple[Fn, Fn]:
    """Data families. ``sign=-1`` decays as x -> +inf, ``sign=+1`` as x -> -inf."""
    family = desc.get("family")
    base = float(desc.get("base", 0.0))
    amp = float(desc.get("amp", 0.0))
    rate = float(desc.get("rate", 1.0))
    if family == "constant":
        return (lambda x: base + 0.0 * np.asarray(x, dtype=float),
                lambda x: 0.0 * np.asarray(x, dtype=float))
    if family == "exponential":
        return (lambda x: base + amp * np.exp(sign * rate * (np.asarray(x) - origin)),
                lambda x: sign * rate * amp * np.exp(sign * rate * (np.asarray(x) - origin)))
    if family == "erf":
        return (lambda x: base + amp * special.erf(rate * (np.asarray(x) - origin)),
                lambda x: amp * rate * 2.0 / np.sqrt(np.pi) * np.exp(-(rate * (np.asarray(x) - origin)) ** 2))
    if family == "gaussian":
        width = float(desc.get("width", 1.0))
        center = float(desc.get("center", 0.0))
        return (lambda x: base + amp * np.exp(-((np.asarray(x) - center) / width) ** 2),
                lambda x: -2.0 * amp * (np.asarray(x) - center) / width ** 2
                * np.exp(-((np.asarray(x) - center) / width) ** 2))
    if family == "samples":
        xs = np.asarray(desc["x"], dtype=float)
        vs = np.asarray(desc["values"], dtype=float)
        spl = interpolate.CubicSpline(xs, vs, bc_type="clamped")
        der = spl.derivative()
        lo, hi = xs[0], xs[-1]
        return (lambda x: spl(np.clip(x, lo, hi)),
                lambda x: np.where((np.asarray(x) < lo) | (np.asarray(x) > hi), 0.0,
                                   der(np.clip(x, lo, hi))))
    raise ValidationError(f"unknown data family {family!r}")
