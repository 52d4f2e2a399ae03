"""Synthetic interface data for the admissibility checks.

Each admissible candidate has equal traces of ``v`` on both sides and
one-sided fluxes chosen to satisfy the jump relation exactly, so the only
thing that varies is the sign of the interface velocity.
"""

import numpy as np

from twophase.phase_model import PhaseLaw
from twophase.reconstruction import SolutionBundle

T_GRID = np.linspace(0.0, 1.0, 201)


def candidate(law: PhaseLaw, w, velocity, flux_right=None, t=T_GRID) -> SolutionBundle:
    """Stable-unstable pair with trace ``w(t)`` of ``v`` and interface speed ``velocity(t)``."""
    w_t = np.broadcast_to(np.asarray(w(t) if callable(w) else w, dtype=float), t.shape)
    vel = np.broadcast_to(np.asarray(velocity(t) if callable(velocity) else velocity, dtype=float), t.shape)
    u1 = (w_t - law.delta0) / law.gamma0
    u2 = (w_t - law.delta2) / law.gamma2
    vx2 = 0.1 + 0.2 * t if flux_right is None else flux_right(t)
    vx1 = vx2 + vel * (u2 - u1)
    xi = np.concatenate([[0.0], np.cumsum(0.5 * (vel[1:] + vel[:-1]) * np.diff(t))])
    return SolutionBundle.from_traces(law, t, xi, vel, u1, u2, vx1, vx2)


LAWS = [PhaseLaw.reference(), PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 1.0, 2.0),
        PhaseLaw.from_critical(-0.5, 0.5, -1.0, 2.0, 3.0, 0.5)]


def admissible_corpus() -> list:
    out = []
    for law in LAWS:
        A, B = law.A, law.B
        mid = 0.5 * (A + B)
        for w in (A + 0.2 * (B - A), mid, lambda t, A=A, B=B: A + (B - A) * (0.3 + 0.4 * t ** 2)):
            for vel in (0.0, -0.1, -0.5, lambda t: -0.3 * np.sin(np.pi * t) ** 2):
                out.append(candidate(law, w, vel))
    return out


def inadmissible_corpus() -> list:
    """Same traces with the interface moving the wrong way."""
    out = []
    for law in LAWS:
        A, B = law.A, law.B
        for w in (A + 0.2 * (B - A), 0.5 * (A + B)):
            for vel in (0.1, 0.5, lambda t: 0.3 * t):
                out.append(candidate(law, w, vel))
    return out


def violation_corpus() -> dict:
    """Named violations and the condition each must fail first."""
    law = PhaseLaw.reference()
    base = lambda: candidate(law, 0.5, -0.1)
    cases = {}

    b = candidate(law, 0.5, lambda t: 0.2 * t)
    cases["positive_velocity"] = (b, "interface_monotonicity")

    b = base()
    b.u_left = b.u_left + 0.05
    b.vx_left = b.vx_right + b.xi_prime * (b.u_right - b.u_left)
    cases["trace_jump"] = (b, "trace_continuity")

    # for 0.55 < t < 0.65 the right trace sits on the unstable branch with the same v
    b = candidate(law, 0.3, -0.1)
    dip = (b.t > 0.55) & (b.t < 0.65)
    b.u_right = np.where(dip, b.u_left, b.u_right)
    b.vx_left = b.vx_right + b.xi_prime * (b.u_right - b.u_left)
    cases["phase_exit"] = (b, "phase_range")

    b = base()
    b.vx_left = b.vx_left + 0.1
    cases["rh_perturbed"] = (b, "rankine_hugoniot")

    b = candidate(law, 0.5, 0.0)
    b.vx_left = b.vx_left + 1e-3
    cases["entropy_perturbed"] = (b, "entropy")
    return cases
