"""Jump and admissibility checks on a candidate two-phase solution.

Conventions along the interface: index 1 is the left (unstable) side,
index 2 the right (stable) side; ``u1, u2`` are the traces of ``u`` and
``vx1, vx2`` the one-sided values of ``v_x``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError, StructuralError
from .phase_model import MonotoneFunction, PhaseLaw, entropy_G, phi
from .reconstruction import SolutionBundle

MONOTONE_TOL = 1e-10
CONDITIONS = ("trace_continuity", "phase_range", "rankine_hugoniot", "interface_monotonicity", "entropy")


@dataclass
class Thresholds:
    rh_sup: float = 1e-2
    trace_jump: float = 1e-8
    entropy_rel: float = 1e-6
    phase_tol: float = 1e-8
    window: tuple = (0.05, 0.95)


def _window(bundle: SolutionBundle, window) -> np.ndarray:
    T = bundle.t[-1] if bundle.t[-1] > 0 else 1.0
    return (bundle.t >= window[0] * T) & (bundle.t <= window[1] * T)


def check_rankine_hugoniot(bundle: SolutionBundle, window=(0.05, 0.95)) -> dict:
    """Defect ``xi'(u2 - u1) - (vx1 - vx2)`` with sup and L2 norms over the window."""
    if bundle.vx_left is None or bundle.vx_right is None:
        raise StructuralError("bundle has no one-sided fluxes")
    r = bundle.xi_prime * (bundle.u_right - bundle.u_left) - (bundle.vx_left - bundle.vx_right)
    sel = _window(bundle, window)
    rs = r[sel] if np.any(sel) else r
    ts = bundle.t[sel] if np.any(sel) else bundle.t
    span = ts[-1] - ts[0]
    l2 = float(np.sqrt(np.trapezoid(rs * rs, ts) / span)) if span > 0 else float(np.max(np.abs(rs)))
    return {"residual": r, "sup": float(np.max(np.abs(rs))), "l2": l2}


def check_interface_monotonicity(bundle: SolutionBundle, tol: float = MONOTONE_TOL) -> dict:
    """``xi' <= tol`` at every node, with the worst node as witness."""
    i = int(np.argmax(bundle.xi_prime))
    worst = float(bundle.xi_prime[i])
    return {"ok": worst <= tol, "worst_velocity": worst, "witness_t": float(bundle.t[i]),
            "note": "for regular stable-unstable candidates with u not identically c, "
                    "this is equivalent to entropy admissibility"}


def default_g_family(law: PhaseLaw, n_ramps: int = 9) -> list:
    ws = law.A + (law.B - law.A) * np.arange(1, n_ramps + 1) / (n_ramps + 1)
    return ([MonotoneFunction.normalized_identity(law.A, law.B)]
            + [MonotoneFunction.ramp(float(w)) for w in ws]
            + [MonotoneFunction.constant(1.0)])


def trace_jump(bundle: SolutionBundle) -> np.ndarray:
    law = bundle.law
    return np.abs(phi(law, bundle.u_left) - phi(law, bundle.u_right))


def check_entropy_defect(bundle: SolutionBundle, g_family=None, jump_tol: float = 1e-8,
                         rel_tol: float = 1e-6, window=None) -> dict:
    """``h = (G(u1) - G(u2)) xi' + g(phi(u2)) (vx1 - vx2)`` for each test ``g``.

    Admissible iff ``max h <= rel_tol * scale`` for every ``g``, where the
    scale is the size of the individual terms. ``window`` restricts the
    maximum to ``[w0 T, w1 T]`` (all nodes when omitted).
    """
    law = bundle.law
    if bundle.vx_left is None or bundle.vx_right is None:
        raise StructuralError("bundle has no one-sided fluxes")
    jump = trace_jump(bundle)
    scale_v = 1.0 + np.max(np.abs(phi(law, bundle.u_right)))
    if np.max(jump) > jump_tol * scale_v:
        i = int(np.argmax(jump))
        raise PreconditionError(
            f"traces of v differ by {jump[i]:.3e} at t={bundle.t[i]:.6g}; the entropy defect needs equal traces")
    g_family = default_g_family(law) if g_family is None else g_family
    dflux = bundle.vx_left - bundle.vx_right
    sel = np.ones(bundle.t.shape, bool) if window is None else _window(bundle, window)
    if not np.any(sel):
        sel[:] = True
    out = {}
    for g in g_family:
        G1 = entropy_G(law, g, bundle.u_left)
        G2 = entropy_G(law, g, bundle.u_right)
        gw = g(phi(law, bundle.u_right))
        a = (G1 - G2) * bundle.xi_prime
        b = gw * dflux
        h = np.where(sel, a + b, -np.inf)
        scale = 1.0 + float(np.max(np.abs(a[sel])) + np.max(np.abs(b[sel])))
        i = int(np.argmax(h))
        out[repr(g)] = {"max": float(h[i]), "at_t": float(bundle.t[i]), "scale": scale,
                        "ok": bool(h[i] <= rel_tol * scale)}
    return out


def classify_stable_stable(law: PhaseLaw, v, xi_prime, tol: float = 1e-10) -> dict:
    """Allowed sign of ``xi'`` for a stable-stable interface given the trace ``v``.

    ``v = B`` allows ``xi' <= 0``, ``A < v < B`` forces ``xi' = 0``,
    ``v = A`` allows ``xi' >= 0``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    xp = np.broadcast_to(np.asarray(xi_prime, dtype=float), v.shape)
    scale = tol * (1.0 + abs(law.A) + abs(law.B))
    labels, comply = [], []
    for vi, di in zip(v, xp):
        if abs(vi - law.B) <= scale:
            labels.append("must_be_nonpositive")
            comply.append(di <= tol)
        elif abs(vi - law.A) <= scale:
            labels.append("must_be_nonnegative")
            comply.append(di >= -tol)
        elif law.A < vi < law.B:
            labels.append("must_be_zero")
            comply.append(abs(di) <= tol)
        else:
            labels.append("out_of_range")
            comply.append(False)
    return {"labels": labels, "compliant": [bool(c) for c in comply], "all_compliant": bool(all(comply))}


def check_phase_range(bundle: SolutionBundle, tol: float = 1e-8) -> dict:
    law = bundle.law
    bad_l = (bundle.u_left < law.b - tol) | (bundle.u_left > law.c + tol)
    bad_r = bundle.u_right < law.c - tol
    where = None
    for name, bad in (("left trace", bad_l), ("right trace", bad_r)):
        if np.any(bad):
            i = int(np.argmax(bad))
            cand = (float(bundle.t[i]), name)
            where = cand if where is None or cand[0] < where[0] else where
    if bundle.U_left is not None:
        bl = (bundle.U_left < law.b - tol) | (bundle.U_left > law.c + tol)
        if np.any(bl):
            cand = (float(bundle.t[int(np.argmax(np.any(bl, axis=1)))]), "left region")
            where = cand if where is None or cand[0] < where[0] else where
    if bundle.U_right is not None:
        br = bundle.U_right < law.c - tol
        if np.any(br):
            cand = (float(bundle.t[int(np.argmax(np.any(br, axis=1)))]), "right region")
            where = cand if where is None or cand[0] < where[0] else where
    return {"ok": where is None, "first_violation": None if where is None else
            {"t": where[0], "where": where[1]}}


@dataclass
class VerificationReport:
    rh_sup: float
    rh_l2: float
    xi_monotone: bool
    worst_velocity: float
    worst_velocity_t: float
    entropy_defects: dict
    trace_jump: float
    phase_range_ok: bool
    phase_violation: dict | None
    status: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def failed(self) -> list:
        return [k for k in CONDITIONS if not self.status.get(k, False)]

    @property
    def passed(self) -> bool:
        return not self.failed

    @property
    def first_failure(self) -> str | None:
        f = self.failed
        return f[0] if f else None

    def to_json(self) -> str:
        d = asdict(self)
        d["failed"] = self.failed
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = [f"{k:24s} {'PASS' if self.status.get(k) else 'FAIL'}" for k in CONDITIONS]
        lines.append(f"{'overall':24s} {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def verify(bundle: SolutionBundle, thresholds: Thresholds | None = None, g_family=None) -> VerificationReport:
    """Run every check; never modifies ``bundle``."""
    th = thresholds or Thresholds()
    notes = []
    rh = check_rankine_hugoniot(bundle, th.window)
    mono = check_interface_monotonicity(bundle)
    jump = float(np.max(trace_jump(bundle)))
    scale_v = 1.0 + float(np.max(np.abs(phi(bundle.law, bundle.u_right))))
    jump_ok = jump <= th.trace_jump * scale_v
    phase = check_phase_range(bundle, th.phase_tol)
    try:
        ent = check_entropy_defect(bundle, g_family, th.trace_jump, th.entropy_rel, th.window)
        ent_ok = all(v["ok"] for v in ent.values())
    except PreconditionError as exc:
        ent, ent_ok = {}, False
        notes.append(f"entropy check skipped: {exc}")
    status = {"trace_continuity": jump_ok, "phase_range": phase["ok"],
              "rankine_hugoniot": rh["sup"] <= th.rh_sup,
              "interface_monotonicity": mono["ok"], "entropy": ent_ok}
    notes.append(mono["note"])
    return VerificationReport(rh["sup"], rh["l2"], mono["ok"], mono["worst_velocity"], mono["witness_t"],
                              ent, jump, phase["ok"], phase["first_violation"], status, notes)
