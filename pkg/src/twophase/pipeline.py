"""End-to-end runs: assemble, solve, reconstruct, verify, and persist artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import abel_assembly, abel_solver, dtn_volterra, reconstruction, verifier
from .curves import Interface, SideData
from .errors import (ConfigurationError, DataError, DomainError, NumericalBreakdown,
                     PhaseExitError, SingularSystemError, TwoPhaseError, ValidationError)
from .phase_model import PhaseLaw

EXIT_CODES = {
    "ok": 0, "unexpected": 1, "config": 2, "validation": 3, "data": 4, "numerics": 5,
    "solve": 6, "reconstruct": 7, "verify": 8,
}


def law_from_dict(d: dict) -> PhaseLaw:
    if "A" in d or "B" in d:
        return PhaseLaw.from_critical(float(d["b"]), float(d["c"]), float(d["A"]), float(d["B"]),
                                      float(d.get("gamma1", 1.0)), float(d.get("gamma2", 1.0)))
    return PhaseLaw.from_dict(d)


def time_profile(desc: dict | None, default: float = 0.0) -> tuple[Callable, Callable]:
    """Boundary data in time: ``(g, g')`` for constant, exponential, sine or polynomial families."""
    if desc is None:
        return (lambda t: default + 0.0 * np.asarray(t, dtype=float),
                lambda t: 0.0 * np.asarray(t, dtype=float))
    fam = desc.get("family")
    base, amp, rate = float(desc.get("base", 0.0)), float(desc.get("amp", 0.0)), float(desc.get("rate", 1.0))
    if fam == "constant":
        return time_profile(None, base)
    if fam == "exponential":
        return (lambda t: base + amp * np.exp(rate * np.asarray(t)),
                lambda t: amp * rate * np.exp(rate * np.asarray(t)))
    if fam == "sine":
        return (lambda t: base + amp * np.sin(rate * np.asarray(t)),
                lambda t: amp * rate * np.cos(rate * np.asarray(t)))
    if fam == "polynomial":
        p = np.polynomial.Polynomial(desc["coefficients"])
        dp = p.deriv()
        return (lambda t: p(np.asarray(t, dtype=float)), lambda t: dp(np.asarray(t, dtype=float)))
    raise ConfigurationError(f"unknown time profile family {fam!r}")


MANUFACTURED = {
    "sine": lambda T: (lambda t: np.sin(np.pi * np.asarray(t) / T)),
    "zero": lambda T: (lambda t: 0.0 * np.asarray(t)),
    "cosine": lambda T: (lambda t: np.cos(np.pi * np.asarray(t) / T)),
}


@dataclass
class RunConfig:
    law: PhaseLaw
    interface: Interface
    side: SideData
    nodes: int = 256
    oracle_space: int = 512
    oracle_time: int = 512
    regularization: float = 1e-10
    m0: float | None = None
    out: str = "run"
    seed: int = 0
    strict: bool = True
    weight: str = "adapted"
    s8_variant: str = "difference"
    terminal: str | float | None = "compatible"
    manufactured: str | None = None
    boundary: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            law = law_from_dict(d["law"])
            xi = Interface.from_dict(d.get("interface", {"family": "constant"}))
            side = SideData.from_dict(d["data"], K=xi.K)
        except KeyError as exc:
            raise ConfigurationError(f"config is missing {exc}") from None
        oracle = d.get("oracle", {})
        known = {"law", "interface", "data", "nodes", "oracle", "lambda", "m0", "out", "seed", "strict",
                 "weight", "s8_variant", "terminal", "manufactured", "boundary", "thresholds", "name"}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        man = d.get("manufactured")
        if man is not None and man not in MANUFACTURED:
            raise ConfigurationError(f"manufactured must be one of {sorted(MANUFACTURED)}")
        terminal = d.get("terminal", "compatible")
        if isinstance(terminal, str) and terminal not in ("compatible", "free"):
            raise ConfigurationError(f"terminal must be 'compatible', 'free' or a number, got {terminal!r}")
        n = int(d.get("nodes", 256))
        if n < 4 or n % 2:
            raise ConfigurationError(f"nodes must be an even integer >= 4, got {n}")
        return cls(law, xi, side, n, int(oracle.get("n_space", 512)), int(oracle.get("n_time", 512)),
                   float(d.get("lambda", 1e-10)), d.get("m0"), d.get("out", "run"), int(d.get("seed", 0)),
                   bool(d.get("strict", True)), d.get("weight", "adapted"), d.get("s8_variant", "difference"),
                   terminal, man, d.get("boundary", {}), d.get("thresholds", {}), d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def threshold(self, key: str) -> float:
        defaults = {"solve_residual": 1e-4, "rh_sup": 1e-2, "entropy_rel": 1e-6, "trace_jump": 1e-8,
                    "recovery": 1e-2}
        return float(self.thresholds.get(key, defaults[key]))

    def validate(self) -> dict:
        info = {"interface": self.interface.check(np.linspace(0.0, self.interface.T, 65))}
        if abs(info["interface"]["xi0"]) > 1e-12:
            raise ValidationError(f"interface must start at 0, got xi(0)={info['interface']['xi0']}")
        info["data"] = self.side.validate(self.law, strict=self.strict)
        abel_assembly.check_law(self.law)
        return info


@dataclass
class RunResult:
    status: int
    stage: str
    out: Path
    manifest: dict
    error: dict | None = None


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, info: dict) -> dict:
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    info["files"] = {str(p.relative_to(out)): _sha256(p) for p in files}
    (out / "manifest.json").write_text(json.dumps(info, indent=2, sort_keys=True, default=str) + "\n")
    return info


def _stage_of(exc: Exception) -> str:
    if isinstance(exc, TwoPhaseError):
        return {"domain": "numerics", "generic": "unexpected"}.get(exc.stage, exc.stage)
    return "unexpected"


def terminal_value(cfg: RunConfig, ref=None) -> float | None:
    """Value imposed on ``m(T)``; ``'compatible'`` matches the final datum at the corner."""
    if cfg.terminal is None or cfg.terminal == "free":
        return None
    if ref is not None:
        return float(ref.m(np.array([ref.T]))[0])
    if cfg.terminal == "compatible":
        return float(cfg.law.gamma0 * cfg.side.uT(np.float64(cfg.interface.K)) + cfg.law.delta0)
    return float(cfg.terminal)


def solve_stage(cfg: RunConfig, out: Path | None = None):
    """Assemble and solve; returns ``(system, density, report, extra)``."""
    system = abel_assembly.assemble(cfg.law, cfg.interface, cfg.side, m0=cfg.m0, n=cfg.nodes,
                                    weight=cfg.weight, s8_variant=cfg.s8_variant)
    extra = {}
    h = system.h
    ref = None
    if cfg.manufactured:
        ref = abel_solver.WeightedDensity.interpolate(MANUFACTURED[cfg.manufactured](system.T),
                                                      system.nodes, system.weight, system.m0)
        h = system.apply(ref.coeffs)
        system = system.with_forcing(h)
    mT = terminal_value(cfg, ref)
    density, report = abel_solver.solve_full(system, h, cfg.regularization, terminal=mT)
    extra["terminal"] = mT
    if ref is not None:
        T = system.T
        tt = np.linspace(0.1 * T, 0.9 * T, 401)
        num = np.linalg.norm(density(tt) - ref(tt))
        den = np.linalg.norm(ref(tt))
        extra["recovery_error"] = float(num / den) if den > 0 else float(num)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        system.dump(out / "abel")
        density.write_csv(out / "m.csv")
        report.write(out / "solve_report.json")
    return system, density, report, extra


def read_trace(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    m = np.array([float(r["m"]) for r in rows])
    return t, m


def reconstruct_stage(cfg: RunConfig, m: Callable, out: Path | None = None):
    bundle = reconstruction.reconstruct(cfg.law, cfg.interface, cfg.side, m, cfg.oracle_space,
                                        cfg.oracle_time, strict=cfg.strict,
                                        keep_every=max(1, cfg.oracle_space // 128))
    if out is not None:
        bundle.write(out / "solution")
    return bundle


def read_bundle(cfg: RunConfig, directory) -> reconstruction.SolutionBundle:
    with open(Path(directory) / "interface.csv") as fh:
        rows = list(csv.DictReader(fh))
    col = lambda k: np.array([float(r[k]) for r in rows]) if k in rows[0] else None
    b = reconstruction.SolutionBundle.from_traces(cfg.law, col("t"), col("xi"), col("xi_prime"),
                                                  col("u_left"), col("u_right"), col("vx_left"),
                                                  col("vx_right"))
    b.m = col("m")
    return b


def verify_stage(cfg: RunConfig, bundle, out: Path | None = None) -> verifier.VerificationReport:
    th = verifier.Thresholds(rh_sup=cfg.threshold("rh_sup"), trace_jump=cfg.threshold("trace_jump"),
                             entropy_rel=cfg.threshold("entropy_rel"))
    rep = verifier.verify(bundle, th)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "verification.json").write_text(rep.to_json())
        (out / "verification.txt").write_text(rep.summary())
    return rep


def run(cfg: RunConfig, out=None) -> RunResult:
    """Full pipeline; the exit status names the first failing stage."""
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    # a stale record from an earlier failed run would otherwise end up in the manifest
    for name in ("error.json", "verification.json", "verification.txt"):
        (out / name).unlink(missing_ok=True)
    info = {"config": cfg.raw, "stages": {}}
    stage = "validation"
    try:
        info["stages"]["validation"] = cfg.validate()
        stage = "solve"
        system, density, report, extra = solve_stage(cfg, out)
        info["stages"]["solve"] = {"residual": report.residual, "condition": report.condition,
                                   "near_null": report.near_null, **extra}
        if cfg.manufactured:
            ok = extra["recovery_error"] <= cfg.threshold("recovery")
            info["stages"]["reconstruct"] = info["stages"]["verify"] = "skipped (synthetic forcing)"
            status = "ok" if ok else "solve"
            info["status"] = status
            return RunResult(EXIT_CODES[status], status, out, _write_manifest(out, info))
        if report.residual > cfg.threshold("solve_residual"):
            raise SingularSystemError(
                f"solve residual {report.residual:.3e} exceeds {cfg.threshold('solve_residual'):.1e}",
                report.condition)
        stage = "reconstruct"
        bundle = reconstruct_stage(cfg, lambda t: density.m(t), out)
        info["stages"]["reconstruct"] = bundle.flags
        stage = "verify"
        rep = verify_stage(cfg, bundle, out)
        info["stages"]["verify"] = {"failed": rep.failed, "rh_sup": rep.rh_sup}
        status = "ok" if rep.passed else "verify"
        if not rep.passed:
            info["error"] = {"stage": "verify", "conditions": rep.failed}
        info["status"] = status
        return RunResult(EXIT_CODES[status], status, out, _write_manifest(out, info))
    except Exception as exc:  # every failure becomes a machine-readable record
        code_key = _stage_of(exc)
        record = {"stage": stage, "kind": type(exc).__name__, "message": str(exc), "category": code_key}
        if isinstance(exc, PhaseExitError):
            record["time"] = exc.time
        if isinstance(exc, SingularSystemError):
            record["condition"] = exc.condition
        if code_key == "unexpected":
            record["traceback"] = traceback.format_exc()
        (out / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        info["error"] = record
        info["status"] = code_key
        return RunResult(EXIT_CODES[code_key], code_key, out, _write_manifest(out, info), record)


def boundary_data(cfg: RunConfig):
    """Dirichlet data in time for the flux comparison; defaults are the corner-compatible constants."""
    gp = time_profile(cfg.boundary.get("g_plus"), float(cfg.side.u0(np.float64(0.0))))
    gm = time_profile(cfg.boundary.get("g_minus"), float(cfg.side.uT(np.float64(cfg.interface.K))))
    return gm, gp


def dtn_stage(cfg: RunConfig, n_time: int | None = None):
    n = n_time or cfg.nodes
    t = np.linspace(0.0, cfg.interface.T, n + 1)
    (gm, dgm), (gp, dgp) = boundary_data(cfg)
    sides = cfg.boundary.get("sides", ["minus", "plus"])
    out = {"t": t}
    if "plus" in sides:
        out["plus"] = dtn_volterra.dtn_stable_side(cfg.law, cfg.interface, cfg.side.du0, dgp, t)
    if "minus" in sides:
        out["minus"] = dtn_volterra.dtn_unstable_side(cfg.law, cfg.interface, cfg.side.duT, dgm, t)
    return out


def _rel(a, b) -> float:
    den = np.linalg.norm(b)
    num = np.linalg.norm(a - b)
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return float(num / den)


def compare_oracle(cfg: RunConfig, n_space: int | None = None, n_time: int | None = None,
                   window=(0.1, 0.9)) -> dict:
    """Relative L2 divergence between the Volterra fluxes and the finite-difference fluxes."""
    ns = n_space or cfg.oracle_space
    nt = n_time or cfg.oracle_time
    xi, law, side = cfg.interface, cfg.law, cfg.side
    T, K = xi.T, xi.K
    (gm, _), (gp, _) = boundary_data(cfg)
    vol = dtn_stage(cfg, nt)
    t = vol["t"]
    sel = (t >= window[0] * T) & (t <= window[1] * T)
    report = {"n_space": ns, "n_time": nt, "window": list(window)}
    if "plus" in vol:
        fd = reconstruction.fd_oracle_heat(law.gamma2, xi, gp, side.u0, ns, nt)
        report["plus"] = _rel(vol["plus"][sel], fd.flux[sel])
    if "minus" in vol:
        fd = reconstruction.fd_oracle_heat(-law.gamma0, xi.reflected(1.0), lambda s: gm(T - np.asarray(s)),
                                           lambda y: side.uT(K - np.asarray(y)), ns, nt)
        report["minus"] = _rel(vol["minus"][sel], -fd.flux[::-1][sel])
    return report
