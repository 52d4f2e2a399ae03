"""Command-line entry point: ``twophase <command> --config run.json``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .dtn_volterra import write_flux_csv
from .errors import TwoPhaseError


def _config(args) -> pipeline.RunConfig:
    raw = json.loads(Path(args.config).read_text())
    if args.nodes is not None:
        raw["nodes"] = args.nodes
    if getattr(args, "lam", None) is not None:
        raw["lambda"] = args.lam
    if args.strict is not None:
        raw["strict"] = args.strict
    if args.out is not None:
        raw["out"] = args.out
    return pipeline.RunConfig.from_dict(raw)


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def cmd_run(args) -> int:
    cfg = _config(args)
    res = pipeline.run(cfg)
    _print({"status": res.stage, "exit_code": res.status, "out": str(res.out), "error": res.error})
    return res.status


def cmd_dtn(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    fluxes = pipeline.dtn_stage(cfg)
    for side in ("minus", "plus"):
        if side in fluxes:
            write_flux_csv(out / f"flux_{side}.csv", fluxes["t"], fluxes[side])
    _print({"written": sorted(p.name for p in out.glob("flux_*.csv"))})
    return 0


def cmd_solve(args) -> int:
    cfg = _config(args)
    cfg.validate()
    _, _, report, extra = pipeline.solve_stage(cfg, Path(cfg.out))
    _print({"residual": report.residual, "condition": report.condition,
            "near_null": report.near_null, **extra})
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    t, m = pipeline.read_trace(args.trace or out / "m.csv")
    bundle = pipeline.reconstruct_stage(cfg, lambda s: np.interp(s, t, m), out)
    _print(bundle.flags)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    bundle = pipeline.read_bundle(cfg, args.bundle or out / "solution")
    rep = pipeline.verify_stage(cfg, bundle, out)
    sys.stdout.write(rep.summary())
    return 0 if rep.passed else pipeline.EXIT_CODES["verify"]


def cmd_compare(args) -> int:
    cfg = _config(args)
    rep = pipeline.compare_oracle(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "oracle_comparison.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    _print(rep)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twophase", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, lam: bool = False):
        sp.add_argument("--config", required=True, help="run configuration (JSON)")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--nodes", type=int, help="number of collocation elements / time steps")
        sp.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None,
                        help="require data and trace strictly inside their phases")
        if lam:
            sp.add_argument("--lambda", dest="lam", type=float, help="ridge parameter relative to sigma_max^2")

    for name, fn, lam, helptext in (
            ("run", cmd_run, True, "assemble, solve, reconstruct and verify"),
            ("dtn", cmd_dtn, False, "one-sided fluxes from the Volterra equations"),
            ("solve-abel", cmd_solve, True, "assemble and solve the Abel system for m'"),
            ("reconstruct", cmd_reconstruct, False, "fields in both regions from a trace m.csv"),
            ("verify", cmd_verify, False, "jump and admissibility checks on a reconstructed solution"),
            ("compare-oracle", cmd_compare, False, "Volterra fluxes against the finite-difference oracle")):
        sp = sub.add_parser(name, help=helptext)
        common(sp, lam)
        sp.set_defaults(func=fn)
        if name == "reconstruct":
            sp.add_argument("--trace", help="CSV with columns t, m_prime, m (default <out>/m.csv)")
        if name == "verify":
            sp.add_argument("--bundle", help="directory holding interface.csv (default <out>/solution)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TwoPhaseError as exc:
        code = pipeline.EXIT_CODES.get(pipeline._stage_of(exc), 1)
        _print({"error": type(exc).__name__, "message": str(exc), "exit_code": code})
        return code


if __name__ == "__main__":
    sys.exit(main())
