"""Pick m(t), build the forcing from it, solve, and compare.

This checks the solver and the quadrature, not the physics: the forcing
comes from the same discrete operator that is inverted.
"""

from pathlib import Path

from twophase.pipeline import RunConfig, solve_stage

cfg = RunConfig.load(Path(__file__).parent / "configs" / "manufactured.json")
for n in (64, 128, 256, 512):
    cfg.nodes = n
    _, _, report, extra = solve_stage(cfg)
    print(f"n={n:4d}  recovery {extra['recovery_error']:.2e}  condition {report.condition:8.1f}")
