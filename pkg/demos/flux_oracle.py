"""Volterra fluxes against a Crank-Nicolson solve of each one-sided problem.

The divergence should shrink as the finite-difference grid is refined,
since the Volterra side is already much more accurate than the oracle.
"""

from pathlib import Path

from twophase.pipeline import RunConfig, compare_oracle

here = Path(__file__).parent

for name in ("oracle_quadratic", "oracle_spline", "oracle_linear"):
    cfg = RunConfig.load(here / "configs" / f"{name}.json")
    for n in (256, 512, 1024):
        rep = compare_oracle(cfg, n, n)
        print(f"{name:17s} n={n:5d}  plus {rep['plus']:.2e}  minus {rep['minus']:.2e}")
