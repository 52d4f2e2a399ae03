"""Same law and data, interface moving left vs right.

A receding interface (xi' <= 0) should come out admissible. The advancing
one solves and reconstructs fine, but the verifier rejects it: the
velocity has the wrong sign and the entropy inequality breaks with it.
Outputs go to demos/runs/.
"""

import json
from pathlib import Path

from twophase.pipeline import RunConfig, run

here = Path(__file__).parent

for name in ("receding", "advancing"):
    cfg = RunConfig.load(here / "configs" / f"{name}.json")
    res = run(cfg, here / "runs" / name)
    stages = res.manifest["stages"]
    print(f"{name:10s} exit {res.status} ({res.stage})")
    print(f"  solve residual {stages['solve']['residual']:.2e}, condition {stages['solve']['condition']:.1f}")
    if isinstance(stages.get("verify"), dict):
        print("  failed checks:", stages["verify"]["failed"] or "none")
    print((res.out / "verification.txt").read_text().rstrip())
    print(json.dumps(stages["reconstruct"], sort_keys=True))
