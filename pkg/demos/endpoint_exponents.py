"""Why the default density weight is not the symmetric one.

With one Abel operator acting from each end, the homogeneous solution
behaves like t^-theta near 0 and (T - t)^-(3/2 - theta) near T, where
theta depends on the ratio of the diffusivities. A t^-1/2 (T-t)^-1/2
weight cannot represent that: the smallest singular value of the
collocation matrix only creeps down with refinement. With the adapted
weight the null direction is exact and sits at rounding level.
"""

import numpy as np

from twophase.abel_assembly import dominant_system, endpoint_exponents
from twophase.abel_solver import solve_full
from twophase.phase_model import PhaseLaw
from twophase.quadrature import graded_nodes

law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 1.0, 2.0)
e0, eT = endpoint_exponents(law)
print(f"gamma0={law.gamma0:g} gamma2={law.gamma2:g}: weight t^{e0:.4f} (T-t)^{eT:.4f}")

for n in (32, 64, 128, 256):
    nodes = graded_nodes(n, 1.0)
    row = []
    for weight in ("both", (e0, eT)):
        s = dominant_system(law.gamma2, law.gamma0, nodes, weight=weight)
        sv = np.linalg.svd(s.matrix * np.sqrt(s.point_weights)[:, None], compute_uv=False)
        row.append(sv[-1] / sv[0])
    print(f"n={n:4d}  symmetric {row[0]:.2e}   adapted {row[1]:.2e}")


# one exact null direction is left over; fixing m(T) removes it
s = dominant_system(law.gamma2, law.gamma0, graded_nodes(128, 1.0), weight=(e0, eT))
density, report = solve_full(s, terminal=1.0)
tt = np.array([0.1, 0.5, 0.9, 1.0])
print("pinned m(t):", np.round(density.m(tt), 6), f"residual {report.residual:.1e}")
