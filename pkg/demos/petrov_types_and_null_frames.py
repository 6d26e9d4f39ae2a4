"""
Petrov types, null frames and the five curvature scalars
========================================================

In four Lorentzian dimensions a Weyl-type tensor is captured by five
complex scalars Psi_0 ... Psi_4 relative to a double-null frame
{l, n, m, mbar}.  The scalars grade under boosts (l -> lam l, n -> n/lam)
and spin rotations (m -> e^{i theta} m), and the vanishing pattern of the
leading scalars gives the Petrov filtration I, II, III, N, O.

The script reconstructs tensors from prescribed scalars, checks the
boost/spin weights and the quadratic invariant, then classifies the
curvature of the static spherically symmetric vacuum chart, where the
only nonzero scalar is Psi_2 = -M / r^3.
"""

import numpy as np

from c2e.geometry import curvature_pack, schwarzschild_chart
from c2e.nullframes import (NPScalars, canonical_frame, frame_from_orthonormal,
                            genericity_rank, np_quadratic, np_scalars,
                            petrov_classify, quadratic_invariant,
                            reconstruct_weyl)

frame = canonical_frame()

print("boost weights of the scalars (lam = 2):")
psi = NPScalars(1.0, 1.0, 1.0, 1.0, 1.0)
W = reconstruct_weyl(psi, frame)
boosted = np_scalars(W, frame.boost(2.0))
for k, v in enumerate(boosted.as_tuple()):
    print(f"  Psi_{k}: {v.real:6.3f}   (expected 2^{2 - k} = {2.0 ** (2 - k)})")
print()

print("Petrov filtration from the vanishing pattern:")
for vals in [(1, 1, 1, 1, 1), (0, 1, 1, 1, 1), (0, 0, 1, 1, 1),
             (0, 0, 0, 1, 1), (0, 0, 0, 0, 1), (0, 0, 0, 0, 0)]:
    psi = NPScalars.from_sequence(vals)
    print(f"  scalars {vals} -> type {petrov_classify(psi)}")
print()

psi = NPScalars(0, 0, 1.0, 0, 0)
W = reconstruct_weyl(psi, frame)
print(f"|W|^2 for a pure unit Psi_2 tensor: "
      f"{quadratic_invariant(W, frame):.1f} (closed form gives 48)")
print(f"scalar formula agrees: {np_quadratic(psi):.1f}")
print()

# curvature of the vacuum chart in a static orthonormal frame
mass, point = 1.0, np.array([0.0, 5.0, 1.2, 2.0])
pack = curvature_pack(schwarzschild_chart(mass), point)
g0 = pack.g.values
basis = np.eye(4) / np.sqrt(np.abs(np.diag(g0)))
f = frame_from_orthonormal(basis, g0)
psi = np_scalars(pack.W.values, f)
print(f"vacuum chart at r = {point[1]:.0f}:")
for k, v in enumerate(psi.as_tuple()):
    print(f"  Psi_{k} = {v:.6f}")
print(f"  Psi_2 matches -M/r^3 = {-mass / point[1] ** 3:.6f}")
print(f"  frame-relative type: {petrov_classify(psi)}, "
      f"contraction rank {genericity_rank(pack.W.values, f)}")
