"""Why the boundary problem is solvable only for most gaps.

The modes +-1 of the linearized boundary equation obey a periodic 4x4 system. Its
monodromy must not have eigenvalue 1 (the singular gaps are isolated), and the
remaining modes face small divisors that remove a set of gaps of measure ~ eps^delta.
"""

import math
import warnings

import numpy as np

from leapfrog.monodromy import a0_det_identity, cantor_measure, monodromy_at, singular_scan
from leapfrog.pointvortex import VortexParams

print(f"small-gap determinant gap: {a0_det_identity(2 * math.pi):.6f}")
for xi0 in (0.05, 0.3, 0.6):
    rep = monodromy_at(VortexParams(1.0, xi0))
    print(f"xi0 = {xi0:4.2f}: det(M - Id) = {rep.det_gap.real:+.6f}, symmetric structure: {rep.structure_ok}")

scan = singular_scan(1.0, np.linspace(0.02, 0.5, 25), xtol=1e-8)
print("singular gaps below 0.5:", ", ".join(f"{r:.5f}" for r, _ in scan.roots))

print("\n  eps     excluded measure in [0.2, 0.4]")
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for eps in (0.1, 0.05, 0.025, 0.0125):
        m = cantor_measure(eps, 0.3, 1.5, (0.2, 0.4), j_max=128).measure
        print(f"{eps:7.4f}  {m:.5f}")
