"""
Resolvent and spectrum
======================

Exact and floating point resolvent entries, a solve with a residual check,
and the spectrum evidence assembled for two families.
"""

from fractions import Fraction

import numpy as np

from cesaro_kothe import spectral, weights
from cesaro_kothe.exact import GaussianRational
from cesaro_kothe.kernel import SequenceVector

# exact entries for a rational and a Gaussian rational lambda
for lam in (Fraction(3, 7), GaussianRational(Fraction(2, 5), Fraction(3, 10))):
    print(f"lambda={lam}: R[3,1] = {spectral.resolvent_entry(3, 1, lam)}")

# the 1/k themselves are refused
try:
    spectral.ResolventParams(Fraction(1, 3))
except spectral.SigmaProximityError as exc:
    print("refused:", exc)

# solve (C - lambda) x = y and report the residual
lam = 0.4 + 0.3j
y = SequenceVector.from_values(np.random.default_rng(0).normal(size=200))
x, residual = spectral.resolvent_apply(y, lam, verify=True)
print(f"solve at lambda={lam}: residual {residual:.2e}")

for fam in (weights.nuclear_g1_example(), weights.sn_gap()):
    region = spectral.assemble_spectrum(fam)
    print(f"\n{fam.name}: {region.classification}, 0 in spectrum: {region.zero_included}")
    for z in (0.5, 0.2 + 0.1j, 1.5):
        print(f"  {z}: {region.classify_point(z)}")
