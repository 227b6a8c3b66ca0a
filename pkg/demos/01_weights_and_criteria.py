"""
Weight families and criterion verdicts
======================================

Build a few echelon weight families, then ask which structural criteria hold.
Every verdict is Holds, Fails or Inconclusive and carries its evidence.
"""

from cesaro_kothe import criteria, weights

# the power series space of finite type and a nuclear example given by a DSL formula;
# its rows only become increasing in n past a finite index, so the Kothe check fails
power = weights.power_series()
nuc = weights.dsl_family("-n*exp(i/n)")

for fam in (power, nuc, weights.alpha_seq(0.9)):
    print(f"\n{fam.name}  {dict(fam.params)}")
    verdicts = [criteria.check_kothe(fam), *criteria.check_g1(fam),
                criteria.check_nuclearity(fam), criteria.check_invertibility(fam)]
    for v in verdicts:
        w = v.witness_for(1)
        extra = f"witness m={w.m}" if w else (f"counterexample {v.counterexample.get('reason', v.counterexample)}" if v.counterexample else "")
        print(f"  {v.criterion:<28} {v.status.value:<12} {extra}")

# which 1/s are eigenvalues depends on the family
ps = weights.point_spectrum(3)
mem = criteria.point_spectrum_memberships(ps, range(1, 9))
print("\npoint spectrum family, s -> status:", {s: r.status.value for s, r in mem.items()})

# S_n collects the exponents s for which a certain weighted sum stays finite
gap = weights.sn_gap()
for n in (1, 2):
    rep = criteria.compute_sn(gap, n, (1, 1.5, 2, 2.5, 3, 4))
    print(f"S_{n} nonempty: {rep.nonempty}")
