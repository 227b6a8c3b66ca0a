"""
Cesaro means of the iterates
============================

On the power series space the averages of C^k e1 shrink toward the fixed
part, while the constant sequence is already fixed and the distance is 0.
"""

from cesaro_kothe import ergodic, weights

fam = weights.power_series()
for spec in ("e1", "ones"):
    run = ergodic.run_ergodic(fam, spec, n_max=2, k_schedule=(1, 10, 100, 1000), window=400)
    print(f"\nx = {spec}  status {run.status.value}  power-bound violations {run.power_violations}")
    for k, n, v in run.rows():
        print(f"  k={k:<5} n={n}  p_n(T_k x - P x) = {v:.6g}")

# the closed-range identity behind the convergence
T, R = ergodic.t_matrix(8), ergodic.r_matrix(8)
print("\nT R is the identity:", (T.dot(R) == R.dot(T)).all())
print(ergodic.verify_closed_range(fam, 1, 2).status.value)
