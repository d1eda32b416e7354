"""Verification battery: statistical checks that tie paths to the theory.

Each check targets one structural fact: stationarity of the environment
seen from the particle, the ergodic theorem for time averages, vanishing of
the principal-value drift for symmetric kernels, convergence of the
empirical characteristic function, and the compensator slope that the
martingale bracket accumulates.  Sample sizes here are kept small; the
acceptance suite runs the same checks at full size.
"""

import numpy as np

from levy_homogenize import (LevyTriplet, MediumSpec, SimConfig,
                             effective_A, linear_kernel, make_medium,
                             simulate_ensemble)
from levy_homogenize.verify import (drift_vanishing_test, ecf_test,
                                    ergodic_test, invariance_test,
                                    modulus_diagnostic)

spec = MediumSpec(period=1.0,
                  fourier_V=((1, 0.3, 0.1),),
                  fourier_loga=((1, 0.2, -0.1),))
m = make_medium(spec, seed=9)
k = linear_kernel(m, C=1.0, alpha=1.0)

inv = invariance_test(m, k, eps=0.4, f=lambda F: F.a, t=0.5, n=2000, seed=1)
print("environment invariance (pi start, annealed mean of a at t=0.5):")
print(f"  mean={inv['mean']:.4f} target={inv['target']:.4f}"
      f" z={inv['z']:+.2f} passed={inv['passed']}")

erg = ergodic_test(m, k, lambda F: F.a, T=1.0, eps_list=[0.4, 0.1],
                   n=300, seed=2)
print("\nergodic theorem (sup deviation of the time average of a):")
for e, s, lo, hi in zip(erg.eps_list, erg.statistic, erg.ci_lo, erg.ci_hi):
    print(f"  eps={e:.2f}  statistic={s:.4f}  CI=[{lo:.4f}, {hi:.4f}]")
print(f"  decreasing={erg.decreasing}  separated={erg.separated}")

drf = drift_vanishing_test(k, [0.4, 0.1])
print("\nprincipal-value drift for the symmetric kernel:")
print(f"  sup |g_eps| = {drf['max_sup_g']:.2e}  passed={drf['passed']}")

trip = LevyTriplet(A=effective_A(m, 4096), theta_bar=k.theta_bar,
                   alpha=k.alpha)
res = simulate_ensemble(m, k, SimConfig(eps=0.2, t_max=1.0, seed=3), 2000,
                        functionals={"b": lambda F: F.b}, phase_law="pi")
rep = ecf_test(res, trip, t=1.0, u_grid=np.arange(-3.0, 3.01, 0.25))
print("\nECF against the limiting exponent at eps=0.2 (n=2000):")
print(f"  sup distance = {rep.sup_distance:.4f}"
      f"  fraction |z|>3 = {float(np.mean(rep.z_scores > 3)):.3f}"
      f"  passed={rep.passed}")

mod = modulus_diagnostic(res, delta_grid=[0.25, 0.125, 0.0625])
print("\ncontinuity modulus of the rescaled drift integral:")
for r in mod["rows"]:
    print(f"  delta={r['delta']:.4f}  statistic={r['statistic']:.4f}"
          f"  / sqrt(d) ln(1/d) = {r['ratio']:.3f}")
print(f"  ratio spread = {mod['ratio_spread']:.2f}"
      f"  bounded within x3 = {mod['bounded_within_3']}")
