"""Walkthrough: linear estimates from prior moments and the squeezing trade-off.

When only the means and variances of position and momentum are known, the
best linear use of the canonical joint readout shrinks both the error and
the spread of each estimate.  The remaining freedom is the squeezing ratio
of the auxiliary mode.  Minimizing the joint-uncertainty cost
disp_x eps_p + eps_x disp_p + eps_x eps_p splits into two regimes around
prior product 2 hbar; for priors below it the cost is minimized by giving
up on one readout entirely (an endpoint of the squeezing range), while the
ratio-matched interior choice takes over above it.
"""

from pomest.scenarios import LinearEstimateInputs, linear_estimate, optimize_squeezing

inputs = LinearEstimateInputs(mean_x=0.0, var_x=1.0, mean_p=0.0, var_p=1.0,
                              var_xprime=0.5, var_pprime=0.5)
rep = linear_estimate(inputs)
print("balanced auxiliary, unit prior variances:")
print(f"  lambda_x = {rep.x.lam:.4f}")
print(f"  eps_x    = {rep.x.eps_lin:.4f}  (raw readout error {rep.x.eps_raw:.4f})")
print(f"  disp_x   = {rep.x.disp_lin:.4f} (raw readout spread {rep.x.disp_raw:.4f})")
print(f"  joint cost J = {rep.joint_cost:.4f}  (universal floor 0.5)")

print("\nsqueezing-ratio optimization across prior products (hbar = 1):")
for g in (0.5, 1.0, 1.9, 2.0, 2.5, 3.0):
    vx, vp = g * 1.7, g / 1.7
    sq = optimize_squeezing(vx, vp)
    print(f"  DX*DP = {g:>4}: regime {sq.regime:<9} J_min = {sq.j_min:.4f}  "
          f"J_endpoint = {sq.j_endpoint:.4f}  J_matched = {sq.j_matched:.4f} "
          f"(matched ratio {sq.matched_ratio:.3f})")

sq = optimize_squeezing(0.5, 0.5)
print("\nminimum-uncertainty prior: ratio-matched dispersion product =",
      f"{sq.disp_product_matched:.6f} (= hbar/4)")
