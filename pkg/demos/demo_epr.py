"""Walkthrough: estimating one particle's position and momentum from a
correlated pair.

The two-particle Gaussian is a sharp approximate eigenstate of the relative
position and total momentum.  Measuring the first position directly and the
partner momentum through the Fourier basis of the second axis, the optimal
estimates read x and an affine function of p'.  Both estimates are sharp in
the eigenket limit, yet the universal relation
disp_x * eps_p + eps_x * disp_p + eps_x * eps_p >= hbar/2 is saturated, not
violated: the closed form gives exactly hbar/2.
"""

from pomest.scenarios import EprParams, epr_closed_form, epr_numeric, recommended_epr_points

params = EprParams(sigma=0.1, tau=0.1, a=0.0, p0=1.0, hbar=1.0)
closed = epr_closed_form(params)
print("closed form:")
print(f"  disp_x = {closed.disp_x:.6f}   eps_x = {closed.eps_x:.1f}")
print(f"  disp_p = {closed.disp_p:.6f}   eps_p = {closed.eps_p:.6f}")
print(f"  momentum estimate = {closed.p_estimate_coeff[0]:+.6f} "
      f"{closed.p_estimate_coeff[1]:+.6f} * p'")
print(f"  universal-relation lhs = {closed.ungen_lhs:.12f} (rhs = {closed.ungen_rhs})")

points, length = recommended_epr_points(params)
print(f"\ngrid run at {points}^2 points over [-{length}, {length}]:")
rep = epr_numeric(params, points, length)
print(f"  disp_x = {rep.numeric.disp_x:.6f}  (rel err {rep.rel_err_disp_x:.1e})")
print(f"  disp_p = {rep.numeric.disp_p:.6f}  (rel err {rep.rel_err_disp_p:.1e})")
print(f"  eps_p  = {rep.numeric.eps_p:.6f}  (rel err {rep.rel_err_eps_p:.1e})")
print(f"  fitted momentum estimate = {rep.numeric.p_estimate_coeff[0]:+.6f} "
      f"{rep.numeric.p_estimate_coeff[1]:+.6f} * p'")
print(f"  universal-relation lhs = {rep.numeric.ungen_lhs:.6f}")
