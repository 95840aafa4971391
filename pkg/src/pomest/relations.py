"""Numerical verifiers for the uncertainty relations obeyed by estimates.

Every checker returns a RelationReport holding the two sides of the
inequality, the slack and a saturation flag.  Reports are oriented so that
the theorem reads lhs >= rhs; for the one upper bound (``tracefish``) the
bound itself is stored as lhs so that a passing report always has
``slack = lhs - rhs >= -numeric_tol``.  Equality-type relations
(``varsum``, ``fishident``) are judged on |slack|.

Exact finite-dimensional checks default to saturation tolerance 1e-6;
grid-quadrature checks (the heterodyne suite) use 1e-3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimation import (
    Estimator,
    estimate_stats,
    optimal_estimate,
    optimal_estimate_no_info,
    probabilities,
    statistical_deviation,
)
from .operators import DensityOperator, HermitianOperator
from .pom import Pom

__all__ = [
    "RelationReport",
    "GridResolutionError",
    "UnbiasednessError",
    "commutator_bound",
    "check_geom",
    "check_accbound",
    "check_ungen",
    "check_uni",
    "check_uncanon",
    "HeterodyneAnalysis",
    "heterodyne_analysis",
    "heterodyne_suite",
    "SATURATION_TOL_EXACT",
    "SATURATION_TOL_GRID",
    "NUMERIC_TOL",
]

SATURATION_TOL_EXACT = 1e-6
SATURATION_TOL_GRID = 1e-3
NUMERIC_TOL = 1e-9

EQUALITY_RELATIONS = {"varsum", "fishident"}


class GridResolutionError(RuntimeError):
    """Grid too coarse for the requested quadrature or cross-check."""


class UnbiasednessError(ValueError):
    """Estimator fails the universal-unbiasedness hypothesis of the relation."""


@dataclass
class RelationReport:
    """One verified relation: lhs >= rhs with slack = lhs - rhs.

    ``saturated`` flags |slack| < saturation_tol; ``passed`` means
    slack >= -numeric_tol (or |slack| <= numeric precision for
    equality-type relations).
    """

    relation_id: str
    lhs: float
    rhs: float
    slack: float
    saturated: bool
    passed: bool
    saturation_tol: float
    numeric_tol: float
    inputs_digest: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "saturated": self.saturated,
            "passed": self.passed,
            "saturation_tol": self.saturation_tol,
            "numeric_tol": self.numeric_tol,
            "inputs_digest": self.inputs_digest,
        }

    def csv_row(self, scenario="") -> list:
        return [scenario, self.relation_id, repr(self.lhs), repr(self.rhs),
                repr(self.slack), self.saturated, repr(self.saturation_tol)]


def _report(relation_id, lhs, rhs, saturation_tol, numeric_tol=NUMERIC_TOL, digest=None):
    slack = lhs - rhs
    if relation_id in EQUALITY_RELATIONS:
        passed = abs(slack) <= max(saturation_tol, numeric_tol)
    else:
        passed = slack >= -numeric_tol
    return RelationReport(relation_id, float(lhs), float(rhs), float(slack),
                          bool(abs(slack) < saturation_tol), bool(passed),
                          saturation_tol, numeric_tol, digest or {})


def commutator_bound(a: HermitianOperator, b: HermitianOperator, rho: DensityOperator) -> float:
    """|<[A, B]>|/2; the commutator of Hermitian operators is anti-Hermitian."""
    comm = a.matrix @ b.matrix - b.matrix @ a.matrix
    return float(abs(np.trace(rho.matrix @ comm))) / 2


def check_geom(a: HermitianOperator, b: HermitianOperator, pom: Pom, rho: DensityOperator,
               saturation_tol=SATURATION_TOL_EXACT, numeric_tol=NUMERIC_TOL) -> RelationReport:
    """Geometric relation for optimal estimates of two observables.

    lhs = sqrt(disp_A^2 + eps_A^2) * sqrt(disp_B^2 + eps_B^2), which equals
    DeltaA * DeltaB by the dispersion-inaccuracy Pythagorean identity; the
    observed gap between the two evaluations is recorded in the digest.
    """
    est_a = optimal_estimate(a, pom, rho)
    est_b = optimal_estimate(b, pom, rho)
    sa = estimate_stats(est_a, a, rho)
    sb = estimate_stats(est_b, b, rho)
    lhs = float(np.sqrt(sa.dispersion**2 + sa.inaccuracy**2) * np.sqrt(sb.dispersion**2 + sb.inaccuracy**2))
    rhs = commutator_bound(a, b, rho)
    direct = float(np.sqrt(a.variance(rho) * b.variance(rho)))
    return _report("geom", lhs, rhs, saturation_tol, numeric_tol,
                   {"delta_a_delta_b": direct, "pythagoras_gap": abs(lhs - direct)})


def check_accbound(a: HermitianOperator, pom: Pom, rho: DensityOperator,
                   saturation_tol=SATURATION_TOL_EXACT, numeric_tol=NUMERIC_TOL) -> RelationReport:
    """Incompatibility lower bound on the optimal estimate's inaccuracy.

    lhs = eps(A_opt)^2; rhs sums |tr[rho [A, E_k]]|^2 / (4 tr[rho E_k]) over
    the effective elements E_k = w_k M_k, skipping zero-probability outcomes.
    Saturates for pure states measured by a complete (rank-one) family.
    """
    est = optimal_estimate(a, pom, rho)
    eps = statistical_deviation(a, est, rho)
    if pom.kets is not None:
        amp_rho_a = np.einsum("kn,nm,km->k", pom.kets.conj(), rho.matrix @ a.matrix, pom.kets)
        imag = np.imag(amp_rho_a)
        t = np.real(np.einsum("kn,nm,km->k", pom.kets.conj(), rho.matrix, pom.kets))
        comm2 = 4 * imag**2
    else:
        ra = rho.matrix @ a.matrix
        tr_ra = np.einsum("kij,ji->k", pom._operators, ra)
        t = np.real(np.einsum("kij,ji->k", pom._operators, rho.matrix))
        comm2 = 4 * np.imag(tr_ra) ** 2
    keep = pom.weights * t > 1e-14
    rhs = float(np.sum(pom.weights[keep] * comm2[keep] / (4 * t[keep])))
    return _report("accbound", eps**2, rhs, saturation_tol, numeric_tol,
                   {"n_outcomes_kept": int(keep.sum())})


def check_ungen(a: HermitianOperator, b: HermitianOperator, est_a: Estimator,
                est_b: Estimator, rho: DensityOperator,
                saturation_tol=SATURATION_TOL_EXACT, numeric_tol=NUMERIC_TOL) -> RelationReport:
    """Universal joint-measurement relation for arbitrary estimates f, g.

    lhs = disp_A eps_B + eps_A disp_B + eps_A eps_B >= |<[A,B]>|/2 = rhs.
    Both estimators must read out the same measurement.
    """
    if est_a.pom is not est_b.pom:
        raise ValueError("both estimates must be functions of one measurement")
    sa = estimate_stats(est_a, a, rho)
    sb = estimate_stats(est_b, b, rho)
    lhs = sa.dispersion * sb.inaccuracy + sa.inaccuracy * sb.dispersion + sa.inaccuracy * sb.inaccuracy
    rhs = commutator_bound(a, b, rho)
    return _report("ungen", lhs, rhs, saturation_tol, numeric_tol,
                   {"disp_a": sa.dispersion, "eps_a": sa.inaccuracy,
                    "disp_b": sb.dispersion, "eps_b": sb.inaccuracy})


def _unbiasedness_gap(est: Estimator, a: HermitianOperator, subspace_dim=None) -> float:
    pom = est.pom
    if pom.kets is not None:
        acc = (pom.kets.T * (pom.weights * est.values)) @ pom.kets.conj()
    else:
        acc = np.einsum("k,kij->ij", pom.weights * est.values, pom._operators)
    gap = acc - a.matrix
    if subspace_dim is not None:
        gap = gap[:subspace_dim, :subspace_dim]
    return float(np.abs(gap).max())


def check_uni(a: HermitianOperator, b: HermitianOperator, est_a: Estimator, est_b: Estimator,
              rho: DensityOperator, unbiased_tol=1e-8, subspace_dim=None,
              saturation_tol=SATURATION_TOL_EXACT, numeric_tol=NUMERIC_TOL) -> RelationReport:
    """Product relation eps_A eps_B >= |<[A,B]>|/2 for universally unbiased estimates.

    The hypothesis sum_k w_k f_k M_k = A (and likewise for B) is verified up
    to ``unbiased_tol`` before checking; for POMs truncated from continuous
    families pass ``subspace_dim`` to verify it on the faithful leading block.
    """
    gap_a = _unbiasedness_gap(est_a, a, subspace_dim)
    gap_b = _unbiasedness_gap(est_b, b, subspace_dim)
    if max(gap_a, gap_b) > unbiased_tol:
        raise UnbiasednessError(
            f"estimates are not universally unbiased (gaps {gap_a:.2e}, {gap_b:.2e})"
        )
    eps_a = statistical_deviation(a, est_a, rho)
    eps_b = statistical_deviation(b, est_b, rho)
    rhs = commutator_bound(a, b, rho)
    return _report("uni", eps_a * eps_b, rhs, saturation_tol, numeric_tol,
                   {"eps_a": eps_a, "eps_b": eps_b, "unbiased_gap": max(gap_a, gap_b)})


@dataclass
class HeterodyneAnalysis:
    """Full diagnostics of a phase-space grid measurement on one state."""

    pom: Pom
    rho: DensityOperator
    p: np.ndarray
    q_values: np.ndarray
    est_1: Estimator
    est_2: Estimator
    disp: tuple
    eps2: tuple
    noinfo_disp: tuple
    fisher: np.ndarray
    fisher_marginal: tuple
    cov_q: np.ndarray
    cov_opt: np.ndarray
    excluded_mass: float
    crosscheck_max: float
    crosscheck_points: int
    mat_identity_gap: float
    reports: list

    @property
    def trace_fisher(self) -> float:
        return float(self.fisher[0, 0] + self.fisher[1, 1])


def _grid_shape(pom: Pom):
    if pom.grid is None:
        raise ValueError("POM carries no grid; heterodyne analysis needs a phase-space grid")
    n = pom.grid.points_per_axis
    return n, pom.grid.step


def heterodyne_analysis(rho: DensityOperator, pom: Pom, crosscheck_tol=SATURATION_TOL_GRID,
                        q_floor=1e-14, saturation_tol=SATURATION_TOL_GRID) -> HeterodyneAnalysis:
    """Estimates, dispersions, inaccuracies and Fisher data for a grid POM.

    The two quadratures are estimated twice: directly from the state and the
    outcome operators, and from the gradient of log Q as
    alpha_j + (1/4) d_j log Q.  The two routes are compared on interior
    points where a step-halving (Richardson) error estimate certifies the
    finite difference; disagreement beyond ``crosscheck_tol`` raises
    GridResolutionError.  The Fisher matrix is integrated as (dQ)(dQ)/Q on
    interior points with the boundary ring excluded and its probability mass
    reported.
    """
    if pom.kind not in ("coherent-grid",):
        raise ValueError("heterodyne analysis requires a vacuum-imageband (coherent) grid POM")
    from . import fock

    n, h = _grid_shape(pom)
    x1, x2 = fock.quadratures(pom.dim)
    p = probabilities(pom, rho)
    Q = (p / pom.weights / np.pi).reshape(n, n)

    est_1 = optimal_estimate(x1, pom, rho)
    est_2 = optimal_estimate(x2, pom, rho)
    s1 = estimate_stats(est_1, x1, rho)
    s2 = estimate_stats(est_2, x2, rho)
    eps2 = (s1.inaccuracy**2, s2.inaccuracy**2)
    disp = (s1.dispersion, s2.dispersion)

    ni_1 = optimal_estimate_no_info(x1, pom)
    ni_2 = optimal_estimate_no_info(x2, pom)
    ni_s1 = estimate_stats(ni_1, x1, rho)
    ni_s2 = estimate_stats(ni_2, x2, rho)
    noinfo_disp = (ni_s1.dispersion, ni_s2.dispersion)

    a1 = pom.values_array(0).reshape(n, n)
    a2 = pom.values_array(1).reshape(n, n)
    pm = p.reshape(n, n)

    # central-difference gradient of Q on interior points
    def _gradient_fisher(q, step):
        g1 = np.zeros_like(q)
        g2 = np.zeros_like(q)
        g1[1:-1, :] = (q[2:, :] - q[:-2, :]) / (2 * step)
        g2[:, 1:-1] = (q[:, 2:] - q[:, :-2]) / (2 * step)
        mask = np.zeros_like(q, dtype=bool)
        mask[1:-1, 1:-1] = True
        mask &= q > 0
        mat = np.zeros((2, 2))
        for (i, gi) in ((0, g1), (1, g2)):
            for (j, gj) in ((0, g1), (1, g2)):
                mat[i, j] = step * step * np.sum(
                    np.where(mask, gi * gj / np.where(mask, q, 1.0), 0.0)
                )
        return g1, g2, mat, mask

    dQ1, dQ2, F_h, fmask = _gradient_fisher(Q, h)
    # the quadrature error at zeros of Q is clean O(h^2): one step-doubling
    # Richardson pass removes it
    _, _, F_2h, _ = _gradient_fisher(Q[::2, ::2], 2 * h)
    F = (4 * F_h - F_2h) / 3
    excluded_mass = float(pm.sum() - pm[fmask].sum())

    # marginal Fisher informations for the Cramer-Rao intermediate step,
    # extrapolated the same way as the joint matrix
    def _marginal_fisher(qm, step):
        dm = np.zeros_like(qm)
        dm[1:-1] = (qm[2:] - qm[:-2]) / (2 * step)
        ok = qm > 0
        ok[0] = ok[-1] = False
        return float(step * np.sum(dm[ok] ** 2 / qm[ok]))

    marg = []
    for axis in (1, 0):
        qm = Q.sum(axis=axis) * h
        marg.append((4 * _marginal_fisher(qm, h) - _marginal_fisher(qm[::2], 2 * h)) / 3)
    fisher_marginal = (marg[0], marg[1])

    # covariances of the outcome pair and of the optimal estimates
    def _cov(v1, v2):
        m1 = float((pm * v1).sum())
        m2 = float((pm * v2).sum())
        c = np.empty((2, 2))
        c[0, 0] = float((pm * v1 * v1).sum()) - m1 * m1
        c[1, 1] = float((pm * v2 * v2).sum()) - m2 * m2
        c[0, 1] = c[1, 0] = float((pm * v1 * v2).sum()) - m1 * m2
        return c

    cov_q = _cov(a1, a2)
    f1 = est_1.values.reshape(n, n)
    f2 = est_2.values.reshape(n, n)
    cov_opt = _cov(f1, f2)
    mat_gap = float(np.abs(cov_opt - (cov_q + F / 16 - np.eye(2) / 2)).max())

    # gradient-form estimates and the certified cross-check
    qmax = Q.max()
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = a1 + 0.25 * dQ1 / Q
        g2 = a2 + 0.25 * dQ2 / Q
    # step-halving error estimate: compare the h and 2h central differences
    check = np.zeros_like(Q, dtype=bool)
    check[2:-2, 2:-2] = True
    check &= Q > 1e-6 * qmax
    for shift in (1, 2):
        for ax in (0, 1):
            check &= np.roll(Q, shift, axis=ax) > q_floor * qmax
            check &= np.roll(Q, -shift, axis=ax) > q_floor * qmax
    cc_max = 0.0
    cc_pts = 0
    if check.any():
        d2Q1 = np.zeros_like(Q)
        d2Q2 = np.zeros_like(Q)
        d2Q1[2:-2, :] = (Q[4:, :] - Q[:-4, :]) / (4 * h)
        d2Q2[:, 2:-2] = (Q[:, 4:] - Q[:, :-4]) / (4 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            rich1 = np.abs(dQ1 - d2Q1) / np.where(Q > 0, Q, 1.0) / 3 * 0.25
            rich2 = np.abs(dQ2 - d2Q2) / np.where(Q > 0, Q, 1.0) / 3 * 0.25
        certified = check & (rich1 < 0.5 * crosscheck_tol) & (rich2 < 0.5 * crosscheck_tol)
        if certified.any():
            cc_max = float(max(np.abs(g1 - f1)[certified].max(),
                               np.abs(g2 - f2)[certified].max()))
            cc_pts = int(certified.sum())
    if cc_pts and cc_max > crosscheck_tol:
        raise GridResolutionError(
            f"direct and log-gradient estimates disagree by {cc_max:.2e} "
            f"on {cc_pts} certified points (tol {crosscheck_tol:.1e})"
        )

    # Cramer-Rao intermediates are theorems; violations beyond quadrature
    # slack mean the grid lies
    cr_slack = SATURATION_TOL_GRID * max(1.0, F[0, 0], F[1, 1])
    for j in (0, 1):
        if fisher_marginal[j] < 1 / cov_q[j, j] - cr_slack:
            raise GridResolutionError("marginal Fisher information violates Cramer-Rao on this grid")
        if F[j, j] < fisher_marginal[j] - cr_slack:
            raise GridResolutionError("joint Fisher information fell below its marginal")

    eps_sum = eps2[0] + eps2[1]
    tr_f = F[0, 0] + F[1, 1]
    digest = {"state_purity": rho.purity(), "grid": pom.grid.to_json(),
              "excluded_mass": excluded_mass}
    # quadrature relations pass at the grid tolerance, not at exact arithmetic
    reports = [
        _report("unbest", disp[0] * disp[1], 0.125, saturation_tol, saturation_tol, digest),
        _report("accbest", eps_sum, 0.25, saturation_tol, saturation_tol, digest),
        _report("fishbound", eps2[0], F[1, 1] / 16, saturation_tol, saturation_tol,
                dict(digest, quadrature=1)),
        _report("fishbound", eps2[1], F[0, 0] / 16, saturation_tol, saturation_tol,
                dict(digest, quadrature=2)),
        _report("tracefish", 4.0, tr_f, saturation_tol, saturation_tol, digest),
        _report("fishident", eps_sum, 0.5 - tr_f / 16, saturation_tol, saturation_tol, digest),
    ]
    return HeterodyneAnalysis(pom, rho, p, Q.ravel(), est_1, est_2, disp, eps2,
                              noinfo_disp, F, fisher_marginal, cov_q, cov_opt,
                              excluded_mass, cc_max, cc_pts, mat_gap, reports)


def heterodyne_suite(rho: DensityOperator, pom: Pom, **kwargs) -> list:
    """RelationReports for the dispersion, inaccuracy and Fisher relations."""
    return heterodyne_analysis(rho, pom, **kwargs).reports


def check_uncanon(rho: DensityOperator, pom: Pom, hbar=1.0,
                  saturation_tol=SATURATION_TOL_GRID) -> RelationReport:
    """Canonical joint measurement mapped from the quadrature pair.

    The quadrature pair has commutator i/2; rescaling both outcomes by
    sqrt(2 hbar) produces a canonically conjugate pair, so the product of
    the optimal-estimate dispersions maps to 2 hbar times the quadrature
    value, bounded below by hbar/4.  The digest records the ratio to the
    universally-unbiased bound hbar.
    """
    analysis = heterodyne_analysis(rho, pom, saturation_tol=saturation_tol)
    product = 2 * hbar * analysis.disp[0] * analysis.disp[1]
    noinfo = 2 * hbar * analysis.noinfo_disp[0] * analysis.noinfo_disp[1]
    return _report("uncanon", product, hbar / 4, saturation_tol, saturation_tol,
                   digest={"hbar": hbar, "unbiased_bound": hbar,
                           "ratio_to_unbiased_bound": product / hbar,
                           "noinfo_product": noinfo})
