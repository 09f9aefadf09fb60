"""Theorem drivers: certificates, Hardy gating, sweeps, appendix checks."""

import math

import numpy as np
import pytest

from stripspec import analysis as an
from stripspec import profiles as P

PI_HALF_SQ = (math.pi / 2) ** 2


def test_grid_policy_couples_nt_to_eps():
    pol = an.GridPolicy(half_length=10.0, n_s=401)
    assert pol.grid_for(0.2).n_t == 40
    assert pol.grid_for(0.1).n_t == 80
    assert pol.grid_for(0.05).n_t == 160
    assert pol.grid_for(0.025).n_t == 256          # capped
    assert pol.grid_for(1.0).n_t == 16             # floor
    assert an.GridPolicy(n_t=20).grid_for(0.01).n_t == 20
    wide = pol.widened(2.0)
    assert wide.half_length == 20.0 and wide.grid_for(0.1).n_s == 801
    assert wide.grid_for(0.1).h_s == pytest.approx(pol.grid_for(0.1).h_s)


def test_discrete_threshold_above_continuum():
    grid = an.GridPolicy(n_s=41, n_t=40).grid_for(0.1)
    th_h = an.discrete_threshold(grid, 0.1)
    th_c = an.continuum_threshold(0.1)
    bias = th_h - th_c
    assert 0.0 < bias < 0.06
    # P1 dispersion constant: lambda^2 h^2 / 12 per transverse eigenvalue
    assert bias == pytest.approx(PI_HALF_SQ**2 * grid.h_t**2 / 12 / 0.1**2,
                                 rel=0.05)


def test_fit_loglog_recovers_exponent():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    slope, resid = an.fit_loglog(eps, 3.0 * eps**1.7)
    assert slope == pytest.approx(1.7, abs=1e-10)
    assert resid < 1e-12


def test_plateau_shape():
    assert np.all(an.plateau([-1.0, -0.5, 0.0, 0.5, 1.0]) == 1.0)
    assert np.all(an.plateau([-2.5, 2.0, 3.0]) == 0.0)
    u = np.linspace(-3, 3, 601)
    vals = an.plateau(u)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    h = 1e-6
    fd = (an.plateau(u + h) - an.plateau(u - h)) / (2 * h)
    assert np.max(np.abs(fd - an.plateau_prime(u))) < 1e-6


def rightside_gap_oracle(profile, eps, n):
    """Independent oracle: 2D quadrature of both integrals of the
    cutoff-state identity (kinetic cutoff term minus the twist term)."""
    from numpy.polynomial.legendre import leggauss
    tg, tw = leggauss(80)
    t = 0.5 * (tg + 1.0)
    wt = 0.5 * tw
    chi = math.sqrt(2) * np.sin(math.pi * t / 2)
    chip = math.sqrt(2) * (math.pi / 2) * np.cos(math.pi * t / 2)
    edges = np.linspace(-2 * n, 2 * n, 8 * n + 1)
    xg, xw = leggauss(10)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    s = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * xw[None, :]).ravel()
    tau2 = profile.tau(s) ** 2
    f = np.sqrt(1.0 + eps**2 * np.outer(t**2, tau2))
    phi = an.plateau(s / n)
    dphi = an.plateau_prime(s / n) / n
    kin = np.sum(w * dphi**2 * ((chi[:, None] ** 2 / f) * wt[:, None]).sum(0))
    twist = np.sum(w * tau2 * phi**2
                   * (((t * chi * chip)[:, None] / f) * wt[:, None]).sum(0))
    return kin - twist


@pytest.mark.parametrize("n", [5, 20])
def test_trial_certificate_matches_rightside_oracle(n):
    profile = P.gaussian_twist(1.0, 1.0)
    got = an.trial_function_certificate(profile, 0.1, n)
    oracle = rightside_gap_oracle(profile, 0.1, n)
    assert abs(got - oracle) < 1e-8


def test_trial_certificate_goes_negative():
    profile = P.gaussian_twist(1.0, 1.0)
    assert an.trial_function_certificate(profile, 0.1, 1) > 0.0
    assert an.trial_function_certificate(profile, 0.1, 50) < 0.0


def test_trial_certificate_untwisted_never_certifies():
    gap = an.trial_function_certificate(P.zero_profile(), 0.1, 50)
    assert gap > 0.0


def test_trial_certificate_rejects_bent_profiles():
    with pytest.raises(an.HypothesisError):
        an.trial_function_certificate(P.gaussian_bump(0.5, 1.0), 0.1, 10)
    with pytest.raises(ValueError):
        an.trial_function_certificate(P.gaussian_twist(1.0, 1.0), 0.1, 0)


def test_trial_gap_limit_consistency():
    # gap(n) = limit + b/n + c/n^2: three-point extrapolation in 1/n must
    # land on the independently computed limit integral
    profile = P.gaussian_twist(1.0, 1.0)
    eps = 0.1
    limit = an.trial_gap_limit(profile, eps)
    assert limit < 0.0
    g1, g2, g4 = (an.trial_function_certificate(profile, eps, n)
                  for n in (50, 100, 200))
    extrapolated = (g4 * 8 - g2 * 6 + g1) / 3.0
    assert abs(extrapolated - limit) < 1e-6


def test_detect_flat_not_certified():
    det = an.detect_discrete_spectrum(
        P.zero_profile(), 0.1, an.GridPolicy(half_length=10.0, n_s=201, n_t=160))
    assert not det.certified and not det.inconclusive
    assert det.margin == pytest.approx((math.pi / 20) ** 2, rel=0.15)


def test_detect_negative_bend_certified():
    det = an.detect_discrete_spectrum(
        P.gaussian_bump(-1.0, 2.0), 0.1,
        an.GridPolicy(half_length=10.0, n_s=201, n_t=80))
    assert det.certified
    assert det.margin < -1.0


def test_detect_nonnegative_bend_not_certified():
    det = an.detect_discrete_spectrum(
        P.gaussian_bump(5.0, 1.0), 0.1,
        an.GridPolicy(half_length=10.0, n_s=201, n_t=48))
    assert not det.certified


def test_spectrum_report_twisted_small():
    rep = an.spectrum_report(
        P.gaussian_twist(1.0, 1.0), 0.1,
        an.GridPolicy(half_length=16.0, n_s=321, n_t=80),
        trial_cutoffs=(5, 25), scenario="small-twist")
    assert rep.verdict
    assert rep.extras["certified"] and rep.extras["trial_n0"] == 5.0
    assert rep.extras["trial_limit"] < 0.0
    assert rep.theorem == "T2"


def test_hardy_report_hypothesis_gating():
    pol = an.GridPolicy(half_length=10.0, n_s=101, n_t=24)
    with pytest.raises(an.HypothesisError):
        an.hardy_report(P.zero_profile(), 0.1, pol)
    with pytest.raises(an.HypothesisError):
        an.hardy_report(P.gaussian_bump(-1.0, 2.0), 0.1, pol)
    with pytest.raises(an.HypothesisError):
        an.hardy_report(P.gaussian_bump(7.5, 1.0), 0.1, pol)  # eps*sup > x0


def test_hardy_constant_flat_decays_with_domain():
    cs = []
    for L, ns in [(10.0, 101), (20.0, 201), (40.0, 401)]:
        res = an._hardy_pencil_value(
            P.zero_profile(), 0.1,
            an.GridPolicy(half_length=L, n_s=ns, n_t=160).grid_for(0.1), 1e-7)
        cs.append(res[0])
    assert cs[0] > cs[1] > cs[2] > 0.0
    assert cs[2] < 0.45 * cs[0]


def test_thin_sweep_structure_and_failure_flag():
    # first epsilon violates the metric hypothesis; the sweep continues
    profile = P.gaussian_bump(5.5, 1.0)
    rep = an.thin_strip_sweep(profile, [0.2, 0.1], j_max=1,
                              policy=an.GridPolicy(half_length=6.0, n_s=61,
                                                   n_t=16),
                              effective="bend")
    assert [r["epsilon"] for r in rep.records] == [0.2, 0.1]
    assert rep.records[0]["failed"] and not rep.records[1]["failed"]
    assert "remainder" in rep.records[1]


def test_thin_sweep_multiple_eigenvalues():
    # j_max = 2 exercises the higher-mode records; the second remainder
    # stays O(1) alongside the first (Lemma-3 regime)
    profile = P.gaussian_bump(-1.0, 2.0)
    rep = an.thin_strip_sweep(profile, [0.1, 0.05], j_max=2,
                              policy=an.GridPolicy(half_length=8.0, n_s=161),
                              effective="bend")
    for rec in rep.records:
        assert not rec.get("failed")
        assert rec["lambda2"] > rec["lambda1"]
        assert abs(rec["remainder2"]) < 5.0
    # second mode sits roughly one harmonic spacing above the first
    spacing = rep.records[-1]["lambda2"] - rep.records[-1]["lambda1"]
    assert spacing > 0.5 / 0.05**0.5


def test_thin_sweep_twist_mode_requires_unbent():
    with pytest.raises(an.HypothesisError):
        an.thin_strip_sweep(P.gaussian_bump(1.0, 1.0), [0.1],
                            effective="twist")
    with pytest.raises(ValueError):
        an.thin_strip_sweep(P.zero_profile(), [0.1], effective="nope")


def test_thin_sweep_nonneg_bend_stays_above_threshold():
    # monotone evidence: kappa_g >= 0 profiles never dip below the threshold
    rep = an.thin_strip_sweep(P.gaussian_bump(2.0, 1.0), [0.2, 0.1],
                              policy=an.GridPolicy(half_length=8.0, n_s=161),
                              effective="bend")
    for rec in rep.records:
        assert rec["lambda1"] >= rec["threshold"] - 1e-9


def test_thin_sweep_flat_remainder_eps_independent():
    # flat strip: the remainder is the pure s-truncation/discretization
    # term, the same for every eps
    rep = an.thin_strip_sweep(P.zero_profile(), [0.2, 0.1, 0.05],
                              policy=an.GridPolicy(half_length=8.0, n_s=161),
                              effective="bend")
    rems = np.array([r["remainder"] for r in rep.records])
    gaps = np.array([r["scaled_gap"] for r in rep.records])
    # remainder flat to solver noise while the leading term varies 4x
    assert (rems.max() - rems.min()) / abs(rems.mean()) < 0.01
    assert gaps.max() / gaps.min() > 3.5


def test_scaled_sweep_pure_twist_limit():
    # twist-only strip: eps*(lambda1 - threshold) approaches
    # lambda1(-Delta - tau^2/2) < 0 (net-negative well has a bound state)
    profile = P.gaussian_twist(1.2, 1.5)
    rep = an.scaled_strip_sweep(profile, [0.2, 0.1],
                                policy=an.GridPolicy(half_length=8.0, n_s=161))
    assert rep.extras["lambda_eff_ref"] < 0.0
    errs = [abs(r["rel_err"]) for r in rep.records]
    assert errs[1] < errs[0]


def test_scaled_sweep_smoke():
    profile = P.combine(P.gaussian_bump(-0.5, 2.0), P.gaussian_twist(0.8, 1.5))
    rep = an.scaled_strip_sweep(profile, [0.2, 0.1],
                                policy=an.GridPolicy(half_length=8.0, n_s=161))
    assert rep.theorem == "T8"
    errs = [abs(r["rel_err"]) for r in rep.records]
    assert errs[1] < errs[0] < 0.2


def test_resolvent_hypothesis_errors():
    bump = P.gaussian_bump(-1.0, 2.0)
    with pytest.raises(an.HypothesisError):
        an.resolvent_sweep(bump, [0.1], kappa=0.5)     # kappa + inf <= 0
    with pytest.raises(an.HypothesisError):
        an.resolvent_sweep(P.zero_profile(), [0.1], kappa=2.0, route="bent")
    with pytest.raises(an.HypothesisError):
        an.resolvent_sweep(bump, [0.1], kappa=2.0, route="twisted")
    twist = P.gaussian_twist(1.0, 1.0)
    with pytest.raises(an.HypothesisError):
        an.resolvent_sweep(twist, [0.1], kappa=0.3, route="twisted")
    with pytest.raises(ValueError):
        an.resolvent_sweep(bump, [0.1], kappa=2.0, route="sideways")


def test_resolvent_sweep_smoke_bent():
    rep = an.resolvent_sweep(P.gaussian_bump(-1.0, 2.0), [0.2, 0.1],
                             kappa=2.0,
                             policy=an.GridPolicy(half_length=8.0, n_s=161))
    gaps = [r["gap_norm"] for r in rep.records]
    assert gaps[1] < gaps[0]
    assert rep.records[1]["ratio"] == pytest.approx(gaps[1] / gaps[0])


def test_lemma_a1_report_deterministic_and_passing():
    rep1 = an.lemma_a1_report(n_instances=25, seed=3, resolution=128)
    rep2 = an.lemma_a1_report(n_instances=25, seed=3, resolution=128)
    assert rep1.verdict
    assert rep1.records == rep2.records
    assert rep1.extras["worst_bound"] <= 1e-6


def test_deep_well_report():
    rep = an.deep_well_report(mu_list=(1e2, 1e3, 1e4), resolution=2000)
    assert rep.verdict
    vals = [r["lambda1_over_mu"] for r in rep.records]
    assert -1.0 < vals[-1] < -0.9


def test_flat_convergence_report():
    rep = an.flat_convergence_report()
    assert rep.verdict
    assert rep.extras["final_error"] < 5e-3
    orders = [r["order"] for r in rep.records if "order" in r]
    assert abs(orders[-1] - 2.0) <= 0.1
    assert rep.extras["reference"] == pytest.approx(
        (math.pi / 0.2) ** 2 + (math.pi / 20) ** 2, rel=1e-15)
    assert rep.extras["reference"] == pytest.approx(246.76477, abs=1e-4)
