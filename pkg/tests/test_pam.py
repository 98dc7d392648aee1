import math

import numpy as np
import pytest

import chainbound as cb
from chainbound import pam
from chainbound.errors import DomainError, ParameterError
from chainbound.stochastic import substream


def _l2_oracle(t, s, x, y, modes):
    """Closed-form mode-sum value of the squared L2 kernel difference;
    independent of the quadrature route."""
    k = np.arange(1, modes + 1, dtype=float)
    c = np.pi ** 2 * k ** 2
    sx = math.sqrt(2.0) * np.sin(np.pi * k * x)
    sy = math.sqrt(2.0) * np.sin(np.pi * k * y)
    total = float((sx ** 2 * (1.0 - np.exp(-2 * c * (t - s))) / (2 * c)).sum())
    if s > 0.0:
        i1 = (np.exp(-2 * c * (t - s)) - np.exp(-2 * c * t)) / (2 * c)
        i2 = (1.0 - np.exp(-2 * c * s)) / (2 * c)
        i3 = (np.exp(-c * (t - s)) - np.exp(-c * (t + s))) / (2 * c)
        total += float((sx ** 2 * i1 + sy ** 2 * i2 - 2 * sx * sy * i3).sum())
    return total


def test_parabolic_metric_trivials():
    assert pam.parabolic_metric([0.0, 0.3], [0.0, 0.3]) == 0.0
    assert pam.parabolic_metric([0.0, 0.0], [1.0, 0.0]) == 1.0


def test_parabolic_metric_triangle_property():
    g = substream(71, 0)
    pts = np.column_stack([g.uniform(0, 2, 10_000 * 3),
                           g.uniform(0, 1, 10_000 * 3)]).reshape(3, -1, 2)
    a, b, c = pts
    dab = pam.parabolic_metric(a, b)
    dbc = pam.parabolic_metric(b, c)
    dac = pam.parabolic_metric(a, c)
    assert np.all(dac <= dab + dbc + 1e-12)
    assert np.allclose(dab, pam.parabolic_metric(b, a))


def test_green_vanishes_on_boundary_and_symmetry():
    assert pam.green_eval(0.5, 0.37, 0.0, 64) == 0.0
    assert pam.green_eval(0.5, 0.37, 1.0, 64) == pytest.approx(0.0, abs=1e-15)
    a = pam.green_eval(0.1, 0.2, 0.7, 64)
    b = pam.green_eval(0.1, 0.7, 0.2, 64)
    assert a == pytest.approx(b, rel=1e-14)


def test_green_domain_error_at_time_zero():
    with pytest.raises(DomainError):
        pam.green_eval(0.0, 0.5, 0.5, 8)
    with pytest.raises(DomainError):
        pam.green_eval(-0.1, 0.5, 0.5, 8)


def test_green_truncation_tail_bound():
    # at t = 1 the k >= 2 terms are bounded by 2 e^(-4 pi^2)
    tail = 2.0 * math.exp(-4.0 * math.pi ** 2)
    g1 = pam.green_eval(1.0, 0.3, 0.7, 1)
    g50 = pam.green_eval(1.0, 0.3, 0.7, 50)
    assert abs(g50 - g1) <= tail
    # at the even-mode null point the agreement is at relative machine scale
    h1 = pam.green_eval(1.0, 0.5, 0.5, 1)
    h50 = pam.green_eval(1.0, 0.5, 0.5, 50)
    assert abs(h50 - h1) <= 1e-16 * abs(h1)


@pytest.mark.parametrize("tup", [
    (0.7, 0.0, 0.3, 0.3),
    (0.7, 0.2, 0.3, 0.8),
    (1.0, 0.99, 0.5, 0.51),
    (0.5, 0.25, 0.25, 0.25),
    (0.3, 0.0, 0.5, 0.5),
])
def test_green_l2_quadrature_matches_mode_oracle(tup):
    t, s, x, y = tup
    quad = pam.green_l2_difference(t, s, x, y, modes=64, panels_per_decade=10)
    oracle = _l2_oracle(t, s, x, y, 64)
    assert quad == pytest.approx(oracle, rel=2e-4)


def test_green_l2_vanishes_at_coincidence():
    # x = y and t - s -> 0: continuity in L2
    small = pam.green_l2_difference(0.5 + 1e-7, 0.5, 0.4, 0.4, modes=32)
    assert small <= 1e-3
    with pytest.raises(DomainError):
        pam.green_l2_difference(0.5, 0.5, 0.1, 0.2)


def test_green_l2_sqrt_time_scaling():
    # s = 0, x = y: the squared distance grows like sqrt(t)
    vals = [pam.green_l2_difference(t, 0.0, 0.5, 0.5, 64) for t in (0.01, 0.04)]
    ratio = vals[1] / vals[0]
    assert ratio == pytest.approx(2.0, rel=0.25)  # sqrt(4) = 2


def test_green_constant_stable_under_quadrature_doubling():
    c1 = pam.green_regularity_constant(T=1.0, modes=32, grid_n=4,
                                       panels_per_decade=6,
                                       check_convergence=False)
    c2 = pam.green_regularity_constant(T=1.0, modes=32, grid_n=4,
                                       panels_per_decade=12,
                                       check_convergence=False)
    assert math.isfinite(c1) and c1 > 0.0
    assert abs(c2 - c1) / c2 <= 0.05


def test_pam_heat_reduction_spectral_accuracy():
    params = pam.PAMParams(eta=0.0, T=0.1, Mx=64, Nt=4096, u0="sin",
                           replicates=1, seed=3)
    ens = pam.pam_solve(params)
    exact = pam.heat_solution(params, ens.times, ens.xs)
    assert np.abs(ens.fields[0] - exact).max() <= 1e-12


def test_pam_zero_initial_condition_stays_zero():
    params = pam.PAMParams(eta=1.0, T=0.05, Mx=32, Nt=256, u0=np.zeros(4),
                           replicates=3, seed=5)
    ens = pam.pam_solve(params)
    assert np.abs(ens.fields).max() == 0.0


def test_pam_boundary_rows_exactly_zero():
    params = pam.PAMParams(eta=1.0, T=0.05, Mx=32, Nt=512, u0="sin",
                           replicates=4, seed=7)
    ens = pam.pam_solve(params)
    assert np.all(ens.fields[:, :, 0] == 0.0)
    assert np.all(ens.fields[:, :, -1] == 0.0)


def test_pam_parseval_consistency():
    params = pam.PAMParams(eta=1.0, T=0.05, Mx=64, Nt=512, u0="sin",
                           replicates=2, seed=9)
    ens = pam.pam_solve(params)
    row = ens.fields[1, -1, 1:-1]
    coeffs = pam._grid_to_coeffs(row, params.Mx, params.modes)
    l2_grid = float((row ** 2).sum()) / params.Mx
    l2_coeff = float((coeffs ** 2).sum())
    assert abs(l2_grid - l2_coeff) <= 1e-10 * max(l2_coeff, 1e-30)


def test_pam_mean_matches_heat_flow():
    params = pam.PAMParams(eta=1.0, T=0.1, Mx=32, Nt=1024, u0="sin",
                           replicates=400, seed=2026)
    ens = pam.pam_solve(params)
    mean = ens.fields.mean(axis=0)
    se = ens.fields.std(axis=0, ddof=1) / math.sqrt(params.replicates)
    exact = pam.heat_solution(params, ens.times, ens.xs)
    nt = len(ens.times)
    for it, ix in [(nt // 2, 8), (nt // 2, 16), (nt - 1, 16), (nt - 1, 24)]:
        assert abs(mean[it, ix] - exact[it, ix]) <= 4.0 * se[it, ix]


def test_pam_determinism():
    params = pam.PAMParams(eta=1.0, T=0.05, Mx=32, Nt=256, u0="sin",
                           replicates=5, seed=13)
    a = pam.pam_solve(params)
    b = pam.pam_solve(params)
    assert np.array_equal(a.fields, b.fields)


def test_pam_params_validation():
    with pytest.raises(ParameterError):
        pam.PAMParams(eta=-1.0, T=0.1)
    with pytest.raises(ParameterError):
        pam.PAMParams(eta=1.0, T=0.1, Mx=32, K=64)
    with pytest.raises(ParameterError):
        pam.PAMParams(eta=1.0, T=0.1, p=0.5)


def test_modulus_statistic_constant_field_zero():
    params = pam.PAMParams(eta=0.0, T=0.1, Mx=16, Nt=64, u0="sin",
                           replicates=2, seed=1)
    ens = pam.pam_solve(params)
    ens.fields[:] = 1.0
    stat = pam.pam_modulus_statistic(ens, p=6.0)
    assert stat.lp_value == 0.0


def test_modulus_statistic_deterministic_field_finite_and_refines():
    stats = []
    for mx, nt in ((16, 256), (32, 1024)):
        params = pam.PAMParams(eta=0.0, T=0.1, Mx=mx, Nt=nt, u0="sin",
                               replicates=1, seed=1)
        stats.append(pam.pam_modulus_statistic(pam.pam_solve(params), 6.0))
    assert all(math.isfinite(s.lp_value) and s.lp_value > 0.0 for s in stats)
    # the smooth field's ratio stays bounded as the grid refines
    assert stats[1].lp_value <= 1.5 * stats[0].lp_value


def test_modulus_statistic_refinement_stability_small():
    vals = {}
    for mx, nt in ((16, 256), (32, 1024)):
        params = pam.PAMParams(eta=1.0, T=0.1, Mx=mx, Nt=nt, u0="sin",
                               replicates=60, seed=15, store_stride=nt // 32)
        vals[mx] = pam.pam_modulus_statistic(pam.pam_solve(params), 6.0)
    ratio = vals[32].lp_value / vals[16].lp_value
    assert 0.5 <= ratio <= 2.0


def test_modulus_statistic_time_exponent_diagnostic():
    """Raising the time exponent above 1/4 shifts weight onto the finest
    time gaps, so the statistic grows faster under refinement than at the
    theoretical exponent; lowering it is even more stable."""
    ens = {}
    for mx, nt in ((16, 256), (32, 1024)):
        params = pam.PAMParams(eta=1.0, T=0.1, Mx=mx, Nt=nt, u0="sin",
                               replicates=60, seed=15, store_stride=nt // 32)
        ens[mx] = pam.pam_solve(params)
    ratios = {}
    for expo in (0.15, 0.25, 0.35):
        fine = pam.pam_modulus_statistic(ens[32], 6.0, time_exponent=expo)
        coarse = pam.pam_modulus_statistic(ens[16], 6.0, time_exponent=expo)
        ratios[expo] = fine.lp_value / coarse.lp_value
    assert ratios[0.35] > ratios[0.25] > ratios[0.15]
    assert 0.5 <= ratios[0.25] <= 2.0
