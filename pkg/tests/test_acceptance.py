"""Acceptance gate: every criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one printed
pass/fail line per criterion (plus runtime against its budget).

One check is an expected red: test_criterion_08b asserts that the implied
constants (L^p estimate of the log-weighted Brownian sup divided by
sqrt(p)) are flat within 25% across p in {1, 2, 4, 8}.  The weighted sup
concentrates around its mean (the estimates themselves are flat within a
few percent), so dividing by sqrt(p) makes the ratio fall like p^(-1/2)
(about 2.7x across this sweep) and the check cannot pass.  The one-sided
bound the estimates do certify (estimate <= C * sqrt(p) with a single C)
holds, and the table's adapted-weight column shows the bounded-constant
diagnostic.  The check is kept as stated rather than loosened; deselect it
with `-m "not expected_red"` for a green run.
"""

import math
import time

import numpy as np
import pytest

import chainbound as cb
from chainbound import fixtures, pam
from chainbound import stochastic as st
from chainbound.cli import main as cli_main

SEED = 2026


def _report(name: str, ok: bool, detail: str, t0: float, budget: float):
    elapsed = time.time() - t0
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail} "
          f"[{elapsed:.1f}s / budget {budget:.0f}s]")
    assert elapsed < budget, f"{name} exceeded its runtime budget"
    return ok


@pytest.fixture(scope="module")
def nets():
    return {
        name: (space, dims, cb.build_net(space, dims))
        for name, (space, dims) in fixtures.standard_fixtures().items()
    }


def test_criterion_01_net_invariants(nets):
    t0 = time.time()
    ok = True
    details = []
    for name, (_, _, net) in nets.items():
        report = cb.verify_net(net)
        ok &= report.all_passed
        details.append(f"{name}:{'ok' if report.all_passed else 'FAIL'}")
    assert _report("criterion 1 (net invariants)", ok, ", ".join(details),
                   t0, 30.0)


def test_criterion_02_embedding_sandwich(nets):
    t0 = time.time()
    weights = [cb.power(0.3), cb.power(0.7),
               cb.log_damped(1.0, 1.0, cb.power(0.5))]
    checks, failures = 0, 0
    for name, (space, dims, net) in nets.items():
        for w in weights:
            c_w, d_w = cb.certified_constants(w)
            c_lo, c_hi = cb.embedding_constants(c_w, d_w, dims)
            for f in fixtures.field_catalog(space, 25, seed=100):
                exact = cb.seminorm_exact(f, w).value
                embedded = cb.seminorm_embedded(f, net, w).value
                checks += 1
                if not (exact <= c_lo * embedded and embedded <= c_hi * exact):
                    failures += 1
    assert _report("criterion 2 (embedding sandwich)", failures == 0,
                   f"{checks} field/weight checks, {failures} violations "
                   "(zero tolerance)", t0, 120.0)


def test_criterion_03_log_blowup_sandwich():
    t0 = time.time()
    grid = fixtures.dyadic_grid_space(10)
    cloud = fixtures.uniform_square_cloud(500, seed=7)
    checks, failures = 0, 0
    for space, count in ((grid, 12), (cloud, 6)):
        for f in fixtures.field_catalog(space, count, seed=200):
            lhs, mid, rhs = cb.log_blowup_equivalence(f, 0.5, 1.0, 0.4, 200)
            checks += 1
            if not (lhs <= mid * 1.05 and mid <= rhs):
                failures += 1
    assert _report("criterion 3 (log-blowup sandwich)", failures == 0,
                   f"{checks} fields, tol 0.05, {failures} violations",
                   t0, 60.0)


def test_criterion_04_sup_integrals():
    t0 = time.time()
    results = [
        st.experiment_sup_integrals(n, 1.0, 2.0, 1.0, 2000, seed=SEED)
        for n in (2 ** 4, 2 ** 6, 2 ** 8, 2 ** 10, 2 ** 12)
    ]
    bounds_ok = all(r.passed for r in results)
    slope = st.fit_log_slope([math.log(r.n) for r in results],
                             [r.lhs.lp_value for r in results])
    slope_ok = 0.35 <= slope <= 0.65
    assert _report(
        "criterion 4 (many-path sup bound)", bounds_ok and slope_ok,
        f"lhs<=rhs at all n: {bounds_ok}; slope={slope:.3f} in [0.35,0.65]",
        t0, 300.0)


def test_criterion_05_ou_longterm():
    t0 = time.time()
    rows = st.experiment_ou_longterm(1.0, [4.0, 16.0, 64.0, 256.0, 1024.0],
                                     2.0, 2000, seed=SEED)
    bounds_ok = all(r.passed for r in rows)
    r2 = st.r_squared([math.log(r.T) for r in rows],
                      [r.estimate.lp_value ** 2 for r in rows])
    assert _report(
        "criterion 5 (long-run OU bound)", bounds_ok and r2 >= 0.9,
        f"estimate<=bound at all T: {bounds_ok}; R^2(est^2 vs logT)={r2:.4f}",
        t0, 600.0)


def test_criterion_06_martingale_sup():
    t0 = time.time()
    results = [
        st.experiment_martingale_sup(n, 1024, "rademacher_walks", 2.0, 2000,
                                     seed=SEED)
        for n in (16, 256)
    ]
    ok = all(r.passed for r in results)
    detail = "; ".join(
        f"n={r.n}: lhs={r.lhs.lp_value:.1f} <= rhs={r.rhs:.1f}"
        for r in results)
    assert _report("criterion 6 (martingale sup bound)", ok, detail, t0, 180.0)


def test_criterion_07_good_lambda():
    t0 = time.time()
    R = 100_000
    ok = True
    details = []
    for delta in (0.1, 0.3):
        rows = st.experiment_good_lambda(2.0, delta, R, seed=SEED)
        assert len(rows) == 10
        tails_ok = all(r.p_tail >= 50.0 / R for r in rows)
        holds = all(r.passed for r in rows)
        ok &= tails_ok and holds
        details.append(f"delta={delta}: inequality at all 10 lambda: {holds}")
    assert _report("criterion 7 (good-lambda)", ok, "; ".join(details),
                   t0, 300.0)


@pytest.fixture(scope="module")
def levy_result():
    return st.experiment_levy_modulus(2 ** 20, [2.0 ** -16], 50, seed=SEED)


def test_criterion_08a_levy_window_statistic(levy_result):
    t0 = time.time()
    stat = levy_result.h_rows[0]["statistic"]
    ok = 0.8 <= stat <= 1.15
    assert _report("criterion 8a (small-window modulus)", ok,
                   f"mean statistic {stat:.4f} in [0.8, 1.15] "
                   f"(N=2^20, h=2^-16, R=50)", t0, 600.0)


@pytest.mark.expected_red
def test_criterion_08b_levy_weighted_constant_flatness(levy_result):
    """Literal check: estimates/sqrt(p) flat within 25%.  Expected red; the
    sup concentrates, so these implied constants decay like 1/sqrt(p).  See
    the module docstring; the raw estimates (flat) and the adapted-weight
    constants are printed for the defensible diagnostics."""
    t0 = time.time()
    variation = levy_result.c_variation
    ests = [r["weighted_sup"] for r in levy_result.p_rows]
    est_variation = max(ests) / min(ests)
    ok = variation <= 1.25
    _report(
        "criterion 8b (weighted-sup constant flat within 25%)", ok,
        f"max/min of estimate/sqrt(p) = {variation:.2f} (criterion: <=1.25); "
        f"raw estimates vary {est_variation:.3f}x; adapted-weight constants "
        f"vary {levy_result.c_adapted_variation:.2f}x",
        t0, 600.0)
    assert ok, (
        "estimate/sqrt(p) is not flat (and cannot be: the weighted sup "
        f"concentrates; raw estimates vary only {est_variation:.3f}x)"
    )


def test_criterion_09_kolmogorov_chentsov():
    t0 = time.time()
    results = [
        st.experiment_kc_bound(0.5, beta, 8.0, 2 ** 10 + 1, 500, seed=SEED)
        for beta in (0.25, 0.35)
    ]
    ok = all(r.passed for r in results)
    detail = "; ".join(
        f"beta={r.beta}: lhs={r.lhs.lp_value:.2f} <= rhs={r.rhs:.3g}"
        for r in results)
    assert _report("criterion 9 (continuity moment bound)", ok, detail,
                   t0, 300.0)


def test_criterion_10_green_regularity():
    t0 = time.time()
    c1 = pam.green_regularity_constant(T=1.0, modes=64, grid_n=6,
                                       panels_per_decade=8,
                                       check_convergence=False)
    c2 = pam.green_regularity_constant(T=1.0, modes=64, grid_n=6,
                                       panels_per_decade=16,
                                       check_convergence=False)
    rel = abs(c2 - c1) / c2
    ok = rel <= 0.05 and math.isfinite(c1)
    assert _report("criterion 10 (kernel regularity constant)", ok,
                   f"c_fit={c1:.6f}, doubling change {rel:.2e} <= 5%",
                   t0, 120.0)


def test_criterion_11_pam():
    t0 = time.time()
    # heat reduction at zero noise
    p0 = pam.PAMParams(eta=0.0, T=0.1, Mx=64, Nt=4096, u0="sin",
                       replicates=2, seed=SEED)
    e0 = pam.pam_solve(p0)
    heat_err = float(np.abs(
        e0.fields - pam.heat_solution(p0, e0.times, e0.xs)[None]
    ).max())
    heat_ok = heat_err <= 1e-12

    # replicate mean vs heat flow, 3 stderr at fixed probes, R = 500
    pm = pam.PAMParams(eta=1.0, T=0.1, Mx=64, Nt=4096, u0="sin",
                       replicates=500, seed=SEED)
    em = pam.pam_solve(pm)
    mean = em.fields.mean(axis=0)
    se = em.fields.std(axis=0, ddof=1) / math.sqrt(pm.replicates)
    exact = pam.heat_solution(pm, em.times, em.xs)
    nt = len(em.times)
    probes = [(it, ix) for it in (nt // 4, nt // 2, nt - 1)
              for ix in (16, 32, 48)]
    worst_z = max(abs(mean[it, ix] - exact[it, ix]) / se[it, ix]
                  for it, ix in probes)
    mean_ok = worst_z <= 3.0

    # modulus statistic refinement stability at p = 6, R = 200
    stats = []
    for mx, nt_steps, stride in ((64, 4096, 64), (128, 16384, 128)):
        params = pam.PAMParams(eta=1.0, T=0.1, Mx=mx, Nt=nt_steps, u0="sin",
                               p=6.0, replicates=200, seed=SEED,
                               store_stride=stride)
        stats.append(pam.pam_modulus_statistic(pam.pam_solve(params), 6.0))
    ratio = stats[1].lp_value / stats[0].lp_value
    ratio_ok = 0.5 <= ratio <= 2.0

    ok = heat_ok and mean_ok and ratio_ok
    assert _report(
        "criterion 11 (parabolic Anderson model)", ok,
        f"heat reduction err={heat_err:.2e}<=1e-12: {heat_ok}; "
        f"mean worst |z|={worst_z:.2f}<=3: {mean_ok}; "
        f"refinement ratio={ratio:.3f} in [0.5,2]: {ratio_ok}",
        t0, 900.0)


def test_criterion_12_determinism(tmp_path):
    """Statistic tables are byte-identical across reruns and worker counts
    (demonstrated on the criterion-4 and criterion-9 table formats at
    reduced replicate counts, plus a library-level rerun)."""
    t0 = time.time()
    import json

    ok = True
    for name, payload in (
        ("sup", {"command": "sup-integrals", "n_list": [16, 64],
                 "replicates": 300, "seed": SEED, "figures": False}),
        ("kc", {"command": "kc", "beta_list": [0.25], "replicates": 100,
                "grid_points": 257, "seed": SEED, "figures": False}),
    ):
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps(payload))
        blobs = []
        for workers in ("1", "4"):
            out = tmp_path / f"{name}_{workers}"
            code = cli_main(["--config", str(cfg), "--out", str(out),
                             "--workers", workers])
            ok &= code == 0
            csvs = sorted(p for p in out.iterdir() if p.suffix == ".csv")
            blobs.append(b"".join(p.read_bytes() for p in csvs))
        ok &= blobs[0] == blobs[1]
    a = st.experiment_martingale_sup(16, 128, "rademacher_walks", 2.0, 200,
                                     seed=SEED)
    b = st.experiment_martingale_sup(16, 128, "rademacher_walks", 2.0, 200,
                                     seed=SEED)
    ok &= a.lhs == b.lhs and a.rhs == b.rhs
    assert _report("criterion 12 (determinism)", ok,
                   "CSV bytes identical for workers 1 vs 4; library rerun "
                   "identical", t0, 120.0)
