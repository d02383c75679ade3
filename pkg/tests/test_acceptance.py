"""Acceptance suite: one test per primary criterion, each printing a verdict.

Production-scale headline numbers are not reproducible at desk scale, so each
criterion checks the corresponding property or directional claim at the
tolerances pinned here.
"""

import numpy as np
import pytest
from scipy import stats as ss

from adlab.assignment import AllocationPlan, assign_indices, bucket_of
from adlab.delivery import CampaignConfig, Creative, CreativeKind, Goal, WorldConfig
from adlab.diagnostics import cvm_uniform, ks_uniform, smd, welch_t
from adlab.experiments import (LiftTestSpec, ab_winner, aggregate_lift,
                               conclusive, lift_posterior, run_lift_test,
                               smallest_interval_90)
from adlab.population import PopulationConfig, ResponseModel, generate_population
from adlab.scenarios import (PRESETS, FilterFlags, ScenarioConfig, TestTemplate,
                             run_scenario)

_PRESET_CACHE = {}


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


def preset_run(name, seed, tmp_path_factory):
    key = (name, seed)
    if key not in _PRESET_CACHE:
        out = tmp_path_factory.mktemp(f"{name}_{seed}")
        _PRESET_CACHE[key] = (run_scenario(PRESETS[name](seed), out), out)
    return _PRESET_CACHE[key]


def test_assignment_uniformity_and_independence():
    plan = AllocationPlan((("x", 1.0),), n_buckets=1000)
    ids = np.arange(1_000_000, dtype=np.uint64)
    counts = np.bincount(bucket_of(ids, salt=0xFEED5EED, plan=plan), minlength=1000)
    expected = len(ids) / 1000
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    cutoff = float(ss.chi2.ppf(0.999, 999))

    plan2 = AllocationPlan((("a", 0.5), ("b", 0.5)))
    g1 = assign_indices(ids[:200_000], 0xAAAA, plan2)
    g2 = assign_indices(ids[:200_000], 0xBBBB, plan2)
    table = np.array([[np.sum((g1 == i) & (g2 == j)) for j in (0, 1)] for i in (0, 1)])
    _, p_ind, _, _ = ss.chi2_contingency(table)

    _report("assignment uniformity",
            chi2 < cutoff and p_ind > 0.001,
            f"chi2={chi2:.1f} < {cutoff:.1f} (1e6 users, 1000 buckets); "
            f"cross-salt contingency p={p_ind:.3f} > 0.001")


def test_lift_balance(tmp_path_factory):
    rep, _ = preset_run("lift_balance", 1, tmp_path_factory)
    overall = rep.summary["uniformity"]["overall"]
    ks_p = overall["KS p"]
    frac_smd = overall["% |SMD|>0.20"] / 100.0
    _report("lift balance (200 tests x 86 features)",
            rep.n_kept == 200 and ks_p > 0.01 and frac_smd <= 0.01,
            f"n={rep.n_kept}, pooled KS p={ks_p:.4f} > 0.01, "
            f"frac|SMD|>0.2={frac_smd:.4%} <= 1%")


def test_ab_divergence(tmp_path_factory):
    cfg = ScenarioConfig(
        name="ab_divergence_acceptance",
        population=PopulationConfig(n_users=8000, d=72, n_segments=3, seed=7),
        template=TestTemplate(kind="ab", n_cells=2, goals=(Goal.CONVERSION,),
                              vary_audience=True, vary_budget_bid=True,
                              divergence=(1.5, 3.5), budget=500.0),
        n_tests=100, master_seed=31,
        filters=FilterFlags(min_impressions_per_cell=30))
    out = tmp_path_factory.mktemp("ab_divergence")
    rep = run_scenario(cfg, out)
    overall = rep.summary["uniformity"]["overall"]
    ks_p = overall["KS p"]
    frac_smd = overall["% |SMD|>0.20"] / 100.0
    _report("A/B divergence (heterogeneous conversion-goal batch)",
            ks_p < 0.001 and frac_smd >= 0.10,
            f"uniformity rejected: KS p={ks_p:.2e} < 1e-3; "
            f"frac|SMD|>0.2={frac_smd:.1%} >= 10%")


def test_goal_ordering():
    def frac_sig(goal, seed):
        cfg = ScenarioConfig(
            name=f"goal_{goal.value.lower()}",
            population=PopulationConfig(n_users=8000, d=72, n_segments=3, seed=5),
            template=TestTemplate(kind="ab", n_cells=2, goals=(goal,),
                                  divergence=(1.5, 3.0), budget=500.0),
            n_tests=15, master_seed=seed,
            filters=FilterFlags(same_goal=True, same_audience_budget_bid=True,
                                min_impressions_per_cell=30))
        rep = run_scenario(cfg, f"/tmp/adlab_goal_{goal.value}_{seed}")
        return rep.summary["uniformity"]["overall"]["% p<=0.05"] / 100.0

    results = []
    for seed in (11, 12, 13, 14, 15):
        fc = frac_sig(Goal.CONVERSION, seed)
        fa = frac_sig(Goal.AWARENESS, seed)
        results.append((seed, fa, fc))
    ok = all(fc > fa for _, fa, fc in results)
    detail = "; ".join(f"seed {s}: conv {fc:.2f} > aware {fa:.2f}"
                       for s, fa, fc in results)
    _report("goal ordering (conversion > awareness, 5 seeds)", ok, detail)


def test_restricted_configuration(tmp_path_factory):
    outcomes = []
    for seed in (1, 2, 3, 4, 5):
        rep, _ = preset_run("ab_restricted", seed, tmp_path_factory)
        overall = rep.summary["uniformity"]["overall"]
        structured = rep.summary["uniformity"]["structured"]
        ok = overall["KS p"] > 0.05 and structured["% |SMD|>0.20"] == 0.0
        outcomes.append((seed, ok, overall["KS p"]))
    n_ok = sum(ok for _, ok, _ in outcomes)
    detail = "; ".join(f"seed {s}: KS p={p:.3f} {'ok' if ok else 'X'}"
                       for s, ok, p in outcomes)
    _report("restricted configuration balanced in >=4/5 seeds", n_ok >= 4, detail)


def test_table_c1_oracle():
    confs = []
    for seed in range(20):
        winner, conf = ab_winner([(250.0, 60_000, 20), (180.0, 40_000, 30)],
                                 rng=np.random.default_rng(seed))
        confs.append(conf)
        assert winner == "1", f"seed {seed} picked {winner}"
    _report("Table C.1 oracle (winner B every seed)",
            min(confs) >= 0.95,
            f"winner=B in 20/20 seeds, min confidence={min(confs):.4f} >= 0.95")


def test_aa_lift_null():
    wc = WorldConfig(horizon_slots=12, conversion_effect=0.0)
    root = np.random.SeedSequence(4461)
    n_tests, n_conclusive = 500, 0
    for child in root.spawn(n_tests):
        rng = np.random.default_rng(child)
        pcfg = PopulationConfig(n_users=3000, d=8, n_segments=3,
                                seed=int(rng.integers(1 << 62)))
        pop = generate_population(pcfg)
        model = ResponseModel.default(8, organic_rate=0.008)
        g = rng.standard_normal(8)
        creative = Creative(kind=CreativeKind.STATIC_IMAGE,
                            vec=tuple(g / np.linalg.norm(g)))
        spec = LiftTestSpec(
            cells=[("c", CampaignConfig(campaign_id=1, goal=Goal.TRAFFIC,
                                        creative=creative, daily_budget=2000.0))],
            salt=int(rng.integers(0, 1 << 64, dtype=np.uint64)), test_fraction=0.5)
        run = run_lift_test(spec, pop, model, wc, seed=int(rng.integers(1 << 62)))
        st = aggregate_lift(run)
        samples = lift_posterior(st[("c", "test")], st[("c", "control")], rng=rng)
        n_conclusive += conclusive(samples)
    rate = n_conclusive / n_tests
    _report("A/A lift null (500 tests)",
            0.05 <= rate <= 0.15,
            f"conclusive-positive rate={rate:.3f} in [0.05, 0.15]")


def test_statistics_oracles():
    rng = np.random.default_rng(99)
    worst = {"welch_t": 0.0, "smd": 0.0, "ks": 0.0, "cvm_stat": 0.0}
    for _ in range(50):
        a = rng.normal(rng.normal(), 0.5 + rng.random(), size=rng.integers(10, 400))
        b = rng.normal(rng.normal(), 0.5 + rng.random(), size=rng.integers(10, 400))
        t, p = welch_t(a, b)
        ref = ss.ttest_ind(a, b, equal_var=False)
        worst["welch_t"] = max(worst["welch_t"], abs(t - ref.statistic),
                               abs(p - ref.pvalue))
        na, nb = len(a), len(b)
        pooled = np.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1))
                         / (na + nb - 2))
        worst["smd"] = max(worst["smd"], abs(smd(a, b) - (a.mean() - b.mean()) / pooled))

        n = int(rng.integers(10, 2000))
        x = rng.uniform(size=n)
        d, p = ks_uniform(x)
        ref = ss.kstest(x, "uniform", method="exact" if n <= 100 else "asymp")
        worst["ks"] = max(worst["ks"], abs(d - ref.statistic), abs(p - ref.pvalue))

        om, _ = cvm_uniform(x)
        worst["cvm_stat"] = max(worst["cvm_stat"],
                                abs(om - ss.cramervonmises(x, "uniform").statistic))

    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    worst_cvm_p = 0.0
    for _ in range(50):
        x = rng.uniform(size=int(rng.integers(20, 800)))
        om, p = cvm_uniform(x)
        total = mp.mpf(0)
        for k in range(40):
            y = 4 * k + 1
            q = mp.mpf(y) ** 2 / (16 * om)
            total += (mp.gamma(k + mp.mpf(1) / 2)
                      / (mp.gamma(k + 1) * mp.pi ** mp.mpf(1.5) * mp.sqrt(om))
                      * mp.sqrt(y) * mp.exp(-q) * mp.besselk(mp.mpf(1) / 4, q))
        worst_cvm_p = max(worst_cvm_p, abs(p - float(1 - total)))

    lo, hi = smallest_interval_90(np.random.default_rng(7).standard_normal(100_000))
    interval_err = max(abs(lo + 1.645), abs(hi - 1.645))

    ok = (max(worst.values()) < 1e-6 and worst_cvm_p < 1e-6 and interval_err < 0.05)
    _report("statistics oracles",
            ok,
            f"max errs: welch={worst['welch_t']:.2e} smd={worst['smd']:.2e} "
            f"ks={worst['ks']:.2e} cvm_stat={worst['cvm_stat']:.2e} "
            f"cvm_p={worst_cvm_p:.2e} (all < 1e-6); "
            f"interval90 err={interval_err:.3f} < 0.05")


def test_gate_curve(tmp_path_factory):
    rep, out = preset_run("gate_curve", 1, tmp_path_factory)
    import pandas as pd
    gdf = pd.read_csv(out / "gate_curve.csv")
    low = gdf[(gdf["bin_hi"] <= 1.5) & (gdf["n_tests"] > 0)]
    high = gdf[(gdf["bin_lo"] >= 1.5) & (gdf["n_tests"] > 0)]
    assert len(low) > 0 and len(high) > 0
    low_mean = float(np.average(low["mean_frac_sig"], weights=low["n_tests"]))
    high_mean = float(np.average(high["mean_frac_sig"], weights=high["n_tests"]))
    pts = [r.gate for r in rep.records if r.gate is not None]
    high_vals = np.array([f for t, f in pts if t > 1.5])
    zscore = (high_vals.mean() - 0.05) / (high_vals.std(ddof=1) / np.sqrt(len(high_vals)))
    ok = 0.02 <= low_mean <= 0.10 and high_mean > 0.10 and zscore > 5
    _report("gate curve (bend at max-t 1.5)",
            ok,
            f"bins below 1.5: mean frac={low_mean:.3f} in [0.02,0.10] "
            f"(n={int(low['n_tests'].sum())}); bins above: mean={high_mean:.3f} "
            f"> 0.10, z={zscore:.1f} > 5")


def test_determinism_all_presets(tmp_path_factory):
    mismatches = []
    for name in sorted(PRESETS):
        rep, out1 = preset_run(name, 1, tmp_path_factory)
        out2 = tmp_path_factory.mktemp(f"{name}_rerun")
        run_scenario(PRESETS[name](1), out2)
        for csv in sorted(out1.glob("*.csv")) + [out1 / "summary.json"]:
            if (out2 / csv.name).read_bytes() != csv.read_bytes():
                mismatches.append(f"{name}/{csv.name}")
    _report("determinism (every preset, byte-identical reruns)",
            not mismatches,
            "all preset outputs byte-identical" if not mismatches
            else f"mismatches: {mismatches}")
