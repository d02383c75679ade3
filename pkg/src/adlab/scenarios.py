"""Config-driven scenario runner: batches of simulated tests, the stepwise
configuration filters, balance reports, and the CSV/JSON report files.

Presets mirror the named analyses: lift balance, the full heterogeneous A/B
sample, the goal filter ladder, the fully restricted awareness sample, the
five-cell case study, the CTR-effect split, and the observable-t gate curve.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assignment import new_salt
from .delivery import (AUTO, Audience, CampaignConfig, Creative, CreativeKind,
                       FrequencyCap, Goal, Placement, WorldConfig)
from .diagnostics import (BalanceReport, FeatureMatrix, balance_report,
                          balance_stats_frame, binned_gate_curve,
                          observable_gate, summarize, two_proportion_test)
from .experiments import (ABTestSpec, CONTROL, LiftTestSpec, TEST, run_ab_test,
                          run_lift_test)
from .population import PopulationConfig, ResponseModel, generate_population

DEFAULT_FREQ_RATIO_MAX = 1.037
DEFAULT_MIN_IMPRESSIONS = 30


@dataclass
class FilterFlags:
    """The stepwise sample filters; None/False disables a rung."""

    same_goal: bool = False
    same_audience_budget_bid: bool = False
    static_image_distinct: bool = False
    freq_ratio_max: float | None = None
    min_impressions_per_cell: int | None = DEFAULT_MIN_IMPRESSIONS

    def __post_init__(self):
        if self.freq_ratio_max is not None and self.freq_ratio_max < 1.0:
            raise ValueError("freq_ratio_max must be >= 1")


FILTER_EXPLANATIONS = [
    ("GOAL_MISMATCH", "same_goal", "every cell must share one unique ad optimization goal"),
    ("CONFIG_MISMATCH", "same_audience_budget_bid",
     "cells must share target audience, budget and bid configuration"),
    ("CREATIVE_KIND", "static_image_distinct", "every cell must run a static image creative"),
    ("CREATIVE_DUPLICATE", "static_image_distinct", "creative hashes must differ across cells"),
    ("FREQ_RATIO", "freq_ratio_max",
     f"impressions-per-user ratio must stay at or below the cap (default {DEFAULT_FREQ_RATIO_MAX})"),
    ("MIN_IMPRESSIONS", "min_impressions_per_cell",
     f"each cell needs at least the minimum impressions (default {DEFAULT_MIN_IMPRESSIONS})"),
]


@dataclass
class CellMeta:
    cell_id: str
    goal: Goal
    delivery_key: tuple
    creative_kind: CreativeKind
    creative_hash: str
    impressions: int
    clicks: int
    conversions: int
    spend: float


@dataclass
class TestMeta:
    test_id: int
    kind: str
    cells: list[CellMeta]
    unique_impressed_users: int

    @property
    def total_impressions(self) -> int:
        return sum(c.impressions for c in self.cells)

    @property
    def impressions_per_user(self) -> float:
        if self.unique_impressed_users == 0:
            return 0.0
        return self.total_impressions / self.unique_impressed_users


def apply_filters(meta: TestMeta, flags: FilterFlags) -> tuple[bool, list[str]]:
    """Keep the test iff every enabled filter is satisfied; reasons otherwise."""
    reasons = []
    cells = meta.cells
    if flags.same_goal and len({c.goal for c in cells}) > 1:
        reasons.append("GOAL_MISMATCH")
    if flags.same_audience_budget_bid and len({c.delivery_key for c in cells}) > 1:
        reasons.append("CONFIG_MISMATCH")
    if flags.static_image_distinct:
        if any(c.creative_kind != CreativeKind.STATIC_IMAGE for c in cells):
            reasons.append("CREATIVE_KIND")
        if len({c.creative_hash for c in cells}) < len(cells):
            reasons.append("CREATIVE_DUPLICATE")
    if flags.freq_ratio_max is not None and meta.impressions_per_user > flags.freq_ratio_max:
        reasons.append("FREQ_RATIO")
    if flags.min_impressions_per_cell is not None and \
            any(c.impressions < flags.min_impressions_per_cell for c in cells):
        reasons.append("MIN_IMPRESSIONS")
    return (not reasons), reasons


# ---------------------------------------------------------------------------
# Test templates
# ---------------------------------------------------------------------------

@dataclass
class TestTemplate:
    """Randomized per-test spec builder; one template drives a whole batch."""

    kind: str = "ab"  # "ab" | "lift"
    n_cells: int = 2
    goals: tuple[Goal, ...] = (Goal.CONVERSION,)
    mixed_goals_across_cells: bool = False
    budget: float = 600.0
    bid: float = 1.0
    vary_budget_bid: bool = False
    vary_audience: bool = False
    audience: Audience = field(default_factory=Audience)
    placements: object = AUTO
    freq_cap: int | None = None
    freq_window: int | None = None
    creative_kind: CreativeKind = CreativeKind.STATIC_IMAGE
    divergence: tuple[float, float] = (0.0, 0.0)
    creative_scale: float = 1.0
    click_boost: tuple[float, float] = (0.0, 0.0)
    test_fraction: float = 0.5

    _AUDIENCE_POOL = (
        Audience(),
        Audience(age_max=2),
        Audience(age_min=2),
        Audience(os_ios=True),
        Audience(active_within_days=28),
        Audience(lang_english=True),
    )

    def _creative(self, pop_cfg: PopulationConfig, rng, cell: int,
                  segment: int, strength: float) -> Creative:
        # Normalize the segment pull so a segment member's mean response
        # logit shifts by ~strength regardless of d and block size.
        b = pop_cfg.block_size
        seg_pull = strength / (pop_cfg.segment_spread * math.sqrt(b))
        g = rng.standard_normal(pop_cfg.d)
        vec = self.creative_scale * g / np.linalg.norm(g)
        vec = vec + seg_pull * pop_cfg.segment_direction(segment)
        boost = rng.uniform(*self.click_boost)
        if boost != 0.0:
            mean_dir = pop_cfg.segment_embedding_mean(0)
            for s in range(1, pop_cfg.n_segments):
                mean_dir = mean_dir + pop_cfg.segment_embedding_mean(s)
            mean_dir = mean_dir / np.linalg.norm(mean_dir)
            vec = vec + boost * mean_dir
        return Creative(kind=self.creative_kind, vec=tuple(vec))

    def build(self, test_id: int, pop_cfg: PopulationConfig, rng):
        """Materialize one test spec (plus its salt) from the template."""
        salt = new_salt(rng)
        goal = self.goals[int(rng.integers(len(self.goals)))]
        strength = float(rng.uniform(*self.divergence))
        seg0 = int(rng.integers(pop_cfg.n_segments))
        cells = []
        for j in range(self.n_cells):
            cell_goal = (self.goals[int(rng.integers(len(self.goals)))]
                         if self.mixed_goals_across_cells else goal)
            audience = self.audience
            budget, bid = self.budget, self.bid
            if self.vary_audience:
                audience = self._AUDIENCE_POOL[int(rng.integers(len(self._AUDIENCE_POOL)))]
            if self.vary_budget_bid:
                budget = self.budget * float(rng.uniform(0.5, 2.0))
                bid = self.bid * float(rng.uniform(0.5, 2.0))
            creative = self._creative(pop_cfg, rng, j,
                                      (seg0 + j) % pop_cfg.n_segments, strength)
            cap = None
            if self.freq_cap is not None:
                cap = FrequencyCap(self.freq_cap, self.freq_window)
            cells.append((f"cell_{j}", CampaignConfig(
                campaign_id=j + 1, goal=cell_goal, creative=creative,
                audience=audience, daily_budget=budget, bid=bid,
                placements=self.placements, frequency_cap=cap)))
        if self.kind == "lift":
            return LiftTestSpec(cells=cells, salt=salt,
                                test_fraction=self.test_fraction)
        props = 1.0 / self.n_cells
        return ABTestSpec(cells=[(cid, cfg, props) for cid, cfg in cells], salt=salt)


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    name: str
    population: PopulationConfig
    template: TestTemplate
    n_tests: int
    filters: FilterFlags = field(default_factory=FilterFlags)
    world: WorldConfig = field(default_factory=WorldConfig)
    master_seed: int = 0
    model_kwargs: dict = field(default_factory=dict)
    gate_bins: int | None = None      # emit gate_curve.csv when set
    by_goal: bool = False             # per-goal summary breakdown
    ctr_effect_split: bool = False    # App-G style stratification
    # Each advertiser's test reaches a mostly distinct audience; at desk scale
    # that means drawing a fresh population per test, which also keeps pooled
    # cross-test p-values independent.
    fresh_population_per_test: bool = True

    def __post_init__(self):
        if self.n_tests < 1:
            raise ValueError("number of tests must be >= 1")


@dataclass
class TestRecord:
    meta: TestMeta
    kept: bool
    reasons: list[str]
    reports: list[tuple[str, BalanceReport]]  # (cell_pair, report)
    goal: str
    ctr_p: float | None = None
    gate: tuple[float, float] | None = None  # (max_t_obs, frac_unobs_sig)


@dataclass
class ScenarioReport:
    name: str
    master_seed: int
    n_tests: int
    n_kept: int
    dropped: dict[str, int]
    records: list[TestRecord]
    summary: dict
    files: dict[str, str]


def _pairs(cell_ids):
    return [(a, b) for i, a in enumerate(cell_ids) for b in cell_ids[i + 1:]]


def _run_one_test(test_id, spec, population, model, world_cfg, seed):
    if isinstance(spec, LiftTestSpec):
        run = run_lift_test(spec, population, model, world_cfg, seed=seed)
        logs = run.logs
        exp = logs.exposures
        cells_meta = []
        for i, (cell_id, cfg) in enumerate(spec.cells):
            sub = exp[exp["campaign_index"] == i]
            cells_meta.append(CellMeta(
                cell_id=cell_id, goal=cfg.goal, delivery_key=cfg.delivery_key(),
                creative_kind=cfg.creative.kind, creative_hash=cfg.creative.creative_hash,
                impressions=int(len(sub)), clicks=int(sub["clicked"].sum()),
                conversions=int(sub["converted"].sum()), spend=float(logs.spend[i])))
        meta = TestMeta(test_id=test_id, kind="lift", cells=cells_meta,
                        unique_impressed_users=int(exp["user_index"].nunique()))
        return run, meta
    run = run_ab_test(spec, population, model, world_cfg, seed=seed)
    logs = run.logs
    stats = run.cell_stats()
    cells_meta = []
    for (cell_id, cfg, _), st in zip(spec.cells, stats):
        cells_meta.append(CellMeta(
            cell_id=cell_id, goal=cfg.goal, delivery_key=cfg.delivery_key(),
            creative_kind=cfg.creative.kind, creative_hash=cfg.creative.creative_hash,
            impressions=st.impressions, clicks=st.clicks,
            conversions=st.attributed_conversions, spend=st.spend))
    meta = TestMeta(test_id=test_id, kind="ab", cells=cells_meta,
                    unique_impressed_users=int(logs.exposures["user_index"].nunique()))
    return run, meta


def _balance_reports(run, population) -> list[tuple[str, BalanceReport]]:
    """Lift: user-level reach rows, test vs control per cell.
    A/B: impression-level rows, all cell pairs."""
    out = []
    if isinstance(run.spec, LiftTestSpec):
        reach = run.opportunity_reach
        for cell_id, _ in run.spec.cells:
            sub = reach[reach["cell_id"] == cell_id]
            matrix = FeatureMatrix.from_population(
                population, sub["user_index"].to_numpy(), sub["group"].to_numpy())
            out.append((f"{TEST}|{CONTROL}",
                        balance_report(matrix, (TEST, CONTROL))))
        return out
    exp = run.logs.exposures
    matrix = FeatureMatrix.from_population(
        population, exp["user_index"].to_numpy(), exp["cell_id"].to_numpy())
    for a, b in _pairs([c for c, _, _ in run.spec.cells]):
        out.append((f"{a}|{b}", balance_report(matrix, (a, b))))
    return out


def _ctr_significance(meta: TestMeta) -> float:
    """Smallest pairwise two-proportion CTR p-value across cells."""
    best = 1.0
    for a, b in _pairs(meta.cells):
        if a.impressions and b.impressions:
            _, p = two_proportion_test(a.clicks, a.impressions, b.clicks, b.impressions)
            best = min(best, p)
    return best


def effect_split(records) -> dict:
    """Split tests by significant CTR effects (p <= 0.05) and test p-value
    uniformity within each stratum."""
    strata = {"significant": [], "not_significant": []}
    for rec in records:
        if rec.ctr_p is None:
            continue
        key = "significant" if rec.ctr_p <= 0.05 else "not_significant"
        strata[key].append(rec)
    out = {}
    for key, recs in strata.items():
        stats = [s for r in recs for _, rep in r.reports for s in rep.stats]
        entry = {"n_tests": len(recs)}
        if stats:
            entry.update({k: v.as_dict() for k, v in summarize(stats).items()})
        out[key] = entry
    return out


def run_scenario(config: ScenarioConfig, out_dir) -> ScenarioReport:
    """Simulate the batch, filter, diagnose balance, and emit report files.

    Deterministic for a fixed master seed: reruns produce byte-identical CSVs.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    population = generate_population(config.population)
    model = ResponseModel.default(config.population.d, **config.model_kwargs)

    root = np.random.SeedSequence(config.master_seed)
    children = root.spawn(config.n_tests)
    records: list[TestRecord] = []
    dropped: Counter = Counter()

    for t in range(config.n_tests):
        rng = np.random.default_rng(children[t])
        if config.fresh_population_per_test:
            pcfg = replace(config.population, seed=int(rng.integers(1 << 62)))
            population = generate_population(pcfg)
        spec = config.template.build(t, config.population, rng)
        world_seed = int(rng.integers(1 << 62))
        run, meta = _run_one_test(t, spec, population, model, config.world, world_seed)
        kept, reasons = apply_filters(meta, config.filters)
        rec = TestRecord(meta=meta, kept=kept, reasons=reasons, reports=[],
                         goal=meta.cells[0].goal.value)
        if kept:
            rec.reports = _balance_reports(run, population)
            rec.ctr_p = _ctr_significance(meta)
            if config.gate_bins is not None and meta.kind == "ab":
                gates = [observable_gate(rep) for _, rep in rec.reports]
                rec.gate = (max(g.max_t_obs for g in gates),
                            float(np.mean([g.frac_unobs_sig for g in gates])))
        else:
            dropped.update(reasons)
        records.append(rec)

    kept_records = [r for r in records if r.kept]
    if not kept_records:
        raise RuntimeError(f"scenario {config.name}: no tests survive the filters")

    # balance_stats.csv / pvalues.csv (the latter adds goal for figure grouping)
    entries = [(r.meta.test_id, pair, s)
               for r in kept_records for pair, rep in r.reports for s in rep.stats]
    stats_df = balance_stats_frame(entries)
    goal_of_test = {r.meta.test_id: r.goal for r in kept_records}
    pvals_df = stats_df[["test_id", "cell_pair", "feature_id", "kind", "p"]].copy()
    pvals_df.insert(4, "goal", stats_df["test_id"].map(goal_of_test))
    files = {}
    stats_path = out_path / "balance_stats.csv"
    stats_df.to_csv(stats_path, index=False)
    files["balance_stats"] = str(stats_path)
    pvals_path = out_path / "pvalues.csv"
    pvals_df.to_csv(pvals_path, index=False)
    files["pvalues"] = str(pvals_path)

    # summary.json rows following the uniformity/exceedance table layout
    all_stats = [s for _, _, s in entries]
    summaries = summarize(all_stats)

    def table_rows(sub_sample, n, goal, summary_dict):
        uni, smd = [], []
        for kind_label, key in (("ALL", "overall"), ("EMBEDDING", "embedding"),
                                ("STRUCTURED", "structured")):
            if key not in summary_dict:
                continue
            s = summary_dict[key].as_dict()
            if key == "overall":
                uni.append({"sub_sample": sub_sample, "N": n, "goal": goal, **s})
            smd.append({"sub_sample": sub_sample, "N": n, "goal": goal,
                        "features": kind_label, "% |SMD|>0.20": s["% |SMD|>0.20"]})
        return uni, smd

    goals_present = sorted({r.goal for r in kept_records})
    goal_label = goals_present[0] if len(goals_present) == 1 else "ALL"
    uni_rows, smd_rows = table_rows(config.name, len(kept_records), goal_label, summaries)
    by_goal = {}
    if config.by_goal:
        for g in goals_present:
            sub = [s for r in kept_records if r.goal == g
                   for _, rep in r.reports for s in rep.stats]
            if not sub:
                continue
            gsum = summarize(sub)
            by_goal[g] = {k: v.as_dict() for k, v in gsum.items()}
            u, m = table_rows(config.name, sum(r.goal == g for r in kept_records), g, gsum)
            uni_rows += u
            smd_rows += m

    summary = {
        "scenario": config.name,
        "master_seed": config.master_seed,
        "n_tests": config.n_tests,
        "n_kept": len(kept_records),
        "dropped": dict(sorted(dropped.items())),
        "table_uniformity": uni_rows,
        "table_smd_exceedance": smd_rows,
        "uniformity": {k: v.as_dict() for k, v in summaries.items()},
    }
    if by_goal:
        summary["by_goal"] = by_goal
    if config.ctr_effect_split:
        summary["by_ctr_effect"] = effect_split(kept_records)

    gate_df = None
    if config.gate_bins is not None:
        pts = [r.gate for r in kept_records if r.gate is not None]
        gate_df = binned_gate_curve(pts, config.gate_bins)
        gate_path = out_path / "gate_curve.csv"
        gate_df.to_csv(gate_path, index=False)
        files["gate_curve"] = str(gate_path)
        summary["gate_curve"] = gate_df.to_dict(orient="records")

    summary_path = out_path / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=False))
    files["summary"] = str(summary_path)

    return ScenarioReport(name=config.name, master_seed=config.master_seed,
                          n_tests=config.n_tests, n_kept=len(kept_records),
                          dropped=dict(dropped), records=records,
                          summary=summary, files=files)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _pop(n_users=8000, d=72, seed=101) -> PopulationConfig:
    return PopulationConfig(n_users=n_users, d=d, n_segments=3, seed=seed)


def preset_lift_balance(seed: int = 0) -> ScenarioConfig:
    """Lift tests stay balanced no matter the configuration."""
    return ScenarioConfig(
        name="lift_balance", population=_pop(), master_seed=seed, n_tests=200,
        template=TestTemplate(kind="lift", n_cells=1, goals=(Goal.CONVERSION,),
                              divergence=(1.5, 3.0), budget=2500.0),
        filters=FilterFlags(min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS))


def preset_ab_full(seed: int = 0) -> ScenarioConfig:
    """Heterogeneous A/B sample: goals, audiences, budgets and bids all vary."""
    return ScenarioConfig(
        name="ab_full", population=_pop(), master_seed=seed, n_tests=100,
        template=TestTemplate(kind="ab", n_cells=2,
                              goals=(Goal.CONVERSION, Goal.TRAFFIC, Goal.ENGAGEMENT,
                                     Goal.LEADS, Goal.AWARENESS),
                              mixed_goals_across_cells=True, vary_audience=True,
                              vary_budget_bid=True, divergence=(1.5, 3.5),
                              budget=500.0),
        filters=FilterFlags(min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS))


def preset_ab_filter_ladder(seed: int = 0) -> ScenarioConfig:
    """Same audience/budget/bid; goal varies per test; creatives diverge."""
    return ScenarioConfig(
        name="ab_filter_ladder", population=_pop(), master_seed=seed, n_tests=150,
        template=TestTemplate(kind="ab", n_cells=2,
                              goals=(Goal.AWARENESS, Goal.TRAFFIC, Goal.ENGAGEMENT,
                                     Goal.LEADS, Goal.CONVERSION),
                              divergence=(1.5, 3.0), budget=500.0),
        filters=FilterFlags(same_goal=True, same_audience_budget_bid=True,
                            min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS),
        by_goal=True)


def preset_ab_restricted(seed: int = 0) -> ScenarioConfig:
    """Awareness goal, identical configs, distinct static images, frequency
    capped at one, manual FEED placement."""
    return ScenarioConfig(
        name="ab_restricted", population=_pop(n_users=10000), master_seed=seed,
        n_tests=20,
        template=TestTemplate(kind="ab", n_cells=2, goals=(Goal.AWARENESS,),
                              divergence=(0.0, 0.0), budget=6000.0,
                              freq_cap=1, placements=(Placement.FEED,)),
        filters=FilterFlags(same_goal=True, same_audience_budget_bid=True,
                            static_image_distinct=True,
                            freq_ratio_max=DEFAULT_FREQ_RATIO_MAX,
                            min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS))


def preset_case_study_5cell(seed: int = 0) -> ScenarioConfig:
    """Five cells, unique static images, reach-optimized, frequency cap of one
    impression per user-week, manual FEED placement, U.S. under-65 audience."""
    return ScenarioConfig(
        name="case_study_5cell", population=_pop(n_users=12000), master_seed=seed,
        n_tests=1,
        template=TestTemplate(kind="ab", n_cells=5, goals=(Goal.AWARENESS,),
                              divergence=(0.0, 0.0), budget=4000.0,
                              freq_cap=1, freq_window=7 * 24,
                              placements=(Placement.FEED,),
                              audience=Audience(loc_america=True, age_max=4)),
        world=WorldConfig(horizon_slots=96),  # four days
        filters=FilterFlags(same_goal=True, same_audience_budget_bid=True,
                            static_image_distinct=True,
                            freq_ratio_max=DEFAULT_FREQ_RATIO_MAX,
                            min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS))


def preset_effect_split(seed: int = 0) -> ScenarioConfig:
    """Restricted awareness tests where some creatives truly move CTR."""
    return ScenarioConfig(
        name="effect_split", population=_pop(n_users=10000), master_seed=seed,
        n_tests=40,
        template=TestTemplate(kind="ab", n_cells=2, goals=(Goal.AWARENESS,),
                              divergence=(0.0, 0.0), budget=6000.0,
                              freq_cap=1, placements=(Placement.FEED,),
                              click_boost=(0.0, 0.6)),
        filters=FilterFlags(same_goal=True, same_audience_budget_bid=True,
                            static_image_distinct=True,
                            min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS),
        ctr_effect_split=True)


def preset_gate_curve(seed: int = 0) -> ScenarioConfig:
    """Mixed batch spanning balanced to strongly divergent tests, feeding the
    observable-t gate curve."""
    return ScenarioConfig(
        name="gate_curve", population=_pop(), master_seed=seed, n_tests=200,
        template=TestTemplate(kind="ab", n_cells=2,
                              goals=(Goal.AWARENESS, Goal.CONVERSION),
                              divergence=(0.0, 1.2), budget=500.0),
        filters=FilterFlags(min_impressions_per_cell=DEFAULT_MIN_IMPRESSIONS),
        gate_bins=30)


PRESETS = {
    "lift_balance": preset_lift_balance,
    "ab_full": preset_ab_full,
    "ab_filter_ladder": preset_ab_filter_ladder,
    "ab_restricted": preset_ab_restricted,
    "case_study_5cell": preset_case_study_5cell,
    "effect_split": preset_effect_split,
    "gate_curve": preset_gate_curve,
}


def build_scenario(name_or_path: str, seed: int = 0) -> ScenarioConfig:
    """Resolve a preset name or a JSON config file into a ScenarioConfig."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path](seed)
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return scenario_from_json(json.loads(path.read_text()), seed)
    raise ValueError(f"unknown preset or config file: {name_or_path!r} "
                     f"(presets: {', '.join(sorted(PRESETS))})")


def scenario_from_json(payload: dict, seed: int = 0) -> ScenarioConfig:
    """Build a ScenarioConfig from a JSON dict (the CLI config format).

    Salts and seeds serialize as decimal strings or ints; enums by name.
    """
    pop = PopulationConfig(**payload.get("population", {"n_users": 8000}))
    tmpl_kw = dict(payload.get("template", {}))
    if "goals" in tmpl_kw:
        tmpl_kw["goals"] = tuple(Goal(g) for g in tmpl_kw["goals"])
    if "placements" in tmpl_kw and tmpl_kw["placements"] != AUTO:
        tmpl_kw["placements"] = tuple(Placement(p) for p in tmpl_kw["placements"])
    if "creative_kind" in tmpl_kw:
        tmpl_kw["creative_kind"] = CreativeKind(tmpl_kw["creative_kind"])
    if "audience" in tmpl_kw:
        tmpl_kw["audience"] = Audience(**tmpl_kw["audience"])
    if "divergence" in tmpl_kw:
        tmpl_kw["divergence"] = tuple(tmpl_kw["divergence"])
    if "click_boost" in tmpl_kw:
        tmpl_kw["click_boost"] = tuple(tmpl_kw["click_boost"])
    template = TestTemplate(**tmpl_kw)
    world_kw = dict(payload.get("world", {}))
    if "relevance_mode" in world_kw:
        from .delivery import RelevanceMode
        world_kw["relevance_mode"] = RelevanceMode(world_kw["relevance_mode"])
    master_seed = payload.get("master_seed", seed)
    if isinstance(master_seed, str):
        master_seed = int(master_seed)
    return ScenarioConfig(
        name=payload.get("name", "custom"),
        population=pop, template=template,
        n_tests=payload.get("n_tests", 50),
        filters=FilterFlags(**payload.get("filters", {})),
        world=WorldConfig(**world_kw),
        master_seed=master_seed,
        model_kwargs=payload.get("model", {}),
        gate_bins=payload.get("gate_bins"),
        by_goal=payload.get("by_goal", False),
        ctr_effect_split=payload.get("ctr_effect_split", False))
