"""Lift tests (ghost control, intent-to-treat) and A/B tests (cross-cell
suppression, attributed outcomes) over the delivery engine, plus the Bayesian
result computations: posterior lift intervals, pairwise cost winners, and the
Beta-Binomial CPA winner for A/B tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .assignment import AllocationPlan, assign_indices
from .delivery import CampaignConfig, CampaignEntry, DeliveryWorld, WorldConfig, WorldLogs
from .population import Population, ResponseModel

TEST, CONTROL = "test", "control"


@dataclass
class LiftTestSpec:
    """One or more cells, each split into an eligible test group and a no-ad
    control group by the salted hash."""

    cells: list[tuple[str, CampaignConfig]]
    salt: int
    test_fraction: float = 0.5
    cell_shares: list[float] | None = None

    def __post_init__(self):
        if not self.cells:
            raise ValueError("lift test needs at least one cell")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be strictly between 0 and 1")
        if self.cell_shares is None:
            self.cell_shares = [1.0 / len(self.cells)] * len(self.cells)
        if len(self.cell_shares) != len(self.cells):
            raise ValueError("cell_shares must match cells")

    def allocation_plan(self) -> AllocationPlan:
        conds = []
        for (cell_id, _), share in zip(self.cells, self.cell_shares):
            conds.append((f"{cell_id}:{TEST}", share * self.test_fraction))
            conds.append((f"{cell_id}:{CONTROL}", share * (1.0 - self.test_fraction)))
        return AllocationPlan(tuple(conds))


@dataclass
class ABTestSpec:
    """Two or more alternative campaign configurations, no holdout."""

    cells: list[tuple[str, CampaignConfig, float]]
    salt: int

    def __post_init__(self):
        if len(self.cells) < 2:
            raise ValueError("A/B test needs at least two cells")
        total = sum(p for _, _, p in self.cells)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"cell proportions sum to {total}, expected 1")

    def allocation_plan(self) -> AllocationPlan:
        return AllocationPlan(tuple((cid, p) for cid, _, p in self.cells))


@dataclass
class LiftGroupStats:
    n_users: int
    unique_converts: int
    total_conversions: int

    @property
    def converts_per_user(self) -> float:
        return self.unique_converts / self.n_users if self.n_users else 0.0


@dataclass
class LiftRunLogs:
    spec: LiftTestSpec
    logs: WorldLogs
    cell_index: np.ndarray   # per user
    is_test: np.ndarray      # per user
    opportunity_reach: pd.DataFrame  # cell_id, group, user_index, user_id, first_slot

    def conversions(self) -> pd.DataFrame:
        """All conversion events: attributed (at impression) plus organic."""
        exp = self.logs.exposures
        att = exp.loc[exp["converted"], ["user_index", "slot"]].copy()
        att["attributed"] = True
        org = self.logs.organic[["user_index", "slot"]].copy()
        org["attributed"] = False
        return pd.concat([att, org], ignore_index=True)

    def exposures_with_group(self) -> pd.DataFrame:
        groups = np.where(self.is_test, TEST, CONTROL)
        return self.logs.exposures_csv_frame(lambda idx: groups[idx])


def run_lift_test(spec: LiftTestSpec, population: Population, model: ResponseModel,
                  world_config: WorldConfig | None = None, seed: int = 0) -> LiftRunLogs:
    """Both groups flow through identical delivery; control users' focal wins
    are suppressed at display and land in opportunity reach as ghost entries."""
    plan = spec.allocation_plan()
    cond = assign_indices(population.user_ids, spec.salt, plan)
    cell_index = cond // 2
    is_test = cond % 2 == 0

    entries = []
    for i, (cell_id, config) in enumerate(spec.cells):
        in_cell = cell_index == i
        entries.append(CampaignEntry(cell_id=cell_id, config=config,
                                     targetable=in_cell,
                                     displayable=in_cell & is_test))
    world = DeliveryWorld(population, model, entries, world_config, seed=seed)
    logs = world.run()

    reach = logs.reach.copy()
    reach["group"] = np.where(is_test[reach["user_index"]], TEST, CONTROL)
    reach = reach[["cell_id", "group", "user_index", "user_id", "first_slot"]]
    return LiftRunLogs(spec=spec, logs=logs, cell_index=cell_index,
                       is_test=is_test, opportunity_reach=reach)


def aggregate_lift_frames(reach: pd.DataFrame,
                          conversions: pd.DataFrame) -> dict[tuple[str, str], LiftGroupStats]:
    """Intent-to-treat tallies from explicit reach and conversion tables.

    Every reached user counts once per (cell, group); a conversion counts only
    when the user's first opportunity precedes (or shares the slot of) it.
    Users converting before entering the test contribute their later events
    only; non-converters stay in with zero counts.
    """
    out = {}
    for (cell, group), sub in reach.groupby(["cell_id", "group"], sort=True):
        merged = conversions.merge(sub[["user_index", "first_slot"]], on="user_index")
        counted = merged[merged["slot"] >= merged["first_slot"]]
        out[(cell, group)] = LiftGroupStats(
            n_users=len(sub),
            unique_converts=int(counted["user_index"].nunique()),
            total_conversions=int(len(counted)))
    return out


def aggregate_lift(run: LiftRunLogs) -> dict[tuple[str, str], LiftGroupStats]:
    return aggregate_lift_frames(run.opportunity_reach, run.conversions())


def lift_posterior(test_stats: LiftGroupStats, control_stats: LiftGroupStats,
                   n_draws: int = 10_000, rng=None) -> np.ndarray:
    """Posterior draws of lift per user: test rate minus control rate, each a
    Beta(converts + 1, n - converts + 1) posterior with a uniform prior."""
    if test_stats.n_users <= 0 or control_stats.n_users <= 0:
        raise ValueError("both groups need at least one user")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    t = rng.beta(test_stats.unique_converts + 1,
                 test_stats.n_users - test_stats.unique_converts + 1, size=n_draws)
    c = rng.beta(control_stats.unique_converts + 1,
                 control_stats.n_users - control_stats.unique_converts + 1, size=n_draws)
    return t - c


def smallest_interval_90(samples, mass: float = 0.9) -> tuple[float, float]:
    """Shortest span holding ceil(mass * n) samples; ties pick the lowest lo."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(x)
    if n < 100:
        raise ValueError("need at least 100 samples")
    w = math.ceil(mass * n)
    widths = x[w - 1:] - x[: n - w + 1]
    i = int(np.argmin(widths))  # first minimum -> lowest lo
    return float(x[i]), float(x[i + w - 1])


def conclusive(samples) -> bool:
    """True iff strictly more than 90% of the posterior mass is above zero."""
    x = np.asarray(samples)
    if len(x) == 0:
        raise ValueError("need samples")
    return bool(np.mean(x > 0) > 0.9)


@dataclass
class CellPosterior:
    cell_id: str
    samples: np.ndarray  # lift-per-user posterior draws
    spend: float
    n_users: int

    def __post_init__(self):
        if self.spend <= 0:
            raise ValueError("spend must be positive")


def lift_pairwise_winner(cell_a: CellPosterior, cell_b: CellPosterior,
                         n_draws: int = 10_000) -> float:
    """Fraction of paired posterior draws where cell A's cost per incremental
    conversion beats cell B's; nonpositive incremental draws lose outright."""
    if len(cell_a.samples) < n_draws or len(cell_b.samples) < n_draws:
        raise ValueError(f"need at least {n_draws} posterior draws per cell")
    inc_a = cell_a.samples[:n_draws] * cell_a.n_users
    inc_b = cell_b.samples[:n_draws] * cell_b.n_users
    pos_a = inc_a > 0
    pos_b = inc_b > 0
    cost_a = np.where(pos_a, cell_a.spend / np.where(pos_a, inc_a, 1.0), np.inf)
    cost_b = np.where(pos_b, cell_b.spend / np.where(pos_b, inc_b, 1.0), np.inf)
    wins_a = pos_a & (~pos_b | (cost_a < cost_b))
    return float(np.mean(wins_a))


@dataclass
class LiftCellResult:
    cell_id: str
    test: LiftGroupStats
    control: LiftGroupStats
    mean_lift_per_user: float
    interval_90: tuple[float, float]
    conclusive: bool
    samples: np.ndarray = field(default=None, repr=False)  # lift-per-user draws


@dataclass
class LiftResult:
    cells: list[LiftCellResult]
    pairwise_win_probs: dict[str, float]  # "A|B" -> win prob of A
    winner: str | None

    def to_json(self) -> str:
        return json.dumps({
            "cells": [{
                "cell_id": c.cell_id,
                "test": vars(c.test), "control": vars(c.control),
                "mean_lift_per_user": c.mean_lift_per_user,
                "interval_90": list(c.interval_90),
                "conclusive": c.conclusive,
            } for c in self.cells],
            "pairwise_win_probs": self.pairwise_win_probs,
            "winner": self.winner,
        }, indent=2)


def compute_lift_result(run: LiftRunLogs, n_draws: int = 10_000,
                        rng=None) -> LiftResult:
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    stats = aggregate_lift(run)
    spend = dict(zip(run.logs.cell_ids, run.logs.spend))
    cells = []
    posteriors = []
    for cell_id, _ in run.spec.cells:
        t = stats[(cell_id, TEST)]
        c = stats[(cell_id, CONTROL)]
        samples = lift_posterior(t, c, n_draws=n_draws, rng=rng)
        cells.append(LiftCellResult(
            cell_id=cell_id, test=t, control=c,
            mean_lift_per_user=float(samples.mean()),
            interval_90=smallest_interval_90(samples),
            conclusive=conclusive(samples), samples=samples))
        posteriors.append(CellPosterior(cell_id=cell_id, samples=samples,
                                        spend=max(float(spend[cell_id]), 1e-12),
                                        n_users=t.n_users))
    pairwise = {}
    dominates = {p.cell_id: True for p in posteriors}
    for i, a in enumerate(posteriors):
        for b in posteriors[i + 1:]:
            w = lift_pairwise_winner(a, b, n_draws=n_draws)
            pairwise[f"{a.cell_id}|{b.cell_id}"] = w
            if w <= 0.5:
                dominates[a.cell_id] = False
            if 1.0 - w <= 0.5:
                dominates[b.cell_id] = False
    winner = None
    if len(posteriors) > 1:
        leaders = [cid for cid, ok in dominates.items() if ok]
        winner = leaders[0] if len(leaders) == 1 else None
    return LiftResult(cells=cells, pairwise_win_probs=pairwise, winner=winner)


# ---------------------------------------------------------------------------
# A/B tests
# ---------------------------------------------------------------------------

@dataclass
class ABCellStats:
    cell_id: str
    spend: float
    impressions: int
    attributed_conversions: int
    clicks: int = 0

    def __post_init__(self):
        if self.impressions < self.attributed_conversions or self.attributed_conversions < 0:
            raise ValueError("need impressions >= conversions >= 0")


@dataclass
class ABRunLogs:
    spec: ABTestSpec
    logs: WorldLogs
    cell_index: np.ndarray  # per user

    def cell_stats(self) -> list[ABCellStats]:
        exp = self.logs.exposures
        out = []
        for i, (cell_id, _, _) in enumerate(self.spec.cells):
            sub = exp[exp["campaign_index"] == i]
            out.append(ABCellStats(
                cell_id=cell_id,
                spend=float(self.logs.spend[i]),
                impressions=int(len(sub)),
                attributed_conversions=int(sub["converted"].sum()),
                clicks=int(sub["clicked"].sum())))
        return out

    def exposures_with_group(self) -> pd.DataFrame:
        # For an A/B test the user's group is its cell.
        cells = np.array([c for c, _, _ in self.spec.cells], dtype=object)
        return self.logs.exposures_csv_frame(lambda idx: cells[self.cell_index[idx]])


def run_ab_test(spec: ABTestSpec, population: Population, model: ResponseModel,
                world_config: WorldConfig | None = None, seed: int = 0) -> ABRunLogs:
    """Each cell's campaign delivers under its own config to its audience; a
    cross-cell auction win is withheld at display and the next best ad serves.
    Only attributed outcomes feed ABCellStats; organic conversions are not
    counted for A/B results."""
    plan = spec.allocation_plan()
    cell_index = assign_indices(population.user_ids, spec.salt, plan)
    entries = []
    for i, (cell_id, config, _) in enumerate(spec.cells):
        entries.append(CampaignEntry(cell_id=cell_id, config=config,
                                     targetable=None,  # audience-wide bidding
                                     displayable=cell_index == i))
    world = DeliveryWorld(population, model, entries, world_config, seed=seed)
    logs = world.run()
    return ABRunLogs(spec=spec, logs=logs, cell_index=cell_index)


@dataclass
class ABResult:
    cells: list[ABCellStats]
    winner: str
    confidence: float

    def to_json(self) -> str:
        return json.dumps({
            "cells": [vars(c) for c in self.cells],
            "winner": self.winner,
            "confidence": self.confidence,
        }, indent=2)


def ab_winner(cell_stats, n_sims: int = 10_000, prior_a: float = 1.0,
              prior_b: float = 1.0, rng=None) -> tuple[str, float]:
    """Beta-Binomial CPA simulation: per simulation draw each cell's
    conversion rate from Beta(conversions + a, impressions - conversions + b),
    redraw conversions binomially, and award the simulation to the lowest
    spend / simulated conversions. Zero-conversion draws lose. Returns the
    modal winner and the fraction of simulations it won."""
    cells = [c if isinstance(c, ABCellStats) else
             ABCellStats(cell_id=str(i), spend=c[0], impressions=int(c[1]),
                         attributed_conversions=int(c[2]))
             for i, c in enumerate(cell_stats)]
    if any(c.spend <= 0 for c in cells):
        raise ValueError("every cell needs positive spend")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    spend = np.array([c.spend for c in cells])
    impr = np.array([c.impressions for c in cells])
    conv = np.array([c.attributed_conversions for c in cells])
    rates = rng.beta(conv + prior_a, impr - conv + prior_b, size=(n_sims, len(cells)))
    sims = rng.binomial(impr, rates)
    cpa = np.where(sims > 0, spend / np.where(sims > 0, sims, 1), np.inf)
    any_conv = sims.max(axis=1) > 0
    winners = np.argmin(cpa, axis=1)
    counts = np.bincount(winners[any_conv], minlength=len(cells))
    best = int(np.argmax(counts))
    return cells[best].cell_id, float(counts[best] / n_sims)


def compute_ab_result(run: ABRunLogs, n_sims: int = 10_000, rng=None) -> ABResult:
    stats = run.cell_stats()
    winner, confidence = ab_winner(stats, n_sims=n_sims, rng=rng)
    return ABResult(cells=stats, winner=winner, confidence=confidence)
