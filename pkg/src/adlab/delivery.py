"""Ad-delivery engine: opportunities, eligibility, relevance, auctions, pacing.

A DeliveryWorld owns one simulated test: the shared population browses slot by
slot, focal campaigns compete for each opportunity against a background pool
of competing ads, and the winning ad is resolved through a display step where
an experiment harness may suppress it (ghost control, cross-cell exclusion).
Everything is driven by pre-drawn randomness so runs are bit-reproducible and
the numba and numpy kernel paths agree exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from ._kernels import resolve_slot
from .population import Population, ResponseModel, UserProfile, organic_events, response_probs, response_probs_batch


class Goal(str, Enum):
    AWARENESS = "AWARENESS"
    TRAFFIC = "TRAFFIC"
    ENGAGEMENT = "ENGAGEMENT"
    LEADS = "LEADS"
    CONVERSION = "CONVERSION"


class Placement(str, Enum):
    FEED = "FEED"
    OTHER_SURFACE = "OTHER_SURFACE"


class CreativeKind(str, Enum):
    STATIC_IMAGE = "STATIC_IMAGE"
    VIDEO = "VIDEO"


class RelevanceMode(str, Enum):
    ORACLE_NOISE = "ORACLE_NOISE"
    ONLINE_LEARNER = "ONLINE_LEARNER"


AUTO = "AUTO"

CLICK_GOALS = (Goal.TRAFFIC, Goal.ENGAGEMENT, Goal.LEADS)
DEFAULT_AWARENESS_RELEVANCE = 0.05
MIN_MULTIPLIER = 0.01
PACE_DOWN = 0.8
PACE_UP = 1.25


@dataclass(frozen=True)
class Audience:
    """Targeting predicate over structured features; None means no constraint."""

    gender_male: bool | None = None
    age_min: int = 0
    age_max: int = 5
    os_ios: bool | None = None
    lang_english: bool | None = None
    loc_america: bool | None = None
    min_friends: int = 0
    active_within_days: int | None = None  # 1, 7 or 28

    def mask(self, population: Population) -> np.ndarray:
        ok = (population.age_bin >= self.age_min) & (population.age_bin <= self.age_max)
        if self.gender_male is not None:
            ok &= population.gender_male == self.gender_male
        if self.os_ios is not None:
            ok &= population.os_ios == self.os_ios
        if self.lang_english is not None:
            ok &= population.lang_english == self.lang_english
        if self.loc_america is not None:
            ok &= population.loc_america == self.loc_america
        if self.min_friends > 0:
            ok &= population.friend_count >= self.min_friends
        if self.active_within_days is not None:
            flag = {1: population.active_1d, 7: population.active_7d,
                    28: population.active_28d}[self.active_within_days]
            ok &= flag
        return ok

    def matches(self, user: UserProfile) -> bool:
        if not (self.age_min <= user.age_bin <= self.age_max):
            return False
        for want, have in ((self.gender_male, user.gender_male),
                           (self.os_ios, user.os_ios),
                           (self.lang_english, user.lang_english),
                           (self.loc_america, user.loc_america)):
            if want is not None and have != want:
                return False
        if user.friend_count < self.min_friends:
            return False
        if self.active_within_days is not None:
            flag = {1: user.active_1d, 7: user.active_7d, 28: user.active_28d}
            if not flag[self.active_within_days]:
                return False
        return True


@dataclass(frozen=True)
class Creative:
    kind: CreativeKind
    vec: tuple  # length-d appeal direction consumed by the response model
    creative_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "vec", tuple(float(v) for v in self.vec))
        if not self.creative_hash:
            raw = np.asarray(self.vec, dtype=np.float64).tobytes() + self.kind.value.encode()
            object.__setattr__(self, "creative_hash", hashlib.sha1(raw).hexdigest()[:16])

    @property
    def vec_array(self) -> np.ndarray:
        return np.asarray(self.vec, dtype=np.float64)


@dataclass(frozen=True)
class FrequencyCap:
    max_impressions: int
    window_slots: int | None = None  # None = the whole simulation horizon

    def __post_init__(self):
        if self.max_impressions < 1:
            raise ValueError("frequency cap must allow at least one impression")


@dataclass
class CampaignConfig:
    campaign_id: int
    goal: Goal
    creative: Creative
    audience: Audience = field(default_factory=Audience)
    daily_budget: float = 1000.0
    bid: float | str = AUTO
    placements: frozenset | str = AUTO
    schedule: frozenset | None = None  # active slots; None = always on
    frequency_cap: FrequencyCap | None = None

    def __post_init__(self):
        # 0 is allowed and means a paused campaign that never enters auctions.
        if self.daily_budget < 0:
            raise ValueError("daily_budget must be nonnegative")
        if self.bid != AUTO and (not isinstance(self.bid, (int, float)) or self.bid <= 0):
            raise ValueError("bid must be a positive number or AUTO")
        if self.placements != AUTO:
            self.placements = frozenset(Placement(p) for p in self.placements)
            if not self.placements:
                raise ValueError("placements must be nonempty after resolution")

    def resolved_bid(self) -> float:
        return 1.0 if self.bid == AUTO else float(self.bid)

    def resolved_placements(self) -> frozenset:
        if self.placements == AUTO:
            return frozenset((Placement.FEED, Placement.OTHER_SURFACE))
        return self.placements

    def delivery_key(self) -> tuple:
        """Audience/budget/bid fingerprint used by scenario filters."""
        return (self.audience, float(self.daily_budget), self.resolved_bid())


@dataclass
class AdCandidate:
    campaign_id: int
    bid: float  # effective (paced) bid entering this auction
    relevance: float
    total_value: float = field(init=False)

    def __post_init__(self):
        if self.bid <= 0:
            raise ValueError("candidate bid must be positive")
        self.total_value = self.bid * self.relevance


def run_auction(candidates) -> tuple[AdCandidate, AdCandidate | None]:
    """Highest total value wins; ties go to the smallest campaign_id."""
    if not candidates:
        raise ValueError("auction needs at least one candidate")
    ranked = sorted(candidates, key=lambda c: (-c.total_value, c.campaign_id))
    runner_up = ranked[1] if len(ranked) > 1 else None
    return ranked[0], runner_up


@dataclass
class PacingState:
    spend_so_far: float = 0.0
    multiplier: float = 1.0
    slot_index: int = 0


def pace(state: PacingState, config: CampaignConfig, elapsed_fraction: float) -> float:
    """Multiplicative budget-pacing controller; returns the new multiplier.

    Spending ahead of the elapsed schedule scales the multiplier down,
    spending behind scales it up (capped at 1); on-track leaves it unchanged.
    """
    if not 0.0 <= elapsed_fraction <= 1.0:
        raise ValueError("elapsed_fraction must be in [0, 1]")
    if config.daily_budget == 0:
        return state.multiplier
    ratio = state.spend_so_far / config.daily_budget
    m = state.multiplier
    if ratio > elapsed_fraction:
        m *= PACE_DOWN
    elif ratio < elapsed_fraction:
        m *= PACE_UP
    return float(min(1.0, max(MIN_MULTIPLIER, m)))


@dataclass
class Opportunity:
    user_index: int
    time_slot: int
    placement: Placement


class OpportunityStream:
    """Per-slot browsing events: at most one opportunity per user per slot."""

    def __init__(self, slots: list[tuple[np.ndarray, np.ndarray]]):
        self.slots = slots  # per slot: (user indices, feed flags)

    def __len__(self) -> int:
        return sum(len(u) for u, _ in self.slots)

    def __iter__(self):
        for slot, (users, feed) in enumerate(self.slots):
            for u, f in zip(users, feed):
                yield Opportunity(int(u), slot,
                                  Placement.FEED if f else Placement.OTHER_SURFACE)

    def counts_per_user(self, n_users: int) -> np.ndarray:
        counts = np.zeros(n_users, dtype=np.int64)
        for users, _ in self.slots:
            counts[users] += 1
        return counts


def _activity_multiplier(population: Population) -> np.ndarray:
    mult = np.full(len(population), 0.15)
    mult[population.active_28d] = 0.4
    mult[population.active_7d] = 0.65
    mult[population.active_1d] = 1.0
    return mult


def _feed_probability(population: Population) -> np.ndarray:
    # Surface mix varies systematically with OS and age.
    p = 0.45 + 0.06 * population.age_bin + 0.10 * population.os_ios
    return np.clip(p, 0.05, 0.95)


def generate_opportunities(population: Population, horizon_slots: int, seed: int,
                           base_rate: float = 0.40, tod_amplitude: float = 0.5,
                           slots_per_day: int = 24) -> OpportunityStream:
    """Deterministic browsing stream; active users browse more, and the
    segment mix shifts over the time-of-day cycle."""
    if horizon_slots < 0:
        raise ValueError("horizon_slots must be nonnegative")
    rng = np.random.default_rng(seed)
    n = len(population)
    act = _activity_multiplier(population)
    p_feed = _feed_probability(population)
    n_seg = max(1, int(population.segment.max()) + 1)
    phase = population.segment.astype(np.float64) / n_seg
    slots = []
    for slot in range(horizon_slots):
        tod = 1.0 + tod_amplitude * np.cos(
            2.0 * np.pi * ((slot % slots_per_day) / slots_per_day - phase))
        p = np.clip(base_rate * act * tod, 0.0, 1.0)
        users = np.nonzero(rng.random(n) < p)[0].astype(np.int64)
        feed = rng.random(len(users)) < p_feed[users]
        slots.append((users, feed))
    return OpportunityStream(slots)


class SegmentLearner:
    """Per-segment Beta-posterior outcome-rate learner over a coarse 2-D grid
    of two embedding coordinates (the feedback loop of learned delivery)."""

    def __init__(self, edges0: np.ndarray, edges1: np.ndarray,
                 prior_a: float = 1.0, prior_b: float = 1.0):
        self.edges0 = edges0
        self.edges1 = edges1
        self.n_bins = (len(edges0) + 1) * (len(edges1) + 1)
        self.prior_a = prior_a
        self.prior_b = prior_b
        self.successes = np.zeros(self.n_bins)
        self.trials = np.zeros(self.n_bins)

    @classmethod
    def for_population(cls, population: Population, bins: int = 3, **kw):
        qs = np.linspace(0, 1, bins + 1)[1:-1]
        e0 = np.quantile(population.embedding[:, 0], qs)
        e1 = np.quantile(population.embedding[:, 1 % population.d], qs)
        return cls(e0, e1, **kw)

    def segment_ids(self, embedding: np.ndarray) -> np.ndarray:
        b0 = np.searchsorted(self.edges0, embedding[:, 0])
        b1 = np.searchsorted(self.edges1, embedding[:, 1 % embedding.shape[1]])
        return b0 * (len(self.edges1) + 1) + b1

    def posterior_mean(self) -> np.ndarray:
        return ((self.prior_a + self.successes)
                / (self.prior_a + self.prior_b + self.trials))

    def sample_rates(self, rng) -> np.ndarray:
        return rng.beta(self.prior_a + self.successes,
                        self.prior_b + self.trials - self.successes)

    def update(self, seg_ids: np.ndarray, successes: np.ndarray) -> None:
        np.add.at(self.trials, seg_ids, 1.0)
        np.add.at(self.successes, seg_ids, successes.astype(np.float64))


def predict_relevance(mode: RelevanceMode, model: ResponseModel, user: UserProfile,
                      config: CampaignConfig, noise_rng=None, learner=None,
                      awareness_relevance: float = DEFAULT_AWARENESS_RELEVANCE) -> float:
    """Predicted goal probability for one (user, campaign) pair.

    AWARENESS scores every user identically. ORACLE_NOISE perturbs the latent
    goal probability with multiplicative lognormal noise (none when noise_rng
    is omitted or noise_sd is 0). ONLINE_LEARNER scores by the user segment's
    posterior rate, exploring via a Beta-posterior draw when a rng is given.
    """
    mode = RelevanceMode(mode)
    if config.goal == Goal.AWARENESS:
        return awareness_relevance
    if mode == RelevanceMode.ORACLE_NOISE:
        p_click, p_conv = response_probs(model, user, config.creative.vec_array)
        p = p_conv if config.goal == Goal.CONVERSION else p_click
        if noise_rng is not None and model.noise_sd > 0:
            p *= float(np.exp(model.noise_sd * noise_rng.standard_normal()))
        return float(p)
    if mode == RelevanceMode.ONLINE_LEARNER:
        if learner is None:
            return 1.0 / (1.0 + 1.0)  # fresh Beta(1,1) prior mean
        seg = int(learner.segment_ids(user.embedding[np.newaxis, :])[0])
        if noise_rng is None:
            return float(learner.posterior_mean()[seg])
        return float(learner.sample_rates(noise_rng)[seg])
    raise ValueError(f"unknown relevance mode: {mode}")


def eligible(config: CampaignConfig, opportunity: Opportunity, freq_state: int,
             assignment_ok: bool) -> bool:
    """Can this campaign enter this opportunity's auction at all?"""
    if not assignment_ok:
        return False
    if opportunity.placement not in config.resolved_placements():
        return False
    if config.schedule is not None and opportunity.time_slot not in config.schedule:
        return False
    cap = config.frequency_cap
    if cap is not None and freq_state >= cap.max_impressions:
        return False
    return True


# ---------------------------------------------------------------------------
# The world
# ---------------------------------------------------------------------------

@dataclass
class CampaignEntry:
    """A focal campaign plus the experiment's per-user gates.

    targetable: users whose auctions this campaign may enter (audience is
    applied on top). displayable: users who may actually be shown the ad;
    a win for a non-displayable user is suppressed at display time and the
    runner-up serves instead.
    """

    cell_id: str
    config: CampaignConfig
    targetable: np.ndarray | None = None
    displayable: np.ndarray | None = None


@dataclass
class WorldConfig:
    horizon_slots: int = 24
    slots_per_day: int = 24
    bg_pool_size: int = 20
    bg_log_mu: float = float(np.log(0.02))
    bg_log_sigma: float = 0.7
    relevance_mode: RelevanceMode = RelevanceMode.ORACLE_NOISE
    awareness_relevance: float = DEFAULT_AWARENESS_RELEVANCE
    conversion_effect: float = 1.0  # scales attributed-conversion draws only
    opportunity_base_rate: float = 0.40
    tod_amplitude: float = 0.5
    learner_bins: int = 3
    learner_prior_a: float = 1.0
    learner_prior_b: float = 30.0


@dataclass
class WorldLogs:
    """Accumulated event logs for one simulated test."""

    cell_ids: list[str]
    campaign_ids: list[int]
    exposures: pd.DataFrame      # one row per displayed focal impression
    reach: pd.DataFrame          # first auction win per (campaign, user)
    organic: pd.DataFrame        # background conversions, exposure-independent
    spend: np.ndarray
    impressions: np.ndarray

    def exposures_csv_frame(self, group_of_user=None) -> pd.DataFrame:
        df = self.exposures.copy()
        df["attributed"] = df["converted"]
        cols = ["campaign_id", "cell_id", "user_id", "slot", "placement",
                "price", "clicked", "converted", "attributed"]
        if group_of_user is not None:
            df["group"] = group_of_user(df["user_index"].to_numpy())
            cols.append("group")
        return df[cols]

    def outcomes_csv_frame(self, group_of_user=None) -> pd.DataFrame:
        """Conversion events in the exposure-log schema: attributed rows carry
        their impression context, organic rows a sentinel campaign of -1."""
        att = self.exposures[self.exposures["converted"]].copy()
        att["attributed"] = True
        org = self.organic.copy()
        org["campaign_id"] = -1
        org["cell_id"] = ""
        org["placement"] = ""
        org["price"] = 0.0
        org["clicked"] = False
        org["converted"] = True
        org["attributed"] = False
        cols = ["campaign_id", "cell_id", "user_id", "slot", "placement",
                "price", "clicked", "converted", "attributed"]
        out = pd.concat([att, org], ignore_index=True)[cols + ["user_index"]]
        out = out.sort_values(["slot", "user_id"], kind="stable").reset_index(drop=True)
        if group_of_user is not None:
            out["group"] = group_of_user(out["user_index"].to_numpy())
            cols.append("group")
        return out[cols]


class DeliveryWorld:
    """Single-owner mutable state for one simulated test, advanced slot by slot."""

    def __init__(self, population: Population, model: ResponseModel,
                 entries: list[CampaignEntry], config: WorldConfig | None = None,
                 seed: int = 0):
        self.population = population
        self.model = model
        self.entries = entries
        self.config = config or WorldConfig()
        self.seed = seed
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0xAD5107]))
        n = len(population)
        k = len(entries)
        self.n_users = n
        self.k = k

        cfg = self.config
        self.stream = generate_opportunities(
            population, cfg.horizon_slots,
            seed=int(np.random.SeedSequence([seed, 0x0BB0]).generate_state(1)[0]),
            base_rate=cfg.opportunity_base_rate, tod_amplitude=cfg.tod_amplitude,
            slots_per_day=cfg.slots_per_day)

        # Static per-campaign gates and latent probabilities.
        self.static_ok = np.zeros((k, n), dtype=bool)
        self.display_ok = np.zeros((k, n), dtype=bool)
        self.p_click = np.zeros((k, n))
        self.p_conv = np.zeros((k, n))
        self.latent = np.zeros((k, n))
        self.feed_allowed = np.zeros(k, dtype=bool)
        self.other_allowed = np.zeros(k, dtype=bool)
        self.bids = np.zeros(k)
        self.budgets = np.zeros(k)
        for c, entry in enumerate(entries):
            cc = entry.config
            aud = cc.audience.mask(population)
            tgt = aud if entry.targetable is None else (aud & entry.targetable)
            disp = tgt if entry.displayable is None else (tgt & entry.displayable)
            self.static_ok[c] = tgt
            self.display_ok[c] = disp
            pc, pv = response_probs_batch(model, population, cc.creative.vec_array)
            self.p_click[c] = pc
            self.p_conv[c] = pv
            if cc.goal == Goal.AWARENESS:
                self.latent[c] = cfg.awareness_relevance
            elif cc.goal == Goal.CONVERSION:
                self.latent[c] = pv
            else:
                self.latent[c] = pc
            places = cc.resolved_placements()
            self.feed_allowed[c] = Placement.FEED in places
            self.other_allowed[c] = Placement.OTHER_SURFACE in places
            self.bids[c] = cc.resolved_bid()
            self.budgets[c] = cc.daily_budget

        self.pacing = [PacingState() for _ in range(k)]
        self.spend = np.zeros(k)
        self.freq = np.zeros((k, n), dtype=np.int32)
        self._imps_by_slot: list[list[np.ndarray]] = []
        self.reach_seen = np.zeros((k, n), dtype=bool)

        self.learners = None
        if cfg.relevance_mode == RelevanceMode.ONLINE_LEARNER:
            self.learners = [
                SegmentLearner.for_population(population, cfg.learner_bins,
                                              prior_a=cfg.learner_prior_a,
                                              prior_b=cfg.learner_prior_b)
                for _ in range(k)]
            self._seg_of_user = self.learners[0].segment_ids(population.embedding)

        ou, os_ = organic_events(model, n, cfg.horizon_slots,
                                 np.random.default_rng(np.random.SeedSequence([seed, 0x0564])))
        self._organic = (ou, os_)

        self._exp_rows: list[dict] = []
        self._reach_rows: list[dict] = []
        self.slot = 0

    # -- per-slot mechanics ------------------------------------------------

    def _expire_frequency(self, slot: int) -> None:
        for c, entry in enumerate(self.entries):
            cap = entry.config.frequency_cap
            if cap is None or cap.window_slots is None:
                continue
            old = slot - cap.window_slots
            if 0 <= old < len(self._imps_by_slot):
                users = self._imps_by_slot[old][c]
                if len(users):
                    self.freq[c, users] -= 1

    def simulate_slot(self, slot: int) -> None:
        cfg = self.config
        self._expire_frequency(slot)
        elapsed = slot / cfg.horizon_slots if cfg.horizon_slots else 0.0
        for c, entry in enumerate(self.entries):
            st = self.pacing[c]
            st.spend_so_far = self.spend[c]
            st.multiplier = pace(st, entry.config, elapsed)
            st.slot_index = slot
        mult = np.array([st.multiplier for st in self.pacing])
        price = self.bids * mult

        users, feed = self.stream.slots[slot]
        n_opp = len(users)
        slot_imps = [np.empty(0, dtype=np.int64)] * self.k
        if n_opp:
            elig = self.static_ok[:, users].T.copy()  # (n_opp, k)
            place_ok = np.where(feed[:, None], self.feed_allowed[None, :],
                                self.other_allowed[None, :])
            elig &= place_ok
            for c, entry in enumerate(self.entries):
                sched = entry.config.schedule
                if sched is not None and slot not in sched:
                    elig[:, c] = False
                cap = entry.config.frequency_cap
                if cap is not None:
                    elig[:, c] &= self.freq[c, users] < cap.max_impressions
            disp = elig & self.display_ok[:, users].T

            bg = self.rng.lognormal(cfg.bg_log_mu, cfg.bg_log_sigma,
                                    size=(n_opp, cfg.bg_pool_size)).max(axis=1) \
                if cfg.bg_pool_size > 0 else np.full(n_opp, -np.inf)

            rel = self.latent[:, users].T.copy()
            if cfg.relevance_mode == RelevanceMode.ORACLE_NOISE:
                if self.model.noise_sd > 0:
                    noise = np.exp(self.model.noise_sd
                                   * self.rng.standard_normal((n_opp, self.k)))
                    aware = np.array([e.config.goal == Goal.AWARENESS
                                      for e in self.entries])
                    rel[:, ~aware] *= noise[:, ~aware]
            else:
                for c, entry in enumerate(self.entries):
                    if entry.config.goal == Goal.AWARENESS:
                        continue
                    rates = self.learners[c].sample_rates(self.rng)
                    rel[:, c] = rates[self._seg_of_user[users]]
            values = rel * price[None, :]

            u_click = self.rng.random(n_opp)
            u_conv = self.rng.random(n_opp)

            won, shown, spend_out = resolve_slot(
                values, elig, disp, bg, self.spend, self.budgets, price)
            self.spend = spend_out

            for c in range(self.k):
                # Reach: first auction win per user, displayed or ghosted.
                wrows = np.nonzero(won == c)[0]
                if wrows.size:
                    wusers = users[wrows]
                    new = ~self.reach_seen[c, wusers]
                    if new.any():
                        self.reach_seen[c, wusers[new]] = True
                        n_new = int(new.sum())
                        self._reach_rows.append({
                            "campaign_index": np.full(n_new, c, dtype=np.int64),
                            "user_index": wusers[new],
                            "slot": np.full(n_new, slot)})
                srows = np.nonzero(shown == c)[0]
                if srows.size:
                    susers = users[srows]
                    clicked = u_click[srows] < self.p_click[c, susers]
                    converted = u_conv[srows] < (self.p_conv[c, susers]
                                                 * cfg.conversion_effect)
                    self.freq[c, susers] += 1
                    slot_imps[c] = susers
                    self._exp_rows.append({
                        "campaign_index": np.full(len(susers), c, dtype=np.int64),
                        "user_index": susers,
                        "slot": np.full(len(susers), slot),
                        "feed": feed[srows], "price": np.full(len(susers), price[c]),
                        "clicked": clicked, "converted": converted})
                    if self.learners is not None \
                            and self.entries[c].config.goal != Goal.AWARENESS:
                        outcome = converted if self.entries[c].config.goal == Goal.CONVERSION else clicked
                        self.learners[c].update(self._seg_of_user[susers], outcome)
        self._imps_by_slot.append(slot_imps)
        self.slot = slot + 1

    def run(self) -> WorldLogs:
        for slot in range(self.config.horizon_slots):
            self.simulate_slot(slot)
        return self.logs()

    # -- log assembly --------------------------------------------------------

    def _concat(self, rows, fields):
        if not rows:
            return {f: np.empty(0, dtype=np.int64) for f in fields}
        return {f: np.concatenate([r[f] for r in rows]) for f in fields}

    def logs(self) -> WorldLogs:
        pop = self.population
        cells = [e.cell_id for e in self.entries]
        camp_ids = [e.config.campaign_id for e in self.entries]

        e = self._concat(self._exp_rows,
                         ["campaign_index", "user_index", "slot", "feed",
                          "price", "clicked", "converted"])
        ci = e["campaign_index"].astype(np.int64)
        exposures = pd.DataFrame({
            "campaign_index": ci,
            "campaign_id": np.array(camp_ids)[ci] if len(ci) else np.array([], dtype=np.int64),
            "cell_id": np.array(cells, dtype=object)[ci] if len(ci) else np.array([], dtype=object),
            "user_index": e["user_index"],
            "user_id": pop.user_ids[e["user_index"]] if len(ci) else np.array([], dtype=np.uint64),
            "slot": e["slot"],
            "placement": np.where(e["feed"], Placement.FEED.value,
                                  Placement.OTHER_SURFACE.value) if len(ci) else np.array([], dtype=object),
            "price": e["price"].astype(np.float64),
            "clicked": e["clicked"].astype(bool),
            "converted": e["converted"].astype(bool),
        })

        r = self._concat(self._reach_rows, ["campaign_index", "user_index", "slot"])
        rci = r["campaign_index"].astype(np.int64)
        reach = pd.DataFrame({
            "campaign_index": rci,
            "cell_id": np.array(cells, dtype=object)[rci] if len(rci) else np.array([], dtype=object),
            "user_index": r["user_index"],
            "user_id": pop.user_ids[r["user_index"]] if len(rci) else np.array([], dtype=np.uint64),
            "first_slot": r["slot"],
        })

        ou, os_ = self._organic
        organic = pd.DataFrame({
            "user_index": ou,
            "user_id": pop.user_ids[ou],
            "slot": os_,
        })

        imps = np.bincount(ci, minlength=self.k) if len(ci) else np.zeros(self.k, dtype=np.int64)
        return WorldLogs(cell_ids=cells, campaign_ids=camp_ids,
                         exposures=exposures, reach=reach, organic=organic,
                         spend=self.spend.copy(), impressions=imps)


def simulate_slot(world: DeliveryWorld, slot: int) -> None:
    world.simulate_slot(slot)
