"""Synthetic user population: structured features, embeddings, latent response.

Users are drawn from a segment mixture. Each segment shifts a small block of
embedding coordinates and its own structured-feature distributions, so
segments are separable from the embedding and correlated with demographics --
the precondition for delivery models to route different creatives to
different audiences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

AGE_BIN_FEATURES = (
    "age_18_24", "age_25_34", "age_35_44", "age_45_54", "age_55_64", "age_65_plus",
)
N_AGE_BINS = len(AGE_BIN_FEATURES)

# Fixed feature order used everywhere downstream (balance reports, CSV).
STRUCTURED_FEATURES = (
    ("gender_male",)
    + AGE_BIN_FEATURES
    + ("os_ios", "lang_english", "loc_america", "friend_count",
       "active_1d", "active_7d", "active_28d")
)
N_STRUCTURED = len(STRUCTURED_FEATURES)

OBSERVABLE_FEATURES = ("gender_male",) + AGE_BIN_FEATURES  # visible in test output

_ID_STRIDE = 0x9E3779B97F4A7C15  # odd multiplier -> bijective on 64-bit ints


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class SegmentParams:
    weight: float
    gender_male_p: float = 0.5
    age_probs: tuple = (0.20, 0.24, 0.20, 0.16, 0.12, 0.08)
    os_ios_p: float = 0.4
    lang_english_p: float = 0.7
    loc_america_p: float = 0.5
    friend_log_mu: float = 5.0
    friend_log_sd: float = 1.0
    active_28d_p: float = 0.9
    active_7d_given_28d: float = 0.75
    active_1d_given_7d: float = 0.6

    def __post_init__(self):
        if len(self.age_probs) != N_AGE_BINS:
            raise ValueError(f"age_probs needs {N_AGE_BINS} entries")
        if abs(sum(self.age_probs) - 1.0) > 1e-9:
            raise ValueError("age_probs must sum to 1")


# Segment flavors cycled when building default mixtures: young/iOS/heavy,
# mid-age/android, older/light, plus a mild fourth.
_DEFAULT_SEGMENTS = (
    dict(gender_male_p=0.55, age_probs=(0.42, 0.30, 0.14, 0.08, 0.04, 0.02),
         os_ios_p=0.62, lang_english_p=0.78, loc_america_p=0.60,
         friend_log_mu=5.6, friend_log_sd=0.9,
         active_28d_p=0.96, active_7d_given_28d=0.85, active_1d_given_7d=0.70),
    dict(gender_male_p=0.48, age_probs=(0.10, 0.24, 0.30, 0.20, 0.10, 0.06),
         os_ios_p=0.34, lang_english_p=0.66, loc_america_p=0.45,
         friend_log_mu=5.0, friend_log_sd=1.0,
         active_28d_p=0.90, active_7d_given_28d=0.72, active_1d_given_7d=0.55),
    dict(gender_male_p=0.44, age_probs=(0.03, 0.08, 0.16, 0.24, 0.27, 0.22),
         os_ios_p=0.25, lang_english_p=0.60, loc_america_p=0.52,
         friend_log_mu=4.2, friend_log_sd=1.1,
         active_28d_p=0.80, active_7d_given_28d=0.60, active_1d_given_7d=0.45),
    dict(gender_male_p=0.52, age_probs=(0.18, 0.22, 0.22, 0.18, 0.12, 0.08),
         os_ios_p=0.45, lang_english_p=0.72, loc_america_p=0.40,
         friend_log_mu=5.2, friend_log_sd=1.0,
         active_28d_p=0.88, active_7d_given_28d=0.70, active_1d_given_7d=0.58),
)


@dataclass
class PopulationConfig:
    n_users: int
    d: int = 72
    n_segments: int = 3
    seed: int = 0
    segments: list[SegmentParams] | None = None
    embedding_sd: float = 1.0
    segment_spread: float = 1.0   # per-coordinate mean shift on a segment's block
    signal_dims_per_segment: int = 6  # remaining dims carry no segment signal

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.d <= 0:
            raise ValueError("embedding dimension d must be positive")
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        if self.segments is None:
            w = 1.0 / self.n_segments
            self.segments = [
                SegmentParams(weight=w, **_DEFAULT_SEGMENTS[s % len(_DEFAULT_SEGMENTS)])
                for s in range(self.n_segments)
            ]
        if len(self.segments) != self.n_segments:
            raise ValueError("segments list length must match n_segments")
        total = sum(s.weight for s in self.segments)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"segment weights sum to {total}, expected 1")
        if any(s.weight < 0 for s in self.segments):
            raise ValueError("segment weights must be nonnegative")

    @property
    def block_size(self) -> int:
        return max(1, min(self.signal_dims_per_segment, self.d // self.n_segments))

    def segment_embedding_mean(self, s: int) -> np.ndarray:
        """Mean embedding of segment s: a shifted block, zeros elsewhere."""
        mu = np.zeros(self.d)
        b = self.block_size
        lo = (s * b) % self.d
        mu[lo:lo + b] = self.segment_spread
        return mu

    def segment_direction(self, s: int) -> np.ndarray:
        """Unit vector pointing at segment s's embedding block."""
        mu = self.segment_embedding_mean(s)
        return mu / np.linalg.norm(mu)


@dataclass
class ResponseModel:
    """Latent ground truth for click/conversion given user x creative."""

    click_weight: np.ndarray
    conv_weight: np.ndarray
    click_bias: float = -3.5
    conv_bias: float = -4.6
    organic_rate: float = 0.002  # per user-slot background conversion hazard
    noise_sd: float = 0.25      # lognormal sigma of relevance prediction noise

    def __post_init__(self):
        self.click_weight = np.asarray(self.click_weight, dtype=np.float64)
        self.conv_weight = np.asarray(self.conv_weight, dtype=np.float64)
        if not (np.all(np.isfinite(self.click_weight)) and np.all(np.isfinite(self.conv_weight))):
            raise ValueError("response weights must be finite")
        if not 0.0 <= self.organic_rate <= 1.0:
            raise ValueError("organic_rate must be in [0, 1]")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")

    @classmethod
    def default(cls, d: int, click_scale: float = 1.0, conv_scale: float = 1.0,
                **kw) -> "ResponseModel":
        return cls(click_weight=np.full(d, click_scale),
                   conv_weight=np.full(d, conv_scale), **kw)

    @property
    def d(self) -> int:
        return len(self.click_weight)


@dataclass
class UserProfile:
    user_id: int
    gender_male: bool
    age_bin: int
    os_ios: bool
    lang_english: bool
    loc_america: bool
    friend_count: int
    active_1d: bool
    active_7d: bool
    active_28d: bool
    embedding: np.ndarray
    segment: int = -1  # latent, not a balance feature

    def structured_features(self) -> np.ndarray:
        """The 14 feature values in the fixed STRUCTURED_FEATURES order."""
        age = np.zeros(N_AGE_BINS)
        age[self.age_bin] = 1.0
        return np.concatenate((
            [float(self.gender_male)], age,
            [float(self.os_ios), float(self.lang_english), float(self.loc_america),
             float(self.friend_count), float(self.active_1d), float(self.active_7d),
             float(self.active_28d)],
        ))


class Population:
    """Column-oriented population; indexable as a sequence of UserProfile."""

    def __init__(self, user_ids, gender_male, age_bin, os_ios, lang_english,
                 loc_america, friend_count, active_1d, active_7d, active_28d,
                 embedding, segment):
        self.user_ids = user_ids
        self.gender_male = gender_male
        self.age_bin = age_bin
        self.os_ios = os_ios
        self.lang_english = lang_english
        self.loc_america = loc_america
        self.friend_count = friend_count
        self.active_1d = active_1d
        self.active_7d = active_7d
        self.active_28d = active_28d
        self.embedding = embedding
        self.segment = segment
        self._features = None

    def __len__(self) -> int:
        return len(self.user_ids)

    @property
    def d(self) -> int:
        return self.embedding.shape[1]

    def __getitem__(self, i: int) -> UserProfile:
        return UserProfile(
            user_id=int(self.user_ids[i]),
            gender_male=bool(self.gender_male[i]),
            age_bin=int(self.age_bin[i]),
            os_ios=bool(self.os_ios[i]),
            lang_english=bool(self.lang_english[i]),
            loc_america=bool(self.loc_america[i]),
            friend_count=int(self.friend_count[i]),
            active_1d=bool(self.active_1d[i]),
            active_7d=bool(self.active_7d[i]),
            active_28d=bool(self.active_28d[i]),
            embedding=self.embedding[i],
            segment=int(self.segment[i]),
        )

    def feature_matrix(self) -> np.ndarray:
        """(n, 14 + d) matrix in fixed order: structured then embedding."""
        if self._features is None:
            n = len(self)
            age = np.zeros((n, N_AGE_BINS))
            age[np.arange(n), self.age_bin] = 1.0
            cols = [self.gender_male.astype(np.float64)]
            cols.append(age)
            cols.extend(a.astype(np.float64) for a in (
                self.os_ios, self.lang_english, self.loc_america,
                self.friend_count, self.active_1d, self.active_7d, self.active_28d))
            self._features = np.column_stack(cols + [self.embedding])
        return self._features

    def feature_names(self) -> list[str]:
        return list(STRUCTURED_FEATURES) + [f"embedding_{j:02d}" for j in range(self.d)]

    def feature_kinds(self) -> list[str]:
        return ["structured"] * N_STRUCTURED + ["embedding"] * self.d

    def to_csv(self, path) -> None:
        cols = list(STRUCTURED_FEATURES) + [f"e{j}" for j in range(self.d)]
        df = pd.DataFrame(self.feature_matrix(), columns=cols)
        df.insert(0, "user_id", self.user_ids)
        df.to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path) -> "Population":
        df = pd.read_csv(path)
        n = len(df)
        age_cols = df[list(AGE_BIN_FEATURES)].to_numpy()
        emb_cols = [c for c in df.columns if c.startswith("e") and c[1:].isdigit()]
        return cls(
            user_ids=df["user_id"].to_numpy(dtype=np.uint64),
            gender_male=df["gender_male"].to_numpy(dtype=bool),
            age_bin=np.argmax(age_cols, axis=1).astype(np.int8),
            os_ios=df["os_ios"].to_numpy(dtype=bool),
            lang_english=df["lang_english"].to_numpy(dtype=bool),
            loc_america=df["loc_america"].to_numpy(dtype=bool),
            friend_count=df["friend_count"].to_numpy(dtype=np.int64),
            active_1d=df["active_1d"].to_numpy(dtype=bool),
            active_7d=df["active_7d"].to_numpy(dtype=bool),
            active_28d=df["active_28d"].to_numpy(dtype=bool),
            embedding=df[emb_cols].to_numpy(dtype=np.float64),
            segment=np.full(n, -1, dtype=np.int8),
        )


def generate_population(config: PopulationConfig) -> Population:
    """Draw the full population; bit-identical for identical (config, seed)."""
    rng = np.random.default_rng(config.seed)
    n = config.n_users
    weights = np.array([s.weight for s in config.segments])
    segment = rng.choice(config.n_segments, size=n, p=weights).astype(np.int8)

    def per_seg(attr):
        return np.array([getattr(s, attr) for s in config.segments])

    gender = rng.random(n) < per_seg("gender_male_p")[segment]
    age_cum = np.cumsum([s.age_probs for s in config.segments], axis=1)
    age_bin = (rng.random(n)[:, None] > age_cum[segment]).sum(axis=1)
    age_bin = np.minimum(age_bin, N_AGE_BINS - 1).astype(np.int8)
    os_ios = rng.random(n) < per_seg("os_ios_p")[segment]
    lang = rng.random(n) < per_seg("lang_english_p")[segment]
    loc = rng.random(n) < per_seg("loc_america_p")[segment]
    friends = np.maximum(
        0,
        np.floor(rng.lognormal(per_seg("friend_log_mu")[segment],
                               per_seg("friend_log_sd")[segment]))).astype(np.int64)
    a28 = rng.random(n) < per_seg("active_28d_p")[segment]
    a7 = a28 & (rng.random(n) < per_seg("active_7d_given_28d")[segment])
    a1 = a7 & (rng.random(n) < per_seg("active_1d_given_7d")[segment])

    means = np.stack([config.segment_embedding_mean(s) for s in range(config.n_segments)])
    embedding = rng.standard_normal((n, config.d)) * config.embedding_sd + means[segment]

    user_ids = (np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_ID_STRIDE)
                + np.uint64(config.seed & ((1 << 64) - 1)))
    return Population(user_ids, gender, age_bin, os_ios, lang, loc, friends,
                      a1, a7, a28, embedding, segment)


def response_logits(model: ResponseModel, embedding: np.ndarray,
                    creative_vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    creative_vec = np.asarray(creative_vec, dtype=np.float64)
    if creative_vec.shape[-1] != model.d:
        raise ValueError(
            f"creative_vec has dim {creative_vec.shape[-1]}, model expects {model.d}")
    click = model.click_bias + embedding @ (model.click_weight * creative_vec)
    conv = model.conv_bias + embedding @ (model.conv_weight * creative_vec)
    return click, conv


def response_probs(model: ResponseModel, user: UserProfile,
                   creative_vec: np.ndarray) -> tuple[float, float]:
    """Latent (p_click, p_conv) for one user facing one creative."""
    click, conv = response_logits(model, user.embedding, creative_vec)
    return float(_sigmoid(click)), float(_sigmoid(conv))


def response_probs_batch(model: ResponseModel, population: Population,
                         creative_vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    click, conv = response_logits(model, population.embedding, creative_vec)
    return _sigmoid(click), _sigmoid(conv)


def organic_conversion(model: ResponseModel, user: UserProfile, rng) -> bool:
    """One Bernoulli(organic_rate) draw, independent of any ad exposure."""
    return bool(rng.random() < model.organic_rate)


def organic_events(model: ResponseModel, n_users: int, horizon_slots: int,
                   rng) -> tuple[np.ndarray, np.ndarray]:
    """All (user_index, slot) organic conversion events over the horizon."""
    draws = rng.random((n_users, horizon_slots)) < model.organic_rate
    users, slots = np.nonzero(draws)
    return users.astype(np.int64), slots.astype(np.int64)
