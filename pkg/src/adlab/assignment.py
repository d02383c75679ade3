"""Salted-hash randomization of users into experimental conditions.

Per test: a random 64-bit salt, a murmur-style mix of (user_id, salt), a
modulus by a large prime, then bucketing. Buckets map to conditions through
contiguous ranges sized by the allocation proportions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import hash_mix64, hash_mix64_scalar

DEFAULT_N_BUCKETS = 10_000
DEFAULT_PRIME = (1 << 31) - 1  # Mersenne prime 2^31 - 1


def new_salt(rng) -> int:
    """Fresh uniformly random 64-bit test salt."""
    return int(rng.integers(0, 1 << 64, dtype=np.uint64))


def hash_user(user_id: int, salt: int) -> int:
    """Deterministic 64-bit hash of (user_id, salt); avalanche-quality mix."""
    return hash_mix64_scalar(int(user_id), int(salt))


def hash_users(user_ids: np.ndarray, salt: int) -> np.ndarray:
    return hash_mix64(np.asarray(user_ids, dtype=np.uint64), int(salt))


@dataclass(frozen=True)
class AllocationPlan:
    """Ordered conditions with proportions mapped onto contiguous buckets."""

    conditions: tuple[tuple[str, float], ...]
    n_buckets: int = DEFAULT_N_BUCKETS
    prime: int = DEFAULT_PRIME
    _bounds: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("allocation plan needs at least one condition")
        if self.n_buckets < len(self.conditions):
            raise ValueError("need at least one bucket per condition")
        props = np.array([p for _, p in self.conditions], dtype=np.float64)
        if np.any(props < 0):
            raise ValueError("proportions must be nonnegative")
        if abs(props.sum() - 1.0) > 1e-9:
            raise ValueError(f"proportions sum to {props.sum()}, expected 1")
        # Whole-bucket rounding; the remainder lands on the last condition.
        counts = np.floor(props * self.n_buckets).astype(np.int64)
        counts[-1] = self.n_buckets - counts[:-1].sum()
        object.__setattr__(self, "_bounds", np.cumsum(counts))

    @property
    def condition_ids(self) -> list[str]:
        return [c for c, _ in self.conditions]

    def bucket_counts(self) -> np.ndarray:
        return np.diff(self._bounds, prepend=0)

    def condition_of_bucket(self, bucket: np.ndarray | int):
        return np.searchsorted(self._bounds, bucket, side="right")


def bucket_of(user_ids: np.ndarray, salt: int, plan: AllocationPlan) -> np.ndarray:
    h = hash_users(user_ids, salt)
    return ((h % np.uint64(plan.prime)) % np.uint64(plan.n_buckets)).astype(np.int64)


def assign_indices(user_ids: np.ndarray, salt: int, plan: AllocationPlan) -> np.ndarray:
    """Condition index per user (vectorized)."""
    return plan.condition_of_bucket(bucket_of(user_ids, salt, plan)).astype(np.int64)


def assign(user_id: int, salt: int, plan: AllocationPlan) -> str:
    """Condition id owning the user's bucket under this salt."""
    bucket = (hash_user(user_id, salt) % plan.prime) % plan.n_buckets
    return plan.condition_ids[int(plan.condition_of_bucket(bucket))]
