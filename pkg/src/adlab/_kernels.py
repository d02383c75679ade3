"""Hot numeric kernels: hash mixing and per-slot auction resolution.

Each kernel has a numba @njit implementation and a pure-numpy one. The jitted
path is used whenever numba imports cleanly; set ADLAB_NUMBA=0 to force the
numpy path. Both paths are bit-identical (same float op order), which
tests/test_kernels.py asserts and benchmarks/bench_kernels.py times.
"""

from __future__ import annotations

import os

import numpy as np

_U64 = np.uint64
_MASK64 = (1 << 64) - 1

# MurmurHash3 x64_128 constants, specialized to one 16-byte block
# (user_id || salt).
_C1 = 0x87C37B91114253D5
_C2 = 0x4CF5AD432745937F
_FMIX1 = 0xFF51AFD7ED558CCD
_FMIX2 = 0xC4CEB9FE1A85EC53


def _env_wants_numpy() -> bool:
    return os.environ.get("ADLAB_NUMBA", "1").strip().lower() in ("0", "false", "off")


# ---------------------------------------------------------------------------
# Hash mixing
# ---------------------------------------------------------------------------

def hash_mix64_scalar(user_id: int, salt: int) -> int:
    """Python-int reference of the murmur-style 64-bit mix, exact per bit."""
    def rotl(x, r):
        return ((x << r) | (x >> (64 - r))) & _MASK64

    def fmix(k):
        k ^= k >> 33
        k = (k * _FMIX1) & _MASK64
        k ^= k >> 33
        k = (k * _FMIX2) & _MASK64
        k ^= k >> 33
        return k

    k1 = user_id & _MASK64
    k2 = salt & _MASK64
    k1 = rotl((k1 * _C1) & _MASK64, 31)
    k1 = (k1 * _C2) & _MASK64
    h1 = k1
    h1 = rotl(h1, 27)
    h1 = (h1 * 5 + 0x52DCE729) & _MASK64
    k2 = rotl((k2 * _C2) & _MASK64, 33)
    k2 = (k2 * _C1) & _MASK64
    h2 = rotl(k2, 31)
    h2 = (h2 + h1) & _MASK64
    h2 = (h2 * 5 + 0x38495AB5) & _MASK64
    h1 ^= 16
    h2 ^= 16
    h1 = (h1 + h2) & _MASK64
    h2 = (h2 + h1) & _MASK64
    h1 = fmix(h1)
    h2 = fmix(h2)
    return (h1 + h2) & _MASK64


def hash_mix64_np(user_ids: np.ndarray, salt: int) -> np.ndarray:
    """Vectorized mix over a uint64 array (wrapping uint64 arithmetic)."""
    def rotl(x, r):
        r = _U64(r)
        return (x << r) | (x >> (_U64(64) - r))

    def fmix(k):
        k = k ^ (k >> _U64(33))
        k = k * _U64(_FMIX1)
        k = k ^ (k >> _U64(33))
        k = k * _U64(_FMIX2)
        k = k ^ (k >> _U64(33))
        return k

    k1 = np.ascontiguousarray(user_ids, dtype=np.uint64)
    k2 = np.full_like(k1, _U64(salt & _MASK64))
    k1 = rotl(k1 * _U64(_C1), 31) * _U64(_C2)
    h1 = k1.copy()
    h1 = rotl(h1, 27)
    h1 = h1 * _U64(5) + _U64(0x52DCE729)
    k2 = rotl(k2 * _U64(_C2), 33) * _U64(_C1)
    h2 = k2
    h2 = rotl(h2, 31) + h1
    h2 = h2 * _U64(5) + _U64(0x38495AB5)
    h1 = h1 ^ _U64(16)
    h2 = h2 ^ _U64(16)
    h1 = h1 + h2
    h2 = h2 + h1
    h1 = fmix(h1)
    h2 = fmix(h2)
    return h1 + h2


# ---------------------------------------------------------------------------
# Slot resolution: auction winner, display suppression, budget accounting
# ---------------------------------------------------------------------------
# Per slot with n opportunities and k focal campaigns:
#   values      (n, k)  paced bid x relevance per candidate
#   eligible    (n, k)  audience/assignment/placement/schedule/freq gate
#   displayable (n, k)  eligible AND allowed to actually be shown
#   bg_value    (n,)    max total value among background pool ads (-inf if none)
#   spend, budget, price (k,)
# Returns:
#   won   (n,) pre-suppression auction winner: column, -1 background, -2 none
#   shown (n,) displayed ad after suppression:  column, -1 background, -2 none
#   spend_out (k,) spend after charging shown focal impressions
#
# Sequential contract: opportunities resolve in order, and a campaign enters
# an auction only while its spend is under budget, so overspend is bounded by
# one impression price. Suppressed (ghost) wins are never charged.

def resolve_slot_np(values, eligible, displayable, bg_value, spend, budget, price):
    n, k = values.shape
    won = np.full(n, -2, dtype=np.int64)
    shown = np.full(n, -2, dtype=np.int64)
    spend_out = np.asarray(spend, dtype=np.float64).copy()
    budget = np.asarray(budget, dtype=np.float64)
    price = np.asarray(price, dtype=np.float64)
    active = spend_out < budget
    start = 0
    # Epochs: within an epoch the candidate set is constant; the epoch ends
    # right after the first win that pushes some campaign over budget.
    while start < n:
        m = n - start
        sl = slice(start, n)
        rows = np.arange(m)
        mask = eligible[sl] & active[np.newaxis, :]
        vals = np.where(mask, values[sl], -np.inf)
        bf = np.argmax(vals, axis=1)  # first max -> smallest campaign_id wins ties
        bf_v = vals[rows, bf]
        bg = bg_value[sl]
        has_bg = bg > -np.inf
        w = np.where((bf_v > -np.inf) & (bf_v >= bg), bf, np.where(has_bg, -1, -2))

        dmask = displayable[sl] & active[np.newaxis, :]
        dvals = np.where(dmask, values[sl], -np.inf)
        df = np.argmax(dvals, axis=1)
        df_v = dvals[rows, df]
        s = np.where((df_v > -np.inf) & (df_v >= bg), df, np.where(has_bg, -1, -2))

        # The j-th displayed win of campaign c is allowed iff spend before it
        # is under budget; the campaign exits right after the win that crosses
        # it. cumsum replicates the sequential spend += price accumulation.
        cut = m
        cut_c = -1
        win_info = {}
        for c in range(k):
            if not active[c]:
                continue
            at = np.nonzero(s == c)[0]
            if at.size == 0:
                continue
            cum = np.cumsum(np.concatenate(([spend_out[c]], np.full(at.size, price[c]))))
            win_info[c] = (at, cum)
            over = np.nonzero(cum[1:] >= budget[c])[0]
            if over.size:
                exit_pos = at[over[0]] + 1  # crossing win itself is still shown
                if exit_pos < cut:
                    cut = exit_pos
                    cut_c = c
        won[start:start + cut] = w[:cut]
        shown[start:start + cut] = s[:cut]
        for c, (at, cum) in win_info.items():
            n_wins = int(np.searchsorted(at, cut))
            spend_out[c] = cum[n_wins]
        if cut_c < 0:
            break
        active[cut_c] = False
        start += cut
    return won, shown, spend_out


def _resolve_slot_seq(values, eligible, displayable, bg_value, spend, budget,
                      price, won, shown, spend_out):
    n, k = values.shape
    for c in range(k):
        spend_out[c] = spend[c]
    for i in range(n):
        bg = bg_value[i]
        bf = -1
        bf_v = -np.inf
        df = -1
        df_v = -np.inf
        for c in range(k):
            if spend_out[c] >= budget[c] or not eligible[i, c]:
                continue
            v = values[i, c]
            if v > bf_v:
                bf = c
                bf_v = v
            if displayable[i, c] and v > df_v:
                df = c
                df_v = v
        if bf >= 0 and bf_v >= bg:
            won[i] = bf
        elif bg > -np.inf:
            won[i] = -1
        else:
            won[i] = -2
        if df >= 0 and df_v >= bg:
            shown[i] = df
            spend_out[df] = spend_out[df] + price[df]
        elif bg > -np.inf:
            shown[i] = -1
        else:
            shown[i] = -2


def _make_resolver(seq_loop):
    def run(values, eligible, displayable, bg_value, spend, budget, price):
        n = values.shape[0]
        won = np.full(n, -2, dtype=np.int64)
        shown = np.full(n, -2, dtype=np.int64)
        spend_out = np.empty(len(spend), dtype=np.float64)
        seq_loop(np.ascontiguousarray(values, dtype=np.float64),
                 np.ascontiguousarray(eligible),
                 np.ascontiguousarray(displayable),
                 np.ascontiguousarray(bg_value, dtype=np.float64),
                 np.asarray(spend, dtype=np.float64),
                 np.asarray(budget, dtype=np.float64),
                 np.asarray(price, dtype=np.float64),
                 won, shown, spend_out)
        return won, shown, spend_out
    return run


HAS_NUMBA = False
hash_mix64_nb = None
resolve_slot_nb = None

try:
    from numba import njit, uint64

    HAS_NUMBA = True

    @njit(cache=True)
    def _hash_mix64_loop(user_ids, salt, out):  # pragma: no cover - jitted
        c1 = uint64(_C1)
        c2 = uint64(_C2)
        f1 = uint64(_FMIX1)
        f2 = uint64(_FMIX2)
        for i in range(user_ids.shape[0]):
            k1 = user_ids[i]
            k2 = salt
            k1 = k1 * c1
            k1 = (k1 << uint64(31)) | (k1 >> uint64(33))
            k1 = k1 * c2
            h1 = k1
            h1 = (h1 << uint64(27)) | (h1 >> uint64(37))
            h1 = h1 * uint64(5) + uint64(0x52DCE729)
            k2 = k2 * c2
            k2 = (k2 << uint64(33)) | (k2 >> uint64(31))
            k2 = k2 * c1
            h2 = k2
            h2 = (h2 << uint64(31)) | (h2 >> uint64(33))
            h2 = h2 + h1
            h2 = h2 * uint64(5) + uint64(0x38495AB5)
            h1 = h1 ^ uint64(16)
            h2 = h2 ^ uint64(16)
            h1 = h1 + h2
            h2 = h2 + h1
            h1 = h1 ^ (h1 >> uint64(33))
            h1 = h1 * f1
            h1 = h1 ^ (h1 >> uint64(33))
            h1 = h1 * f2
            h1 = h1 ^ (h1 >> uint64(33))
            h2 = h2 ^ (h2 >> uint64(33))
            h2 = h2 * f1
            h2 = h2 ^ (h2 >> uint64(33))
            h2 = h2 * f2
            h2 = h2 ^ (h2 >> uint64(33))
            out[i] = h1 + h2

    def hash_mix64_nb(user_ids: np.ndarray, salt: int) -> np.ndarray:
        arr = np.ascontiguousarray(user_ids, dtype=np.uint64)
        out = np.empty_like(arr)
        _hash_mix64_loop(arr, _U64(salt & _MASK64), out)
        return out

    _resolve_slot_seq_nb = njit(cache=True)(_resolve_slot_seq)
    resolve_slot_nb = _make_resolver(_resolve_slot_seq_nb)
except ImportError:  # pragma: no cover - numba always present in CI image
    pass

resolve_slot_py = _make_resolver(_resolve_slot_seq)

USING_NUMBA = HAS_NUMBA and not _env_wants_numpy()

if USING_NUMBA:
    hash_mix64 = hash_mix64_nb
    resolve_slot = resolve_slot_nb
else:
    hash_mix64 = hash_mix64_np
    resolve_slot = resolve_slot_np
