"""Audience-balance diagnostics: t-tests, SMDs, p-value uniformity, gates.

All statistics are computed from explicit formulas here; scipy supplies only
low-level distribution functions (Student-t CDF, modified Bessel K). The
uniformity tests treat the pooled balance p-values as a sample that should be
Uniform[0,1] under valid randomization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import gammaln, kv, stdtr

from .population import OBSERVABLE_FEATURES

SMD_THRESHOLD = 0.20
SIG_T = 1.965  # two-tailed |t| cutoff used by the observable/unobservable gate
GATE_MAX_T = 1.5


# ---------------------------------------------------------------------------
# Scalar statistics
# ---------------------------------------------------------------------------

def _welch_from_stats(mean_a, var_a, n_a, mean_b, var_b, n_b):
    """Welch statistic + two-sided p from per-group summary statistics."""
    se2_a = var_a / n_a
    se2_b = var_b / n_b
    denom = se2_a + se2_b
    diff = mean_a - mean_b
    if denom == 0.0:
        if diff == 0.0:
            return 0.0, 1.0  # both groups constant and equal
        return math.copysign(math.inf, diff), 0.0
    t = diff / math.sqrt(denom)
    df = denom ** 2 / (se2_a ** 2 / (n_a - 1) + se2_b ** 2 / (n_b - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, p


def welch_t(group_a, group_b) -> tuple[float, float]:
    """Welch two-sample t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("welch_t needs at least two observations per group")
    return _welch_from_stats(a.mean(), a.var(ddof=1), len(a),
                             b.mean(), b.var(ddof=1), len(b))


def _smd_from_stats(mean_a, var_a, n_a, mean_b, var_b, n_b):
    pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / (n_a + n_b - 2)
    if pooled <= 0.0:
        return 0.0, True
    return (mean_a - mean_b) / math.sqrt(pooled), False


def smd(group_a, group_b) -> float:
    """Standardized mean difference with the pooled-sd denominator.

    Sign is mean_a - mean_b (test minus control). Returns 0 when the pooled
    variance is degenerate.
    """
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("smd needs at least two observations per group")
    value, _ = _smd_from_stats(a.mean(), a.var(ddof=1), len(a),
                               b.mean(), b.var(ddof=1), len(b))
    return value


def two_proportion_test(x_a: int, n_a: int, x_b: int, n_b: int) -> tuple[float, float]:
    """Pooled two-proportion z-test; returns (z, two-sided p)."""
    if min(n_a, n_b) <= 0:
        raise ValueError("need positive trial counts")
    p_a, p_b = x_a / n_a, x_b / n_b
    pooled = (x_a + x_b) / (n_a + n_b)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n_a + 1 / n_b))
    if se == 0.0:
        return 0.0, 1.0
    z = (p_a - p_b) / se
    p = 2.0 * float(stdtr(np.inf, -abs(z)))
    return z, p


# ---------------------------------------------------------------------------
# Uniformity tests
# ---------------------------------------------------------------------------

def _kolmogorov_sf(x: float) -> float:
    """Asymptotic Kolmogorov survival function (own series, two branches)."""
    if x <= 0.0:
        return 1.0
    if x < 1.0:
        # Jacobi-theta form of the CDF, accurate for small x.
        w = math.pi * math.pi / (8.0 * x * x)
        total = 0.0
        k = 1
        while k < 2000:
            term = math.exp(-k * k * w)
            total += term
            if term < 1e-18 * max(total, 1e-300):
                break
            k += 2
        return 1.0 - math.sqrt(2.0 * math.pi) / x * total
    total = 0.0
    sign = 1.0
    for k in range(1, 200):
        term = sign * math.exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-18:
            break
        sign = -sign
    return max(0.0, min(1.0, 2.0 * total))


def _ks_cdf_exact(n: int, d: float) -> float:
    """Exact P(D_n < d) by the Marsaglia-Tsang-Wang matrix recursion."""
    if d <= 0.0:
        return 0.0
    if d >= 1.0:
        return 1.0
    k = int(math.ceil(n * d))
    h = k - n * d
    m = 2 * k - 1
    H = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i - j + 1 >= 0:
                H[i, j] = 1.0
    for i in range(m):
        H[i, 0] -= h ** (i + 1)
        H[m - 1, i] -= h ** (m - i)
    if 2.0 * h - 1.0 > 0.0:
        H[m - 1, 0] += (2.0 * h - 1.0) ** m
    for i in range(m):
        for j in range(m):
            if i - j + 1 > 0:
                H[i, j] /= math.factorial(i - j + 1)

    # H^n by binary exponentiation with overflow rescaling.
    def scaled(mat, exp):
        mx = mat.max()
        if mx > 1e140:
            return mat / 1e140, exp + 140
        return mat, exp

    result = np.eye(m)
    r_exp = 0
    base = H.copy()
    b_exp = 0
    e = n
    while e > 0:
        if e & 1:
            result = result @ base
            r_exp += b_exp
            result, r_exp = scaled(result, r_exp)
        base = base @ base
        b_exp *= 2
        base, b_exp = scaled(base, b_exp)
        e >>= 1

    s = result[k - 1, k - 1]
    for i in range(1, n + 1):
        s = s * i / n
        if s < 1e-140:
            s *= 1e140
            r_exp -= 140
    return float(min(1.0, max(0.0, s * 10.0 ** r_exp)))


def ks_uniform(pvals) -> tuple[float, float]:
    """One-sample KS test of Uniform[0,1]: D = sup |ECDF(x) - x|.

    Exact p for n <= 100, asymptotic Kolmogorov distribution otherwise.
    """
    x = np.sort(np.asarray(pvals, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("ks_uniform needs at least one value")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - x)
    d_minus = np.max(x - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    if n <= 100:
        p = 1.0 - _ks_cdf_exact(n, d)
    else:
        p = _kolmogorov_sf(math.sqrt(n) * d)
    return d, float(min(1.0, max(0.0, p)))


def _cvm_inf_cdf(x: float) -> float:
    """Asymptotic CvM distribution V(x) via the standard Bessel-K series."""
    if x <= 0.0:
        return 0.0
    if x > 10.0:
        return 1.0
    total = 0.0
    k = 0
    while k < 5000:
        y = 4.0 * k + 1.0
        q = y * y / (16.0 * x)
        term = (math.exp(gammaln(k + 0.5) - gammaln(k + 1.0))
                / (math.pi ** 1.5 * math.sqrt(x))
                * math.sqrt(y) * math.exp(-q) * float(kv(0.25, q)))
        total += term
        if abs(term) < 1e-10 and k > 2:
            break
        k += 1
    return total


def cvm_uniform(pvals) -> tuple[float, float]:
    """Cramer-von Mises test of Uniform[0,1]; asymptotic-series p-value."""
    x = np.sort(np.asarray(pvals, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("cvm_uniform needs at least one value")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    omega = 1.0 / (12.0 * n) + np.sum((x - (2.0 * i - 1.0) / (2.0 * n)) ** 2)
    p = 1.0 - _cvm_inf_cdf(float(omega))
    return float(omega), float(min(1.0, max(0.0, p)))


# ---------------------------------------------------------------------------
# Balance reports
# ---------------------------------------------------------------------------

@dataclass
class BalanceStat:
    feature_id: str
    kind: str  # "structured" | "embedding"
    mean_test: float
    mean_control: float
    s_test: float
    s_control: float
    n_test: int
    n_control: int
    t: float
    p: float
    smd: float


@dataclass
class FeatureMatrix:
    """Impressed observations: rows are users (lift) or impressions (A/B)."""

    values: np.ndarray          # (n, 14 + d)
    labels: np.ndarray          # group/cell label per row
    feature_names: list[str]
    feature_kinds: list[str]

    @classmethod
    def from_population(cls, population, row_user_indices, labels) -> "FeatureMatrix":
        feats = population.feature_matrix()
        return cls(values=feats[np.asarray(row_user_indices, dtype=np.int64)],
                   labels=np.asarray(labels),
                   feature_names=population.feature_names(),
                   feature_kinds=population.feature_kinds())

    def groups(self):
        return sorted(set(self.labels.tolist()))


@dataclass
class BalanceReport:
    group_a: object
    group_b: object
    stats: list[BalanceStat]
    excluded: list[tuple[str, str]]  # (feature_id, reason)


def balance_report(matrix: FeatureMatrix, group_pair) -> BalanceReport:
    """Per-feature Welch t, p and SMD between the two labelled groups.

    Columns constant across both groups carry no balance information and are
    omitted with reason code "constant".
    """
    ga, gb = group_pair
    rows_a = matrix.values[matrix.labels == ga]
    rows_b = matrix.values[matrix.labels == gb]
    if len(rows_a) < 2 or len(rows_b) < 2:
        raise ValueError(f"groups {group_pair} need >= 2 rows each "
                         f"(got {len(rows_a)}, {len(rows_b)})")
    mean_a = rows_a.mean(axis=0)
    mean_b = rows_b.mean(axis=0)
    var_a = rows_a.var(axis=0, ddof=1)
    var_b = rows_b.var(axis=0, ddof=1)
    n_a, n_b = len(rows_a), len(rows_b)

    stats: list[BalanceStat] = []
    excluded: list[tuple[str, str]] = []
    for j, name in enumerate(matrix.feature_names):
        if var_a[j] == 0.0 and var_b[j] == 0.0 and mean_a[j] == mean_b[j]:
            excluded.append((name, "constant"))
            continue
        t, p = _welch_from_stats(mean_a[j], var_a[j], n_a, mean_b[j], var_b[j], n_b)
        d, _ = _smd_from_stats(mean_a[j], var_a[j], n_a, mean_b[j], var_b[j], n_b)
        stats.append(BalanceStat(
            feature_id=name, kind=matrix.feature_kinds[j],
            mean_test=float(mean_a[j]), mean_control=float(mean_b[j]),
            s_test=float(math.sqrt(var_a[j])), s_control=float(math.sqrt(var_b[j])),
            n_test=n_a, n_control=n_b, t=float(t), p=float(p), smd=float(d)))
    return BalanceReport(group_a=ga, group_b=gb, stats=stats, excluded=excluded)


@dataclass
class UniformitySummary:
    n: int
    ks_D: float
    ks_p: float
    cvm_omega: float
    cvm_p: float
    frac_p_below_05: float
    frac_abs_smd_above_020: float

    def as_dict(self) -> dict:
        return {
            "N": self.n,
            "KS D": self.ks_D,
            "KS p": self.ks_p,
            "CvM Omega": self.cvm_omega,
            "CvM p": self.cvm_p,
            "% p<=0.05": 100.0 * self.frac_p_below_05,
            "% |SMD|>0.20": 100.0 * self.frac_abs_smd_above_020,
        }


def summarize(stats) -> dict[str, UniformitySummary]:
    """Pooled uniformity + exceedance summaries, by feature kind and overall."""
    stats = list(stats)
    if not stats:
        raise ValueError("summarize needs at least one BalanceStat")

    def summary_of(sub):
        pvals = np.array([s.p for s in sub])
        smds = np.array([s.smd for s in sub])
        ks_d, ks_p = ks_uniform(pvals)
        om, cvm_p = cvm_uniform(pvals)
        return UniformitySummary(
            n=len(sub), ks_D=ks_d, ks_p=ks_p, cvm_omega=om, cvm_p=cvm_p,
            frac_p_below_05=float(np.mean(pvals <= 0.05)),
            frac_abs_smd_above_020=float(np.mean(np.abs(smds) > SMD_THRESHOLD)))

    out = {"overall": summary_of(stats)}
    for kind in ("structured", "embedding"):
        sub = [s for s in stats if s.kind == kind]
        if sub:
            out[kind] = summary_of(sub)
    return out


# ---------------------------------------------------------------------------
# Observable -> unobservable gate
# ---------------------------------------------------------------------------

@dataclass
class GateResult:
    max_t_obs: float
    frac_unobs_sig: float
    passed: bool


def observable_gate(report) -> GateResult:
    """Max |t| over gender+age vs the significant fraction among the rest.

    The gate passes when no advertiser-observable t-statistic exceeds 1.5.
    """
    stats = report.stats if isinstance(report, BalanceReport) else list(report)
    obs = [s for s in stats if s.feature_id in OBSERVABLE_FEATURES]
    rest = [s for s in stats if s.feature_id not in OBSERVABLE_FEATURES]
    present = {s.feature_id for s in obs}
    missing = [f for f in OBSERVABLE_FEATURES if f not in present]
    if missing:
        raise ValueError(f"report is missing observable features: {missing}")
    if not rest:
        raise ValueError("report has no unobservable features")
    max_t = max(abs(s.t) for s in obs)
    frac = float(np.mean([abs(s.t) > SIG_T for s in rest]))
    return GateResult(max_t_obs=float(max_t), frac_unobs_sig=frac,
                      passed=max_t <= GATE_MAX_T)


def binned_gate_curve(tests, n_bins: int) -> pd.DataFrame:
    """Equal-width bins over max_t_obs; per-bin mean frac with normal 95% CI.

    Bins holding fewer than two tests get NaN confidence bounds.
    """
    pts = [(float(a), float(b)) for a, b in tests]
    if len(pts) < n_bins:
        raise ValueError(f"need at least {n_bins} tests, got {len(pts)}")
    xs = np.array([a for a, _ in pts])
    ys = np.array([b for _, b in pts])
    edges = np.linspace(xs.min(), xs.max(), n_bins + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf)
    which = np.clip(np.digitize(xs, edges) - 1, 0, n_bins - 1)
    rows = []
    for b in range(n_bins):
        sel = ys[which == b]
        n = len(sel)
        mean = float(sel.mean()) if n else np.nan
        if n >= 2:
            half = 1.96 * sel.std(ddof=1) / math.sqrt(n)
            ci_lo, ci_hi = mean - half, mean + half
        else:
            ci_lo = ci_hi = np.nan
        rows.append({"bin_lo": edges[b], "bin_hi": min(edges[b + 1], xs.max()),
                     "bin_center": 0.5 * (edges[b] + min(edges[b + 1], xs.max())),
                     "n_tests": n, "mean_frac_sig": mean,
                     "ci_lo": ci_lo, "ci_hi": ci_hi})
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# File outputs
# ---------------------------------------------------------------------------

def balance_stats_frame(entries) -> pd.DataFrame:
    """Rows of (test_id, cell_pair, BalanceStat) flattened for balance_stats.csv."""
    rows = []
    for test_id, cell_pair, stat in entries:
        rows.append({
            "test_id": test_id, "cell_pair": cell_pair,
            "feature_id": stat.feature_id, "kind": stat.kind,
            "mean_a": stat.mean_test, "mean_b": stat.mean_control,
            "t": stat.t, "p": stat.p, "smd": stat.smd,
        })
    return pd.DataFrame(rows, columns=["test_id", "cell_pair", "feature_id",
                                       "kind", "mean_a", "mean_b", "t", "p", "smd"])
