"""White-noise diagnostics: moment statistics, normality tests, ACF norms,
and simulated critical-value tables for them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

ACF_LAGS = 5
_MC_BATCH = 20_000

SW_MIN_N = 8
SW_MAX_N = 5000


class StatisticError(ValueError):
    """A statistic is undefined for the given sample."""


@dataclass(frozen=True)
class DiagnosticsReport:
    """Summary row for one residual or return series."""

    n: int
    stdev: float
    skew: float
    kurt: float
    sw_p: Optional[float]
    jb_p: float
    l1_original: float
    l1_absolute: Optional[float]


@dataclass(frozen=True)
class CriticalValueTable:
    """Simulated null quantiles for Gaussian white noise of a given size."""

    n: int
    level: float
    skew_crit: float
    kurt_crit: float
    l1_crit: float
    replications: int


def moment_stats(x: np.ndarray) -> tuple[float, float]:
    """Skewness and excess kurtosis from population (divisor-N) moments."""
    x = np.asarray(x, dtype=float)
    if len(x) < 3:
        raise StatisticError("moment statistics need at least 3 observations")
    xc = x - x.mean()
    m2 = np.mean(xc**2)
    if m2 == 0:
        raise StatisticError("skewness and kurtosis undefined for zero-variance sample")
    skew = float(np.mean(xc**3) / m2**1.5)
    kurt = float(np.mean(xc**4) / m2**2 - 3.0)
    return skew, kurt


def acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelations at lags ``1..max_lag``.

    Normalization uses the divisor-N variance of the full sample, so the
    lag-0 value is exactly 1 for any non-constant series.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n <= max_lag:
        raise StatisticError(f"need more than {max_lag} observations for {max_lag} lags")
    xc = x - x.mean()
    denom = n * np.mean(xc**2)
    if denom == 0:
        raise StatisticError("autocorrelation undefined for zero-variance sample")
    return np.array([np.sum(xc[: n - k] * xc[k:]) / denom for k in range(1, max_lag + 1)])


def acf_l1(x: np.ndarray, max_lag: int = ACF_LAGS) -> tuple[float, Optional[float]]:
    """L1 norms of the first ``max_lag`` autocorrelations of x and of |x|.

    The absolute-value variant is None when |x| is constant (for example
    an alternating-sign series of fixed magnitude).
    """
    l1_original = float(np.sum(np.abs(acf(x, max_lag))))
    abs_x = np.abs(np.asarray(x, dtype=float))
    if np.ptp(abs_x) == 0:
        return l1_original, None
    l1_absolute = float(np.sum(np.abs(acf(abs_x, max_lag))))
    return l1_original, l1_absolute


def jarque_bera(x: np.ndarray) -> tuple[float, float]:
    """JB statistic and its chi-square(2) p-value."""
    x = np.asarray(x, dtype=float)
    if len(x) < 4:
        raise StatisticError("Jarque-Bera needs at least 4 observations")
    skew, kurt = moment_stats(x)
    stat = len(x) / 6.0 * (skew**2 + kurt**2 / 4.0)
    return float(stat), float(stats.chi2.sf(stat, 2))


def normality_tests(x: np.ndarray) -> tuple[Optional[float], float]:
    """Shapiro-Wilk and Jarque-Bera p-values.

    Shapiro-Wilk (Royston's approximation, via scipy) is only valid for
    sample sizes in ``8..5000``; outside that range its p-value is None
    while Jarque-Bera is still reported.
    """
    x = np.asarray(x, dtype=float)
    _, jb_p = jarque_bera(x)
    if SW_MIN_N <= len(x) <= SW_MAX_N:
        sw_p = float(stats.shapiro(x).pvalue)
    else:
        sw_p = None
    return sw_p, jb_p


def describe(x: np.ndarray) -> DiagnosticsReport:
    """Full diagnostics row for one series."""
    x = np.asarray(x, dtype=float)
    skew, kurt = moment_stats(x)
    sw_p, jb_p = normality_tests(x)
    l1_original, l1_absolute = acf_l1(x)
    return DiagnosticsReport(
        n=len(x),
        stdev=float(np.std(x)),
        skew=skew,
        kurt=kurt,
        sw_p=sw_p,
        jb_p=jb_p,
        l1_original=l1_original,
        l1_absolute=l1_absolute,
    )


def _null_statistics(sample_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row (|skew|, kurt, L1) for a batch of white-noise samples."""
    n = sample_matrix.shape[1]
    xc = sample_matrix - sample_matrix.mean(axis=1, keepdims=True)
    m2 = np.mean(xc**2, axis=1)
    skew = np.mean(xc**3, axis=1) / m2**1.5
    kurt = np.mean(xc**4, axis=1) / m2**2 - 3.0
    l1 = np.zeros(len(sample_matrix))
    for k in range(1, ACF_LAGS + 1):
        l1 += np.abs(np.sum(xc[:, :-k] * xc[:, k:], axis=1) / (n * m2))
    return np.abs(skew), kurt, l1


def mc_critical_values(n: int, level: float, replications: int, seed: int) -> CriticalValueTable:
    """Simulated critical values for skewness, kurtosis, and the ACF L1 norm.

    Samples of ``n`` IID standard normals are drawn ``replications``
    times; the returned values are the empirical ``level`` quantiles
    (order statistic at ``ceil(level * replications)``) of |skewness|,
    excess kurtosis, and the L1 norm of the first five autocorrelations.
    Kurtosis is deliberately one-sided: heavy tails show up as positive
    excess kurtosis, and the two-sided variant would mix in the bounded
    left tail.  Deterministic for a fixed seed; replications are drawn
    in fixed-size batches whose RNG streams are keyed by
    ``(seed, batch_index)``, so the loop could be parallelized without
    changing the result.
    """
    if n < 10:
        raise StatisticError("critical values need a sample size of at least 10")
    if replications < 10_000:
        raise StatisticError("critical values need at least 10000 replications")
    if not 0 < level < 1:
        raise StatisticError("level must be a probability strictly inside (0, 1)")

    skews, kurts, l1s = [], [], []
    n_batches = (replications + _MC_BATCH - 1) // _MC_BATCH
    for batch in range(n_batches):
        size = min(_MC_BATCH, replications - batch * _MC_BATCH)
        rng = np.random.default_rng(np.random.SeedSequence((seed, batch)))
        s, k, l1 = _null_statistics(rng.standard_normal((size, n)))
        skews.append(s)
        kurts.append(k)
        l1s.append(l1)

    rank = int(np.ceil(level * replications)) - 1
    skew_crit, kurt_crit, l1_crit = (
        float(np.sort(np.concatenate(arr))[rank]) for arr in (skews, kurts, l1s)
    )
    return CriticalValueTable(n, level, skew_crit, kurt_crit, l1_crit, replications)


def two_sample_drift(first_half: np.ndarray, second_half: np.ndarray, n_batches: int = 50) -> tuple[float, float]:
    """Mean difference between two halves of a long path and its standard error.

    The standard error of each half-mean is estimated with batch means,
    which stays valid for autocorrelated series as long as a batch is
    much longer than the mixing time.
    """
    def batch_se(x: np.ndarray) -> float:
        usable = (len(x) // n_batches) * n_batches
        means = np.asarray(x[:usable], dtype=float).reshape(n_batches, -1).mean(axis=1)
        return float(np.std(means, ddof=1) / np.sqrt(n_batches))

    diff = float(np.mean(first_half) - np.mean(second_half))
    se = float(np.hypot(batch_se(first_half), batch_se(second_half)))
    return diff, se
