"""Outage statistics: supported rates, empirical outage capacity and the
pilot-overhead-scaled outage rate, plus the accounting for spreading a
fixed budget of channel uses over several coherence intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

__all__ = [
    "supported_rate",
    "rate_samples",
    "outage_capacity",
    "outage_rate",
    "OutageResult",
    "outage_result",
    "bootstrap_halfwidth",
    "split_budget",
    "min_intervals_for_message",
    "preferred_code",
]


def supported_rate(snrs, code) -> float:
    """Average rate supported across coherence intervals:
    (1/L) sum_l (n_sym/block_len) log2(1 + SNR_l)  [bpcu]."""
    snrs = np.asarray(snrs, dtype=float)
    if snrs.size == 0:
        raise ValueError("need at least one SNR sample")
    if np.any(snrs < 0):
        raise ValueError("SNR must be nonnegative")
    scale = code.n_sym / code.block_len
    return float(np.mean(scale * np.log2(1.0 + snrs)))


def rate_samples(snr_matrix, code) -> np.ndarray:
    """Vectorized supported rates for (n_trials, L) SNR draws."""
    scale = code.n_sym / code.block_len
    return np.mean(scale * np.log2(1.0 + np.asarray(snr_matrix, dtype=float)),
                   axis=-1)


def outage_capacity(samples, eps: float) -> float:
    """Empirical eps-outage capacity: the largest rate with fewer than an
    eps fraction of samples strictly below it (lower order statistic at
    index ceil(eps * N)).

    Requires at least ten samples below the quantile; the experiment
    runner enforces the stricter production floor of 100/eps trials.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n * eps < 10.0:
        raise ValueError(
            f"need at least {ceil(10 / eps)} samples to resolve the "
            f"{eps} quantile, got {n}")
    k = ceil(eps * n)  # 1-based order statistic
    return float(np.partition(samples, k - 1)[k - 1])


def outage_rate(c_eps: float, coherence_len: int, pilot_len: int) -> float:
    """Scale the outage capacity by the fraction of the coherence interval
    left for data: R = ((tau_c - tau_p) / tau_c) * C."""
    if pilot_len >= coherence_len:
        raise ValueError("pilots would fill the whole coherence interval")
    return (coherence_len - pilot_len) / coherence_len * c_eps


@dataclass
class OutageResult:
    eps: float
    c_eps: float
    r_eps: float
    n_samples: int
    halfwidth: float  # bootstrap CI half-width, in outage-rate units

    def __post_init__(self):
        assert 0.0 <= self.r_eps <= self.c_eps + 1e-12


def bootstrap_halfwidth(samples, eps: float, rng, n_boot: int = 200) -> float:
    """Percentile-bootstrap half-width of the eps-quantile estimate."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    k = ceil(eps * n) - 1
    rng = np.random.default_rng(rng)
    stats = np.empty(n_boot)
    for b in range(n_boot):
        res = samples[rng.integers(0, n, size=n)]
        stats[b] = np.partition(res, k)[k]
    lo, hi = np.percentile(stats, [2.5, 97.5])
    return 0.5 * float(hi - lo)


def outage_result(samples, eps, coherence_len, pilot_len, rng) -> OutageResult:
    """Quantile, overhead scaling and a bootstrap confidence half-width."""
    c = outage_capacity(samples, eps)
    r = outage_rate(c, coherence_len, pilot_len)
    prelog = (coherence_len - pilot_len) / coherence_len
    hw = prelog * bootstrap_halfwidth(samples, eps, rng)
    return OutageResult(eps, c, r, len(samples), hw)


def split_budget(coherence_len: int, n_intervals: int, n_ports: int):
    """Channel-use accounting when a budget of ``coherence_len`` uses is
    spread over ``n_intervals`` coherence intervals, each paying an
    n_ports-use pilot.  Returns (data_uses, prelog)."""
    data = coherence_len - n_intervals * n_ports
    if data <= 0:
        raise ValueError(
            f"{n_intervals} intervals of {n_ports}-port pilots leave no "
            f"data uses out of {coherence_len}")
    return data, data / coherence_len


def min_intervals_for_message(code, n_bits: float, rates_by_intervals: dict,
                              coherence_len: int) -> int:
    """Smallest interval count L with L * tau_c * R_eps(L) >= n_bits.

    ``rates_by_intervals`` maps L -> outage rate (bpcu).  Raises if the
    message does not fit within the tabulated L values.
    """
    for n_int in sorted(rates_by_intervals):
        if n_int * coherence_len * rates_by_intervals[n_int] >= n_bits:
            return n_int
    raise ValueError(f"message of {n_bits} bits unreachable within "
                     f"L <= {max(rates_by_intervals)}")


def preferred_code(n_bits: float, tables: dict, coherence_len: int):
    """Code choice for a message: fewest intervals, ties broken toward the
    larger code (its extra diversity makes the rate more reliable).

    ``tables`` maps code -> {L: rate}.  Returns (code, L_min).
    """
    best = None
    for code, table in tables.items():
        try:
            l_min = min_intervals_for_message(code, n_bits, table, coherence_len)
        except ValueError:
            continue
        key = (l_min, -code.n_ports)
        if best is None or key < best[0]:
            best = (key, code, l_min)
    if best is None:
        raise ValueError(f"no code can carry {n_bits} bits")
    return best[1], best[2]
