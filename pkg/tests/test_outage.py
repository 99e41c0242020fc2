import numpy as np
import pytest

from ostbcsim.codes import CodeId, make_code
from ostbcsim.outage import (bootstrap_halfwidth, min_intervals_for_message,
                             outage_capacity, outage_rate, outage_result,
                             preferred_code, rate_samples, split_budget,
                             supported_rate)

C1 = make_code(CodeId.C1)
C2 = make_code(CodeId.C2)


def test_supported_rate_single_interval():
    assert np.isclose(supported_rate([1.0], C2), 1.0)  # log2(2), rate 1


def test_supported_rate_two_intervals():
    assert np.isclose(supported_rate([0.0, 3.0], C1), 1.0)  # (0 + 2)/2


def test_supported_rate_zero_snrs():
    assert supported_rate([0.0, 0.0, 0.0], C2) == 0.0


def test_supported_rate_code_rate_prefactor():
    c4 = make_code(CodeId.C4)
    assert np.isclose(supported_rate([1.0], c4), 0.75)


def test_supported_rate_empty_rejected():
    with pytest.raises(ValueError):
        supported_rate([], C1)
    with pytest.raises(ValueError):
        supported_rate([-0.1], C1)


def test_rate_samples_matrix():
    snr = np.array([[1.0, 3.0], [0.0, 0.0]])
    out = rate_samples(snr, C1)
    assert np.allclose(out, [1.5, 0.0])


def test_outage_capacity_constant_samples():
    assert outage_capacity(np.full(20_000, 1.7), 0.01) == 1.7


def test_outage_capacity_order_statistic():
    samples = np.arange(1.0, 1001.0)
    assert outage_capacity(samples, 0.01) == 10.0


def test_outage_capacity_median():
    rng = np.random.default_rng(0)
    samples = rng.normal(size=10_001)
    got = outage_capacity(samples, 0.5)
    assert abs(got - np.median(samples)) < 1e-2


def test_outage_capacity_monotone_in_eps():
    rng = np.random.default_rng(1)
    samples = rng.exponential(size=50_000)
    vals = [outage_capacity(samples, e) for e in (0.01, 0.05, 0.2, 0.5)]
    assert np.all(np.diff(vals) > 0)


def test_outage_capacity_sample_guard():
    with pytest.raises(ValueError):
        outage_capacity(np.ones(500), 0.01)


def test_outage_rate_no_pilots():
    assert outage_rate(0.5, 256, 0) == 0.5


def test_outage_rate_arithmetic():
    assert np.isclose(outage_rate(0.130, 256, 8), 0.130 * 248 / 256)


def test_outage_rate_half_interval():
    assert np.isclose(outage_rate(0.4, 256, 128), 0.2)


def test_outage_rate_monotone_in_pilot_len():
    rates = [outage_rate(1.0, 256, tp) for tp in (0, 8, 64, 128)]
    assert np.all(np.diff(rates) < 0)


def test_outage_rate_rejects_full_pilots():
    with pytest.raises(ValueError):
        outage_rate(0.1, 256, 256)


def test_outage_result_reports_halfwidth():
    rng = np.random.default_rng(2)
    samples = rng.exponential(size=20_000)
    res = outage_result(samples, 0.01, 256, 8, rng=3)
    assert res.n_samples == 20_000
    assert res.halfwidth > 0
    assert 0 <= res.r_eps <= res.c_eps


def test_bootstrap_halfwidth_shrinks_with_samples():
    rng = np.random.default_rng(4)
    small = bootstrap_halfwidth(rng.exponential(size=20_000), 0.01, rng=5)
    large = bootstrap_halfwidth(rng.exponential(size=200_000), 0.01, rng=6)
    assert large < small


def test_multi_interval_quantile_nondecreasing():
    # for a fixed per-interval SNR law the eps-quantile of the averaged
    # rate grows with the interval count
    rng = np.random.default_rng(7)
    n = 60_000
    vals = []
    for n_int in (1, 2, 4, 8):
        snr = rng.exponential(scale=0.8, size=(n, n_int))
        vals.append(outage_capacity(rate_samples(snr, C2), 0.01))
    assert np.all(np.diff(vals) > 0)


def test_split_budget_accounting():
    data, prelog = split_budget(256, 1, 8)
    assert data == 248 and np.isclose(prelog, 248 / 256)
    assert split_budget(256, 4, 2)[0] == 248


def test_split_budget_boundary():
    with pytest.raises(ValueError):
        split_budget(256, 32, 8)


def test_min_intervals_degenerate_message():
    table = {1: 0.1, 2: 0.15}
    assert min_intervals_for_message(C2, 0.0, table, 256) == 1


def test_min_intervals_boundary():
    # one interval carries 256 * 0.1 = 25.6 bits
    table = {1: 0.1, 2: 0.12, 3: 0.13}
    assert min_intervals_for_message(C2, 25.6, table, 256) == 1
    assert min_intervals_for_message(C2, 25.7, table, 256) == 2


def test_min_intervals_unreachable():
    with pytest.raises(ValueError):
        min_intervals_for_message(C2, 1e6, {1: 0.1, 2: 0.1}, 256)


def test_preferred_code_tie_breaks_to_larger():
    c4, c8 = make_code(CodeId.C4), make_code(CodeId.C8)
    tables = {
        C2: {1: 0.05, 2: 0.010},   # needs many intervals
        c4: {1: 0.10, 2: 0.150},
        c8: {1: 0.10, 2: 0.150},   # ties with c4 -> larger code wins
    }
    code, l_min = preferred_code(50.0, tables, 256)
    assert code is c8 and l_min == 2


def test_preferred_code_smaller_when_strictly_faster():
    c4 = make_code(CodeId.C4)
    tables = {C2: {1: 0.30}, c4: {1: 0.10, 2: 0.12}}
    code, l_min = preferred_code(70.0, tables, 256)
    assert code is C2 and l_min == 1
