import numpy as np
import pytest

from irsched.channel import ChannelRealization
from irsched.clustering import ClusteringSettings, UeProfile, cluster
from irsched.linalg import ContractViolation
from irsched.peropt import OptimizerSettings, optimize_ue
from irsched.phases import CONTINUOUS, RadioParams
from irsched.scheduler import (
    aggregate,
    build_frame,
    empirical_percentile,
    evaluate,
    find_z_min,
)

RADIO = RadioParams(bandwidth=2.0, tx_power=10.0, noise_psd=1.0)


def make_profile(seed, k=6, n_i=8, n_u=2, n_g=3):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n_i, n_g)) + 1j * rng.standard_normal((n_i, n_g))
    g = rng.standard_normal((k, n_u, n_i)) + 1j * rng.standard_normal((k, n_u, n_i))
    chan = ChannelRealization(
        h=h, g=g, link_los=np.ones(k, dtype=bool), lsfc=np.ones(k), gnb_irs_lsfc=1.0
    )
    optima = tuple(
        optimize_ue(g[i], h, CONTINUOUS, OptimizerSettings(), RADIO) for i in range(k)
    )
    return UeProfile(optima=optima, channels=chan)


def test_build_frame_contiguous_blocks():
    profile = make_profile(0)
    assignment = cluster(profile, ClusteringSettings(algorithm="cwc", z_max=3), RADIO)
    frame = build_frame(assignment)
    assert len(frame.slots) == 6
    assert sorted(ue for ue, _ in frame.slots) == list(range(6))
    labels = [c for _, c in frame.slots]
    # each cluster occupies one contiguous block of slots
    changes = sum(1 for a, b in zip(labels, labels[1:]) if a != b)
    assert changes == assignment.effective_z - 1
    assert frame.reconfiguration_count == assignment.effective_z
    # inside a block, ue ids are ascending
    for c in range(assignment.effective_z):
        ids = [ue for ue, lab in frame.slots if lab == c]
        assert ids == sorted(ids)


def test_empirical_percentile_definition():
    samples = np.arange(1, 11)  # 1..10
    assert empirical_percentile(samples, 0.95) == 10
    assert empirical_percentile(samples, 0.90) == 9
    assert empirical_percentile(samples, 0.5) == 5
    assert empirical_percentile(samples, 0.05) == 1
    # smallest x with CDF(x) >= q, over an unsorted sample
    assert empirical_percentile(np.array([3.0, 1.0, 2.0]), 0.5) == 2.0


def test_evaluate_consistency():
    profile = make_profile(1)
    assignment = cluster(profile, ClusteringSettings(algorithm="cwc", z_max=2), RADIO)
    report = evaluate(assignment, profile, RADIO, q=0.95)
    assert report.per_ue_rate.shape == (6,)
    assert np.isclose(report.sum_capacity, RADIO.bandwidth * report.per_ue_rate.sum())
    assert np.isclose(report.avg_sum_capacity, report.sum_capacity / 6)
    assert np.isclose(
        report.percentile_capacity,
        RADIO.bandwidth / 6 * empirical_percentile(report.per_ue_rate, 0.95),
    )
    assert report.bandwidth == RADIO.bandwidth


def test_evaluate_singletons_match_optima():
    profile = make_profile(2)
    assignment = cluster(profile, ClusteringSettings(algorithm="unclustered", z_max=1))
    report = evaluate(assignment, profile, RADIO)
    assert np.allclose(report.per_ue_rate, profile.rates(), atol=1e-9)


def test_evaluate_rejects_bad_percentile():
    profile = make_profile(3)
    assignment = cluster(profile, ClusteringSettings(algorithm="unclustered", z_max=1))
    with pytest.raises(ContractViolation):
        evaluate(assignment, profile, RADIO, q=1.0)


def test_aggregate_pools_rates():
    profile_a, profile_b = make_profile(4), make_profile(5)
    reports = []
    for p in (profile_a, profile_b):
        assignment = cluster(p, ClusteringSettings(algorithm="unclustered", z_max=1))
        reports.append(evaluate(assignment, p, RADIO))
    agg = aggregate(reports)
    assert agg.per_ue_rate.shape == (12,)
    assert np.isclose(
        agg.avg_sum_capacity,
        np.mean([r.avg_sum_capacity for r in reports]),
    )
    pooled = np.concatenate([r.per_ue_rate for r in reports])
    assert np.isclose(
        agg.percentile_capacity,
        RADIO.bandwidth / 6 * empirical_percentile(pooled, 0.95),
    )
    with pytest.raises(ContractViolation):
        aggregate([])


def test_find_z_min_trivial_target():
    profiles = [make_profile(s) for s in range(3)]
    template = ClusteringSettings(algorithm="cwc", z_max=1)
    # a tiny target is met by a single shared configuration
    assert find_z_min(profiles, template, 0.05, RADIO) == 1
    # full parity is reached at or below z = K because z = K is exact
    z = find_z_min(profiles, template, 1.0, RADIO)
    assert 1 <= z <= 6


def test_find_z_min_monotone_in_target():
    profiles = [make_profile(s) for s in range(3)]
    template = ClusteringSettings(algorithm="cwc", z_max=1)
    z_lo = find_z_min(profiles, template, 0.5, RADIO)
    z_hi = find_z_min(profiles, template, 0.95, RADIO)
    assert z_lo <= z_hi
    with pytest.raises(ContractViolation):
        find_z_min(profiles, template, 1.5, RADIO)
