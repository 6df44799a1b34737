"""Frame assembly and capacity/fairness metrics.

A frame has one slot per UE; slots sharing a cluster are contiguous, so the
surface is reconfigured once per cluster block.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .clustering import ClusterAssignment, ClusteringSettings, UeProfile, cluster
from .linalg import ContractViolation
from .peropt import rates_at_configs
from .phases import RadioParams, frame_sum_capacity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameSchedule:
    slots: tuple[tuple[int, int], ...]  # (ue_id, centroid_id), K entries
    reconfiguration_count: int


@dataclass(frozen=True)
class MetricsReport:
    per_ue_rate: np.ndarray  # bit/s/Hz
    sum_capacity: float  # bit/frame
    avg_sum_capacity: float  # bit/slot
    percentile_capacity: float  # bit/slot
    percentile_q: float
    bandwidth: float


def build_frame(assignment: ClusterAssignment) -> FrameSchedule:
    """Group slots by cluster, ascending ue_id inside each block."""
    slots = []
    for c in range(assignment.effective_z):
        for ue in np.flatnonzero(assignment.membership == c):
            slots.append((int(ue), c))
    if len(slots) != assignment.membership.shape[0]:
        raise ContractViolation("assignment does not cover every UE exactly once")
    return FrameSchedule(slots=tuple(slots), reconfiguration_count=assignment.effective_z)


def empirical_percentile(samples: np.ndarray, q: float) -> float:
    """inf{x : empirical CDF(x) >= q} over the sample."""
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    idx = int(np.ceil(q * n)) - 1
    return float(samples[max(idx, 0)])


def evaluate(
    assignment: ClusterAssignment,
    profiles: UeProfile,
    radio: RadioParams,
    q: float = 0.95,
) -> MetricsReport:
    """Score one realization: each UE is served through its cluster centroid
    with beamformers refit to that centroid."""
    if not 0.0 < q < 1.0:
        raise ContractViolation("percentile q must be in (0, 1)")
    k = profiles.num_ues
    rates = rates_at_configs(
        profiles.channels.g, profiles.channels.h, assignment.centroids, radio
    )
    per_ue = rates[np.arange(k), assignment.membership]
    total = frame_sum_capacity(assignment, per_ue, radio)
    return MetricsReport(
        per_ue_rate=per_ue,
        sum_capacity=total,
        avg_sum_capacity=total / k,
        percentile_capacity=radio.bandwidth / k * empirical_percentile(per_ue, q),
        percentile_q=q,
        bandwidth=radio.bandwidth,
    )


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Average capacities across realizations; percentile over the pooled
    per-UE rate sample."""
    if not reports:
        raise ContractViolation("nothing to aggregate")
    q = reports[0].percentile_q
    if any(r.percentile_q != q for r in reports):
        raise ContractViolation("reports use different percentiles")
    bandwidth = reports[0].bandwidth
    pooled = np.concatenate([r.per_ue_rate for r in reports])
    k_mean = float(np.mean([r.per_ue_rate.size for r in reports]))
    return MetricsReport(
        per_ue_rate=pooled,
        sum_capacity=float(np.mean([r.sum_capacity for r in reports])),
        avg_sum_capacity=float(np.mean([r.avg_sum_capacity for r in reports])),
        percentile_capacity=float(
            bandwidth / k_mean * empirical_percentile(pooled, q)
        ),
        percentile_q=q,
        bandwidth=bandwidth,
    )


def find_z_min(
    profiles_list: list[UeProfile],
    settings_template: ClusteringSettings,
    target_fraction: float,
    radio: RadioParams,
    q: float = 0.95,
) -> int:
    """Smallest budget whose aggregate capacity reaches the target fraction of
    the unclustered baseline, by ascending scan (heuristic capacity is not
    guaranteed monotone in the budget)."""
    if not 0.0 < target_fraction <= 1.0:
        raise ContractViolation("target_fraction must be in (0, 1]")
    k = profiles_list[0].num_ues
    baseline = aggregate(
        [
            evaluate(
                cluster(p, replace(settings_template, algorithm="unclustered")),
                p,
                radio,
                q,
            )
            for p in profiles_list
        ]
    ).avg_sum_capacity
    target = target_fraction * baseline
    for z in range(1, k + 1):
        settings = replace(settings_template, z_max=z)
        cbar = aggregate(
            [evaluate(cluster(p, settings, radio), p, radio, q) for p in profiles_list]
        ).avg_sum_capacity
        if cbar >= target:
            return z
    log.warning(
        "target fraction %.3f not reached even at z = K = %d (stochastic noise)",
        target_fraction,
        k,
    )
    return k
