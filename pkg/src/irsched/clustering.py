"""Grouping UEs in the phase-vector space under a cluster budget.

Each UE is represented by the phase vector of its individually optimal surface
configuration. Distance-based algorithms (k-means, average-linkage
hierarchical, k-medoids/PAM) work on the circular distance; capacity-based
ones (CWC, OSCBC, ICWC) score candidate centroids by the rate each UE would
actually achieve through them.
"""

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .channel import ChannelRealization
from .linalg import ContractViolation
from .peropt import PerUeOptimum, rates_at_configs
from .phases import (
    CONTINUOUS,
    PhaseSet,
    RadioParams,
    circular_mean,
    pairwise_circular_distance,
    quantize_phase,
)

DISTANCE_ALGORITHMS = ("km", "hc", "kmed")
CAPACITY_ALGORITHMS = ("cwc", "oscbc", "icwc")
ALGORITHMS = DISTANCE_ALGORITHMS + CAPACITY_ALGORITHMS


@dataclass(frozen=True)
class ClusteringSettings:
    algorithm: str
    z_max: int
    phase_set: PhaseSet = CONTINUOUS
    mu: float = 1e-3  # capacity-convergence tolerance on the frame sum rate
    km_max_iterations: int = 50
    cwc_max_iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.z_max < 1:
            raise ContractViolation("z_max must be at least 1")
        if self.mu <= 0:
            raise ContractViolation("mu must be positive")


@dataclass(frozen=True)
class UeProfile:
    """Per-UE individual optima plus the channel realization they came from."""

    optima: tuple[PerUeOptimum, ...]
    channels: ChannelRealization

    @property
    def num_ues(self) -> int:
        return len(self.optima)

    def points(self) -> np.ndarray:
        return np.stack([o.theta for o in self.optima])

    def rates(self) -> np.ndarray:
        return np.array([o.achievable_rate for o in self.optima])


@dataclass(frozen=True)
class ClusterAssignment:
    membership: np.ndarray  # (K,) group index in [0, effective_z)
    centroids: np.ndarray  # (effective_z, N_I) phase vectors

    @property
    def effective_z(self) -> int:
        return self.centroids.shape[0]


def _finalize(membership: np.ndarray, centroids: np.ndarray) -> ClusterAssignment:
    """Drop empty groups and merge groups with exactly equal centroids."""
    membership = np.asarray(membership, dtype=int).copy()
    keep = []
    remap = {}
    for z in range(centroids.shape[0]):
        if not np.any(membership == z):
            continue
        match = None
        for pos, kz in enumerate(keep):
            if np.array_equal(centroids[kz], centroids[z]):
                match = pos
                break
        if match is None:
            remap[z] = len(keep)
            keep.append(z)
        else:
            remap[z] = match
    new_membership = np.array([remap[z] for z in membership], dtype=int)
    return ClusterAssignment(
        membership=new_membership, centroids=centroids[keep].copy()
    )


def singleton_assignment(profiles: UeProfile) -> ClusterAssignment:
    """One cluster per UE, centered at its own optimal configuration."""
    k = profiles.num_ues
    return ClusterAssignment(
        membership=np.arange(k), centroids=profiles.points().copy()
    )


def _quantize_centroids(centroids: np.ndarray, pset: PhaseSet) -> np.ndarray:
    return np.asarray(quantize_phase(centroids, pset))


def cluster_km(profiles: UeProfile, settings: ClusteringSettings) -> ClusterAssignment:
    """Lloyd iterations with circular distance and circular-mean updates.

    Initial centroids are a seeded random subset of the per-UE optima.
    """
    points = profiles.points()
    k = points.shape[0]
    z = min(settings.z_max, k)
    rng = np.random.default_rng(settings.seed)
    centroids = points[rng.choice(k, size=z, replace=False)].copy()
    membership = np.zeros(k, dtype=int)
    for _ in range(settings.km_max_iterations):
        new_membership = np.argmin(pairwise_circular_distance(points, centroids), axis=1)
        for c in range(z):
            members = points[new_membership == c]
            if members.shape[0] > 0:
                centroids[c] = circular_mean(members)
        centroids = _quantize_centroids(centroids, settings.phase_set)
        if np.array_equal(new_membership, membership):
            membership = new_membership
            break
        membership = new_membership
    return _finalize(membership, centroids)


def cluster_hc(profiles: UeProfile, settings: ClusteringSettings) -> ClusterAssignment:
    """Agglomerative merging with average linkage over circular distance."""
    points = profiles.points()
    k = points.shape[0]
    z = min(settings.z_max, k)
    if k == 1 or z == k:
        membership = np.arange(k)
        centroids = points.copy()
    else:
        condensed = squareform(pairwise_circular_distance(points, points), checks=False)
        tree = linkage(condensed, method="average")
        labels = fcluster(tree, t=z, criterion="maxclust")
        # relabel by first appearance so output ordering is deterministic
        order = {}
        membership = np.empty(k, dtype=int)
        for i, lab in enumerate(labels):
            membership[i] = order.setdefault(lab, len(order))
        centroids = np.stack(
            [circular_mean(points[membership == c]) for c in range(len(order))]
        )
    centroids = _quantize_centroids(centroids, settings.phase_set)
    return _finalize(membership, centroids)


def cluster_kmed(profiles: UeProfile, settings: ClusteringSettings) -> ClusterAssignment:
    """PAM: greedy medoid swaps that never increase the summed distance."""
    points = profiles.points()
    k = points.shape[0]
    z = min(settings.z_max, k)
    rng = np.random.default_rng(settings.seed)
    medoids = np.sort(rng.choice(k, size=z, replace=False))
    dist = pairwise_circular_distance(points, points)

    def cost(meds):
        return dist[:, meds].min(axis=1).sum()

    current = cost(medoids)
    improved = True
    while improved:
        improved = False
        for mi in range(z):
            for candidate in range(k):
                if candidate in medoids:
                    continue
                trial = medoids.copy()
                trial[mi] = candidate
                c = cost(trial)
                if c < current - 1e-12:
                    medoids, current = trial, c
                    improved = True
    membership = np.argmin(dist[:, medoids], axis=1)
    return _finalize(membership, points[medoids].copy())


def _capacity_clustering(
    profiles: UeProfile,
    settings: ClusteringSettings,
    radio: RadioParams,
    inverse_weights: bool,
) -> ClusterAssignment:
    """Shared core of CWC and ICWC.

    Seeds are the optima of the z_max highest-rate UEs (lowest-rate for the
    inverse variant). Each pass reassigns every UE to the centroid with the
    smallest rate loss relative to its own optimum, then recenters each group
    at the (inverse-)rate-weighted circular mean of the members' optima. The
    best-scoring configuration seen is returned, so oscillations of the
    quantized projection cannot hurt the result.
    """
    points = profiles.points()
    rates_star = profiles.rates()
    k = points.shape[0]
    z = min(settings.z_max, k)
    if z == k:
        return singleton_assignment(profiles)
    g = profiles.channels.g
    h = profiles.channels.h

    order = np.argsort(-rates_star, kind="stable")
    if inverse_weights:
        order = order[::-1]
    seeds = order[:z]
    centroids = points[seeds].copy()

    def assign(cents):
        r = rates_at_configs(g, h, cents, radio)  # (K, Zc)
        member = np.argmin(rates_star[:, None] - r, axis=1)
        achieved = r[np.arange(k), member]
        return member, achieved

    membership, achieved = assign(centroids)
    score = achieved.sum()
    best = (membership.copy(), centroids.copy(), score)
    prev_score = score
    for _ in range(settings.cwc_max_iterations):
        new_centroids = centroids.copy()
        for c in range(z):
            mask = membership == c
            if not np.any(mask):
                continue  # empty groups keep their centroid; dropped at the end
            if inverse_weights:
                weights = 1.0 / np.maximum(achieved[mask], 1e-12)
            else:
                weights = achieved[mask]
            if weights.sum() <= 0:
                weights = np.ones(weights.shape)
            new_centroids[c] = circular_mean(points[mask], weights)
        new_centroids = _quantize_centroids(new_centroids, settings.phase_set)
        new_membership, achieved = assign(new_centroids)
        score = achieved.sum()
        if score > best[2]:
            best = (new_membership.copy(), new_centroids.copy(), score)
        fixed_point = np.array_equal(new_membership, membership) and np.array_equal(
            new_centroids, centroids
        )
        membership, centroids = new_membership, new_centroids
        if fixed_point or abs(score - prev_score) < settings.mu:
            break
        prev_score = score
    membership, centroids, _ = best
    return _finalize(membership, centroids)


def cluster_cwc(
    profiles: UeProfile, settings: ClusteringSettings, radio: RadioParams
) -> ClusterAssignment:
    return _capacity_clustering(profiles, settings, radio, inverse_weights=False)


def cluster_icwc(
    profiles: UeProfile, settings: ClusteringSettings, radio: RadioParams
) -> ClusterAssignment:
    return _capacity_clustering(profiles, settings, radio, inverse_weights=True)


def cluster_oscbc(
    profiles: UeProfile, settings: ClusteringSettings
) -> ClusterAssignment:
    """Centroids are the optima of the top-rate UEs; everyone else attaches to
    the closest centroid in circular distance. No iteration."""
    points = profiles.points()
    rates_star = profiles.rates()
    k = points.shape[0]
    z = min(settings.z_max, k)
    seeds = np.argsort(-rates_star, kind="stable")[:z]
    centroids = points[seeds].copy()
    membership = np.argmin(pairwise_circular_distance(points, centroids), axis=1)
    membership[seeds] = np.arange(z)  # a seed stays on its own centroid
    return _finalize(membership, centroids)


def cluster(
    profiles: UeProfile,
    settings: ClusteringSettings,
    radio: RadioParams | None = None,
) -> ClusterAssignment:
    """Dispatch on settings.algorithm ('unclustered' bypasses the budget)."""
    alg = settings.algorithm.lower()
    if alg == "unclustered":
        return singleton_assignment(profiles)
    if settings.z_max >= profiles.num_ues:
        # with one cluster per UE every algorithm degenerates to singletons
        if alg in CAPACITY_ALGORITHMS:
            return singleton_assignment(profiles)
    if alg == "km":
        return cluster_km(profiles, settings)
    if alg == "hc":
        return cluster_hc(profiles, settings)
    if alg == "kmed":
        return cluster_kmed(profiles, settings)
    if alg == "oscbc":
        return cluster_oscbc(profiles, settings)
    if alg in ("cwc", "icwc"):
        if radio is None:
            raise ContractViolation(f"{alg} requires radio parameters")
        if alg == "cwc":
            return cluster_cwc(profiles, settings, radio)
        return cluster_icwc(profiles, settings, radio)
    raise ContractViolation(f"unknown clustering algorithm {settings.algorithm!r}")
