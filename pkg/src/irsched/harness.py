"""Experiment runner: config parsing, seeded Monte-Carlo sweeps, caching of
per-UE optima, tabular output, and the brute-force validation oracles."""

import hashlib
import itertools
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, replace

import numpy as np
import yaml

from .channel import (
    AntennaArray,
    ChannelMode,
    ChannelModelParams,
    ChannelRealization,
    sample_geometry,
    synthesize_channel,
)
from .clustering import (
    ALGORITHMS,
    ClusteringSettings,
    UeProfile,
    cluster,
)
from .linalg import ContractViolation
from .peropt import OptimizerSettings, PerUeOptimum, optimize_ue, rates_at_configs
from .phases import CONTINUOUS, PhaseSet, RadioParams, dbm_to_watt, quantize_phase
from .scheduler import aggregate, evaluate

log = logging.getLogger(__name__)

CACHE_ENV_VAR = "IRSCHED_CACHE"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    realizations: int = 10
    num_ues: int = 10
    cell_radius_m: float = 167.0
    gnb_position: tuple[float, float] = (0.0, 0.0)
    irs_position: tuple[float, float] = (75.0, 100.0)
    half_plane: bool = True
    gnb_array: tuple[int, int] = (8, 8)  # (horizontal, vertical)
    ue_array: tuple[int, int] = (2, 1)
    irs_array: tuple[int, int] = (10, 20)
    carrier_ghz: float = 28.0
    bandwidth_hz: float = 1e8
    tx_power_dbm: float = 33.0
    noise_psd_dbm_hz: float = -174.0
    channel_modes: tuple[str, ...] = ("plos",)
    n_clusters_los: int = 12
    n_clusters_nlos: int = 19
    n_rays: int = 20
    rician_k_db: float = 9.0
    ray_spread_deg: float = 5.0
    phase_sets: tuple[int | None, ...] = (None,)  # None = continuous
    algorithms: tuple[str, ...] = ("cwc",)
    z_values: tuple[int, ...] = (1,)
    percentile_q: float = 0.95
    epsilon: float = 1e-6
    mu: float = 1e-3
    optimizer_max_iterations: int = 50
    km_max_iterations: int = 50
    cwc_max_iterations: int = 100

    def __post_init__(self):
        if not self.algorithms or not self.z_values or not self.phase_sets:
            raise ContractViolation("algorithms, z_values and phase_sets must be non-empty")
        if not self.channel_modes:
            raise ContractViolation("channel_modes must be non-empty")
        for z in self.z_values:
            if not 1 <= z <= self.num_ues:
                raise ContractViolation(f"z value {z} outside [1, K={self.num_ues}]")
        for alg in self.algorithms:
            if alg not in ALGORITHMS + ("unclustered",):
                raise ContractViolation(f"unknown algorithm {alg!r}")
        for m in self.channel_modes:
            ChannelMode(m)

    @property
    def radio(self) -> RadioParams:
        return RadioParams(
            bandwidth=self.bandwidth_hz,
            tx_power=dbm_to_watt(self.tx_power_dbm),
            noise_psd=dbm_to_watt(self.noise_psd_dbm_hz),
        )

    @property
    def channel_params(self) -> ChannelModelParams:
        return ChannelModelParams(
            n_clusters_los=self.n_clusters_los,
            n_clusters_nlos=self.n_clusters_nlos,
            n_rays=self.n_rays,
            rician_k_db=self.rician_k_db,
            ray_spread_deg=self.ray_spread_deg,
        )

    def array(self, which: str) -> AntennaArray:
        h, v = getattr(self, f"{which}_array")
        return AntennaArray(rows_v=v, cols_h=h)

    def phase_set(self, bits: int | None) -> PhaseSet:
        return CONTINUOUS if bits is None else PhaseSet(bits=bits)


def _parse_bits(value) -> int | None:
    if value in (None, "continuous", "unquantized"):
        return None
    return int(value)


# nested YAML schema: leaf entries are (target field, caster)
_SCHEMA = {
    "name": ("name", str),
    "seed": ("seed", int),
    "realizations": ("realizations", int),
    "percentile_q": ("percentile_q", float),
    "phase_sets": ("phase_sets", lambda v: tuple(_parse_bits(b) for b in v)),
    "algorithms": ("algorithms", lambda v: tuple(str(a).lower() for a in v)),
    "z_values": ("z_values", lambda v: tuple(int(z) for z in v)),
    "geometry": {
        "num_ues": ("num_ues", int),
        "cell_radius_m": ("cell_radius_m", float),
        "gnb_position": ("gnb_position", lambda v: (float(v[0]), float(v[1]))),
        "irs_position": ("irs_position", lambda v: (float(v[0]), float(v[1]))),
        "half_plane": ("half_plane", bool),
    },
    "arrays": {
        "gnb": ("gnb_array", lambda v: (int(v[0]), int(v[1]))),
        "ue": ("ue_array", lambda v: (int(v[0]), int(v[1]))),
        "irs": ("irs_array", lambda v: (int(v[0]), int(v[1]))),
    },
    "radio": {
        "carrier_ghz": ("carrier_ghz", float),
        "bandwidth_hz": ("bandwidth_hz", float),
        "tx_power_dbm": ("tx_power_dbm", float),
        "noise_psd_dbm_hz": ("noise_psd_dbm_hz", float),
    },
    "channel": {
        "modes": ("channel_modes", lambda v: tuple(str(m).lower() for m in v)),
        "n_clusters_los": ("n_clusters_los", int),
        "n_clusters_nlos": ("n_clusters_nlos", int),
        "n_rays": ("n_rays", int),
        "rician_k_db": ("rician_k_db", float),
        "ray_spread_deg": ("ray_spread_deg", float),
    },
    "tolerances": {
        "epsilon": ("epsilon", float),
        "mu": ("mu", float),
    },
    "iteration_caps": {
        "optimizer": ("optimizer_max_iterations", int),
        "km": ("km_max_iterations", int),
        "cwc": ("cwc_max_iterations", int),
    },
}


class ConfigError(ValueError):
    """Bad experiment configuration; the message carries the field path."""


def _walk_schema(schema, data, path, out):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<root>'}: expected a mapping")
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key {path + key!r}")
        entry = schema[key]
        if isinstance(entry, dict):
            _walk_schema(entry, value, path + key + ".", out)
        else:
            target, caster = entry
            try:
                out[target] = caster(value)
            except (TypeError, ValueError, IndexError) as exc:
                raise ConfigError(f"bad value for {path + key!r}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    out: dict = {}
    _walk_schema(_SCHEMA, data, "", out)
    try:
        return ExperimentConfig(**out)
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data or {})


# ---------------------------------------------------------------------------
# per-realization generation and caching


def scenario_hash(cfg: ExperimentConfig, mode: str, bits: int | None) -> str:
    """Content hash of every field that affects channels or per-UE optima."""
    payload = {
        "seed": cfg.seed,
        "num_ues": cfg.num_ues,
        "cell_radius_m": cfg.cell_radius_m,
        "gnb_position": cfg.gnb_position,
        "irs_position": cfg.irs_position,
        "half_plane": cfg.half_plane,
        "gnb_array": cfg.gnb_array,
        "ue_array": cfg.ue_array,
        "irs_array": cfg.irs_array,
        "carrier_ghz": cfg.carrier_ghz,
        "tx_power_dbm": cfg.tx_power_dbm,
        "noise_psd_dbm_hz": cfg.noise_psd_dbm_hz,
        "bandwidth_hz": cfg.bandwidth_hz,
        "channel": asdict(cfg.channel_params),
        "mode": mode,
        "bits": bits,
        "epsilon": cfg.epsilon,
        "optimizer_max_iterations": cfg.optimizer_max_iterations,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _realization_seeds(master_seed: int, index: int):
    geo = np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(index, 0))
    )
    chan = np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(index, 1))
    )
    return geo, chan


def compute_profiles(
    cfg: ExperimentConfig, mode: str, bits: int | None, index: int
) -> UeProfile:
    """Generate geometry, channels, and per-UE optima for one realization."""
    geo_rng, chan_rng = _realization_seeds(cfg.seed, index)
    geom = sample_geometry(
        geo_rng,
        cfg.num_ues,
        cfg.cell_radius_m,
        gnb=cfg.gnb_position,
        irs=cfg.irs_position,
        half_plane=cfg.half_plane,
    )
    chan = synthesize_channel(
        chan_rng,
        geom,
        cfg.array("gnb"),
        cfg.array("irs"),
        cfg.array("ue"),
        ChannelMode(mode),
        cfg.carrier_ghz,
        cfg.channel_params,
    )
    pset = cfg.phase_set(bits)
    settings = OptimizerSettings(
        epsilon=cfg.epsilon, max_iterations=cfg.optimizer_max_iterations
    )
    optima = tuple(
        optimize_ue(chan.g[k], chan.h, pset, settings, cfg.radio)
        for k in range(cfg.num_ues)
    )
    return UeProfile(optima=optima, channels=chan)


def _cache_path(cache_dir: str, key: str, index: int) -> str:
    return os.path.join(cache_dir, f"{key}_r{index:05d}.npz")


def _save_profiles(path: str, profile: UeProfile) -> None:
    chan = profile.channels
    payload = {
        "h": chan.h,
        "g": chan.g,
        "link_los": chan.link_los,
        "lsfc": chan.lsfc,
        "gnb_irs_lsfc": np.array(chan.gnb_irs_lsfc),
        "theta": np.stack([o.theta for o in profile.optima]),
        "w": np.stack([o.w for o in profile.optima]),
        "v": np.stack([o.v for o in profile.optima]),
        "rates": np.array([o.achievable_rate for o in profile.optima]),
        "iterations": np.array([o.iterations_used for o in profile.optima]),
        "converged": np.array([o.converged for o in profile.optima]),
    }
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.savez(fh, **payload)
    os.replace(tmp, path)


def _load_profiles(path: str) -> UeProfile:
    with np.load(path) as data:
        chan = ChannelRealization(
            h=data["h"],
            g=data["g"],
            link_los=data["link_los"],
            lsfc=data["lsfc"],
            gnb_irs_lsfc=float(data["gnb_irs_lsfc"]),
        )
        optima = tuple(
            PerUeOptimum(
                theta=data["theta"][k],
                w=data["w"][k],
                v=data["v"][k],
                achievable_rate=float(data["rates"][k]),
                iterations_used=int(data["iterations"][k]),
                converged=bool(data["converged"][k]),
            )
            for k in range(data["g"].shape[0])
        )
    return UeProfile(optima=optima, channels=chan)


def realize_profiles(
    cfg: ExperimentConfig,
    mode: str,
    bits: int | None,
    index: int,
    cache_dir: str | None = None,
) -> UeProfile:
    """Cached wrapper around compute_profiles; keyed by content hash."""
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV_VAR)
    if cache_dir is None:
        return compute_profiles(cfg, mode, bits, index)
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(cache_dir, scenario_hash(cfg, mode, bits), index)
    if os.path.exists(path):
        return _load_profiles(path)
    profile = compute_profiles(cfg, mode, bits, index)
    _save_profiles(path, profile)
    return profile


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    z: int
    phase_bits: int | None
    mode: str
    num_ues: int
    irs_elements: int
    realizations: int
    cbar_mbit_slot: float
    percentile_mbit_slot: float
    percentile_q: float
    effective_z_mean: float
    opt_iterations_mean: float
    wall_time_s: float


RESULT_FIELDS = [f for f in ResultRow.__dataclass_fields__]


def _clustering_settings(
    cfg: ExperimentConfig, algorithm: str, z: int, bits: int | None
) -> ClusteringSettings:
    return ClusteringSettings(
        algorithm=algorithm,
        z_max=z,
        phase_set=cfg.phase_set(bits),
        mu=cfg.mu,
        km_max_iterations=cfg.km_max_iterations,
        cwc_max_iterations=cfg.cwc_max_iterations,
        seed=cfg.seed,
    )


def run_sweep(
    cfg: ExperimentConfig,
    out_dir: str | None = None,
    cache_dir: str | None = None,
) -> list[ResultRow]:
    """Full Monte-Carlo sweep over (mode, phase set, algorithm, Z).

    Per-realization records go to <out_dir>/records.jsonl, the aggregated
    table to <out_dir>/results.csv with a config sidecar results.json.
    Deterministic for a fixed config seed.
    """
    records = []
    rows = []
    for mode, bits in itertools.product(cfg.channel_modes, cfg.phase_sets):
        profiles = [
            realize_profiles(cfg, mode, bits, i, cache_dir)
            for i in range(cfg.realizations)
        ]
        opt_iters = float(
            np.mean([o.iterations_used for p in profiles for o in p.optima])
        )
        for algorithm, z in itertools.product(cfg.algorithms, cfg.z_values):
            start = time.perf_counter()
            reports = []
            eff_z = []
            for i, profile in enumerate(profiles):
                settings = _clustering_settings(cfg, algorithm, z, bits)
                assignment = cluster(profile, settings, cfg.radio)
                report = evaluate(assignment, profile, cfg.radio, cfg.percentile_q)
                reports.append(report)
                eff_z.append(assignment.effective_z)
                records.append(
                    {
                        "mode": mode,
                        "phase_bits": bits,
                        "algorithm": algorithm,
                        "z": z,
                        "realization": i,
                        "effective_z": assignment.effective_z,
                        "avg_sum_capacity": report.avg_sum_capacity,
                        "sum_capacity": report.sum_capacity,
                        "per_ue_rate": [float(r) for r in report.per_ue_rate],
                        "percentile_q": cfg.percentile_q,
                        "bandwidth": cfg.bandwidth_hz,
                    }
                )
            agg = aggregate(reports)
            rows.append(
                ResultRow(
                    algorithm=algorithm,
                    z=z,
                    phase_bits=bits,
                    mode=mode,
                    num_ues=cfg.num_ues,
                    irs_elements=cfg.array("irs").size,
                    realizations=cfg.realizations,
                    cbar_mbit_slot=agg.avg_sum_capacity / 1e6,
                    percentile_mbit_slot=agg.percentile_capacity / 1e6,
                    percentile_q=cfg.percentile_q,
                    effective_z_mean=float(np.mean(eff_z)),
                    opt_iterations_mean=opt_iters,
                    wall_time_s=time.perf_counter() - start,
                )
            )
    if out_dir is not None:
        write_results(rows, records, out_dir, cfg)
    return rows


def _csv_cell(value) -> str:
    if value is None:
        return "continuous"
    return str(value)


def write_results(rows, records, out_dir: str, cfg: ExperimentConfig) -> None:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path + ".tmp", "w") as fh:
        fh.write(",".join(RESULT_FIELDS) + "\n")
        for row in rows:
            fh.write(
                ",".join(_csv_cell(getattr(row, f)) for f in RESULT_FIELDS) + "\n"
            )
    os.replace(csv_path + ".tmp", csv_path)
    sidecar = {
        "config": asdict(cfg),
        "package": "irsched",
        "version": "0.1.0",
    }
    with open(os.path.join(out_dir, "results.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "records.jsonl"), "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def reaggregate(out_dir: str) -> list[dict]:
    """Rebuild the aggregated table from the per-realization records file."""
    from .scheduler import MetricsReport

    path = os.path.join(out_dir, "records.jsonl")
    with open(path) as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    groups: dict[tuple, list[dict]] = {}
    for rec in records:
        key = (rec["mode"], rec["phase_bits"], rec["algorithm"], rec["z"])
        groups.setdefault(key, []).append(rec)
    rows = []
    for (mode, bits, algorithm, z), recs in sorted(
        groups.items(), key=lambda kv: [str(x) for x in kv[0]]
    ):
        reports = [
            MetricsReport(
                per_ue_rate=np.array(r["per_ue_rate"]),
                sum_capacity=r["sum_capacity"],
                avg_sum_capacity=r["avg_sum_capacity"],
                percentile_capacity=0.0,
                percentile_q=r["percentile_q"],
                bandwidth=r["bandwidth"],
            )
            for r in recs
        ]
        agg = aggregate(reports)
        rows.append(
            {
                "mode": mode,
                "phase_bits": bits,
                "algorithm": algorithm,
                "z": z,
                "realizations": len(recs),
                "cbar_mbit_slot": agg.avg_sum_capacity / 1e6,
                "percentile_mbit_slot": agg.percentile_capacity / 1e6,
                "effective_z_mean": float(np.mean([r["effective_z"] for r in recs])),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# oracles


@dataclass(frozen=True)
class OracleConfigReport:
    exhaustive_rate: float
    algorithm_rate: float
    ratio: float
    num_candidates: int


def enumerate_configs(pset: PhaseSet, n_i: int) -> np.ndarray:
    """All quantized configurations as a (2^(b*n_i), n_i) phase array."""
    if not pset.quantized:
        raise ContractViolation("exhaustive search needs a quantized phase set")
    grid = pset.grid()
    count = len(grid) ** n_i
    if n_i > 10 or count > 4096:
        raise ContractViolation(
            f"instance too large for exhaustive search: {len(grid)}^{n_i} = {count} > 4096"
        )
    return np.array(list(itertools.product(grid, repeat=n_i)))


def run_oracle_config(
    g,
    h,
    pset: PhaseSet,
    radio: RadioParams,
    settings: OptimizerSettings = OptimizerSettings(),
) -> OracleConfigReport:
    """Exhaustively score every quantized configuration (each with its own SVD
    beamformers) and compare the iterative optimizer against the maximum."""
    g = np.asarray(g, dtype=complex)
    candidates = enumerate_configs(pset, g.shape[1])
    rates = rates_at_configs(g[None, :, :], h, candidates, radio)[0]
    exhaustive = float(rates.max())
    opt = optimize_ue(g, h, pset, settings, radio)
    ratio = opt.achievable_rate / exhaustive if exhaustive > 0 else 1.0
    return OracleConfigReport(
        exhaustive_rate=exhaustive,
        algorithm_rate=opt.achievable_rate,
        ratio=float(ratio),
        num_candidates=candidates.shape[0],
    )


def _set_partitions(k: int, z_max: int):
    """All partitions of range(k) into at most z_max non-empty groups, via
    restricted growth strings."""

    def rec(i, labels, used):
        if i == k:
            yield list(labels)
            return
        for lab in range(min(used + 1, z_max)):
            labels.append(lab)
            yield from rec(i + 1, labels, max(used, lab + 1))
            labels.pop()

    yield from rec(0, [], 0)


@dataclass(frozen=True)
class OraclePartitionReport:
    best_capacity: float
    best_membership: tuple[int, ...]
    heuristic_ratios: dict
    num_partitions: int


def run_oracle_partition(
    profiles: UeProfile,
    z_max: int,
    pset: PhaseSet,
    radio: RadioParams,
    settings_template: ClusteringSettings | None = None,
) -> OraclePartitionReport:
    """Enumerate every grouping of the UEs into at most z_max clusters; each
    group's configuration is the rate-weighted circular mean of its members'
    optima (quantized if needed). Reports each heuristic's ratio to the best
    enumerated sum capacity."""
    from .phases import circular_mean

    k = profiles.num_ues
    if k > 8 or z_max > 3:
        raise ContractViolation("partition oracle limited to K <= 8, Z <= 3")
    points = profiles.points()
    rates_star = profiles.rates()
    g, h = profiles.channels.g, profiles.channels.h

    best_score = -np.inf
    best_membership = None
    count = 0
    for labels in _set_partitions(k, z_max):
        count += 1
        labels = np.array(labels)
        n_groups = labels.max() + 1
        centroids = np.stack(
            [
                np.asarray(
                    quantize_phase(
                        circular_mean(
                            points[labels == c],
                            np.maximum(rates_star[labels == c], 1e-12),
                        ),
                        pset,
                    )
                )
                for c in range(n_groups)
            ]
        )
        r = rates_at_configs(g, h, centroids, radio)
        score = float(r[np.arange(k), labels].sum())
        if score > best_score:
            best_score = score
            best_membership = tuple(int(x) for x in labels)

    if settings_template is None:
        settings_template = ClusteringSettings(
            algorithm="cwc", z_max=z_max, phase_set=pset
        )
    ratios = {}
    for alg in ALGORITHMS:
        settings = replace(settings_template, algorithm=alg, z_max=z_max)
        assignment = cluster(profiles, settings, radio)
        report = evaluate(assignment, profiles, radio)
        score = report.sum_capacity / radio.bandwidth
        ratios[alg] = float(score / best_score) if best_score > 0 else 1.0
    return OraclePartitionReport(
        best_capacity=best_score,
        best_membership=best_membership,
        heuristic_ratios=ratios,
        num_partitions=count,
    )


# ---------------------------------------------------------------------------
# synthetic small instances for the oracle CLI verbs


def random_small_channels(seed, n_u: int, n_i: int, n_g: int):
    """Unit-variance complex Gaussian G and H for oracle trials."""
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((n_u, n_i)) + 1j * rng.standard_normal((n_u, n_i))) / np.sqrt(2)
    h = (rng.standard_normal((n_i, n_g)) + 1j * rng.standard_normal((n_i, n_g))) / np.sqrt(2)
    return g, h


def snr_radio(snr_db: float) -> RadioParams:
    """Unit-bandwidth link budget with the given nominal SNR scale."""
    return RadioParams(bandwidth=1.0, tx_power=10.0 ** (snr_db / 10.0), noise_psd=1.0)
