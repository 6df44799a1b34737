"""Downlink TDMA scheduling through a reconfigurable reflecting surface.

A transmitter serves K users one slot at a time through a passive phase-shifting
surface that can only be reprogrammed Z times per frame. The package provides
the channel model, the per-user phase/beamformer optimizer, six algorithms for
grouping users onto shared surface configurations, frame metrics, and a
Monte-Carlo experiment harness with brute-force validation oracles.
"""

from .channel import (
    AntennaArray,
    ChannelMode,
    ChannelModelParams,
    ChannelRealization,
    ScenarioGeometry,
    amplitude_gain,
    array_response,
    los_probability,
    path_loss_db,
    sample_geometry,
    sample_link_state,
    synthesize_channel,
)
from .clustering import (
    ALGORITHMS,
    CAPACITY_ALGORITHMS,
    DISTANCE_ALGORITHMS,
    ClusterAssignment,
    ClusteringSettings,
    UeProfile,
    cluster,
    singleton_assignment,
)
from .harness import (
    CACHE_ENV_VAR,
    ConfigError,
    ExperimentConfig,
    OracleConfigReport,
    OraclePartitionReport,
    ResultRow,
    compute_profiles,
    config_from_dict,
    load_config,
    realize_profiles,
    run_oracle_config,
    run_oracle_partition,
    run_sweep,
)
from .linalg import ContractViolation, NumericFailure, SvdResult, svd, top_singular_values
from .peropt import (
    DegenerateChannelError,
    OptimizerSettings,
    PerUeOptimum,
    align_phases,
    best_beamformers,
    cascade,
    optimize_ue,
    rates_at_configs,
)
from .phases import (
    CONTINUOUS,
    PhaseSet,
    RadioParams,
    circular_distance,
    circular_mean,
    dbm_to_watt,
    frame_sum_capacity,
    pairwise_circular_distance,
    quantize_phase,
    rate,
    reflection_coefficients,
    snr,
    wrap_phase,
)
from .scheduler import (
    FrameSchedule,
    MetricsReport,
    aggregate,
    build_frame,
    empirical_percentile,
    evaluate,
    find_z_min,
)

__version__ = "0.1.0"
