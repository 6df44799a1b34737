"""Command-line entry points.

Verbs:
  sweep             run a Monte-Carlo sweep from a YAML config
  oracle-config     compare the per-UE optimizer against exhaustive search
  oracle-partition  compare the clustering heuristics against enumeration
  report            re-aggregate a finished sweep's per-realization records
"""

import argparse
import logging
import sys

import numpy as np

from .clustering import ClusteringSettings, UeProfile
from .harness import (
    ConfigError,
    load_config,
    random_small_channels,
    reaggregate,
    run_oracle_config,
    run_oracle_partition,
    run_sweep,
    snr_radio,
)
from .linalg import ContractViolation
from .peropt import OptimizerSettings, optimize_ue
from .phases import PhaseSet

log = logging.getLogger(__name__)


def _add_sweep(sub):
    p = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a YAML config")
    p.add_argument("--config", required=True, help="path to the YAML experiment file")
    p.add_argument("--out", required=True, help="output directory for CSV/JSON results")
    p.add_argument("--cache", default=None, help="cache directory for channel/optima")
    p.set_defaults(func=cmd_sweep)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows = run_sweep(cfg, out_dir=args.out, cache_dir=args.cache)
    expected = (
        len(cfg.channel_modes)
        * len(cfg.phase_sets)
        * len(cfg.algorithms)
        * len(cfg.z_values)
    )
    for row in rows:
        print(
            f"{row.mode} b={row.phase_bits if row.phase_bits is not None else 'cont'} "
            f"{row.algorithm} Z={row.z}: Cbar={row.cbar_mbit_slot:.3f} Mbit/slot, "
            f"C{int(row.percentile_q * 100)}%={row.percentile_mbit_slot:.3f} Mbit/slot"
        )
    if len(rows) != expected:
        print(f"error: only {len(rows)} of {expected} sweep points completed", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} rows to {args.out}/results.csv")
    return 0


def _add_oracle_config(sub):
    p = sub.add_parser(
        "oracle-config",
        help="exhaustive check of the per-UE configuration optimizer",
    )
    p.add_argument("--n-i", type=int, default=6, help="surface elements")
    p.add_argument("--bits", type=int, default=1, help="phase resolution in bits")
    p.add_argument("--n-g", type=int, default=2, help="transmit antennas")
    p.add_argument("--n-u", type=int, default=2, help="receive antennas")
    p.add_argument("--seeds", type=int, default=20, help="number of random trials")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--snr-db", type=float, default=10.0, help="nominal SNR scale")
    p.set_defaults(func=cmd_oracle_config)


def cmd_oracle_config(args) -> int:
    radio = snr_radio(args.snr_db)
    pset = PhaseSet(bits=args.bits)
    ratios = []
    for trial in range(args.seeds):
        g, h = random_small_channels(args.seed + trial, args.n_u, args.n_i, args.n_g)
        report = run_oracle_config(g, h, pset, radio)
        ratios.append(report.ratio)
        print(
            f"seed {args.seed + trial}: algorithm {report.algorithm_rate:.4f} "
            f"vs exhaustive {report.exhaustive_rate:.4f} "
            f"(ratio {report.ratio:.4f}, {report.num_candidates} candidates)"
        )
    ratios = np.array(ratios)
    print(
        f"ratio over {args.seeds} trials: min {ratios.min():.4f}, "
        f"median {np.median(ratios):.4f}, mean {ratios.mean():.4f}"
    )
    return 0


def _add_oracle_partition(sub):
    p = sub.add_parser(
        "oracle-partition",
        help="enumerate all groupings of a small instance and score the heuristics",
    )
    p.add_argument("--k", type=int, default=6, help="number of UEs (max 8)")
    p.add_argument("--z", type=int, default=2, help="cluster budget (max 3)")
    p.add_argument("--n-i", type=int, default=6, help="surface elements")
    p.add_argument("--bits", type=int, default=None, help="phase bits (default continuous)")
    p.add_argument("--n-g", type=int, default=2, help="transmit antennas")
    p.add_argument("--n-u", type=int, default=2, help="receive antennas")
    p.add_argument("--seeds", type=int, default=5, help="number of random trials")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--snr-db", type=float, default=10.0, help="nominal SNR scale")
    p.set_defaults(func=cmd_oracle_partition)


def cmd_oracle_partition(args) -> int:
    from .channel import ChannelRealization

    radio = snr_radio(args.snr_db)
    pset = PhaseSet(bits=args.bits) if args.bits is not None else PhaseSet()
    opt_settings = OptimizerSettings()
    collected: dict[str, list] = {}
    for trial in range(args.seeds):
        rng_seed = args.seed + trial
        h = random_small_channels(rng_seed, 1, args.n_i, args.n_g)[1]
        g = np.stack(
            [
                random_small_channels((rng_seed, k), args.n_u, args.n_i, args.n_g)[0]
                for k in range(args.k)
            ]
        )
        chan = ChannelRealization(
            h=h,
            g=g,
            link_los=np.ones(args.k, dtype=bool),
            lsfc=np.ones(args.k),
            gnb_irs_lsfc=1.0,
        )
        optima = tuple(
            optimize_ue(g[k], h, pset, opt_settings, radio) for k in range(args.k)
        )
        profile = UeProfile(optima=optima, channels=chan)
        template = ClusteringSettings(algorithm="cwc", z_max=args.z, phase_set=pset)
        report = run_oracle_partition(profile, args.z, pset, radio, template)
        line = ", ".join(
            f"{alg}={ratio:.4f}" for alg, ratio in sorted(report.heuristic_ratios.items())
        )
        print(
            f"seed {rng_seed}: best {report.best_capacity:.4f} over "
            f"{report.num_partitions} partitions; ratios {line}"
        )
        for alg, ratio in report.heuristic_ratios.items():
            collected.setdefault(alg, []).append(ratio)
    for alg in sorted(collected):
        vals = np.array(collected[alg])
        print(f"{alg}: min {vals.min():.4f}, median {np.median(vals):.4f}")
    return 0


def _add_report(sub):
    p = sub.add_parser("report", help="re-aggregate a sweep's records.jsonl")
    p.add_argument("--out", required=True, help="sweep output directory")
    p.set_defaults(func=cmd_report)


def cmd_report(args) -> int:
    rows = reaggregate(args.out)
    for row in rows:
        bits = row["phase_bits"] if row["phase_bits"] is not None else "cont"
        print(
            f"{row['mode']} b={bits} {row['algorithm']} Z={row['z']}: "
            f"Cbar={row['cbar_mbit_slot']:.3f} Mbit/slot, "
            f"percentile={row['percentile_mbit_slot']:.3f} Mbit/slot "
            f"({row['realizations']} realizations)"
        )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="irsched",
        description="TDMA downlink scheduling through a reconfigurable surface",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    _add_sweep(sub)
    _add_oracle_config(sub)
    _add_oracle_partition(sub)
    _add_report(sub)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ContractViolation, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
