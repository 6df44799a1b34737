"""End-to-end acceptance checks.

Each criterion is one test function, so `pytest -v` prints exactly one
pass/fail line per criterion; every test also prints a one-line summary with
the measured numbers. Criteria marked in the suite comments as trend checks
use desk-scale scenarios (small surfaces, boosted transmit power) that keep
the operating regime comparable to the full-scale system while staying fast
on one CPU.
"""

import itertools

import numpy as np
import pytest
from scipy.stats import spearmanr

from irsched.channel import (
    AntennaArray,
    ChannelMode,
    ChannelRealization,
    los_probability,
    sample_geometry,
    synthesize_channel,
)
from irsched.clustering import (
    ALGORITHMS,
    ClusteringSettings,
    UeProfile,
    cluster,
)
from irsched.harness import (
    compute_profiles,
    config_from_dict,
    random_small_channels,
    run_oracle_config,
    snr_radio,
)
from irsched.linalg import svd
from irsched.peropt import OptimizerSettings, PerUeOptimum, optimize_ue
from irsched.phases import (
    CONTINUOUS,
    PhaseSet,
    circular_distance,
    quantize_phase,
    wrap_phase,
)
from irsched.scheduler import evaluate, find_z_min


def report(label, ok, detail):
    print(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")


def desk_config(**overrides):
    base = dict(
        name="acceptance",
        seed=42,
        realizations=100,
        geometry=dict(num_ues=40),
        arrays=dict(gnb=[4, 4], ue=[2, 1], irs=[8, 16]),
        radio=dict(tx_power_dbm=67.0),
        channel=dict(modes=["plos"]),
        phase_sets=["continuous"],
        algorithms=["cwc"],
        z_values=[1],
    )
    for key, val in overrides.items():
        if isinstance(val, dict):
            base[key] = {**base[key], **val}
        else:
            base[key] = val
    return config_from_dict(base)


# ---------------------------------------------------------------------------
# shared heavy fixture: K=40, N_I=128 (8H x 16V), pLoS, 100 realizations


FIG2_Z = [1, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40]


@pytest.fixture(scope="module")
def fig2_data():
    cfg = desk_config()
    algs = list(ALGORITHMS) + ["unclustered"]
    n_r = cfg.realizations
    cbar = {a: np.zeros((len(FIG2_Z), n_r)) for a in algs}
    perc = {a: np.zeros((len(FIG2_Z), n_r)) for a in algs}
    for i in range(n_r):
        profile = compute_profiles(cfg, "plos", None, i)
        for alg, (zi, z) in itertools.product(algs, enumerate(FIG2_Z)):
            settings = ClusteringSettings(
                algorithm=alg, z_max=z, phase_set=CONTINUOUS, mu=cfg.mu, seed=cfg.seed
            )
            rep = evaluate(cluster(profile, settings, cfg.radio), profile, cfg.radio)
            cbar[alg][zi, i] = rep.avg_sum_capacity / 1e6
            perc[alg][zi, i] = rep.percentile_capacity / 1e6
    return cfg, cbar, perc


def paired_margin(a, b):
    """Mean of a-b and the standard error of that mean over realizations."""
    diff = a - b
    return float(diff.mean()), float(diff.std(ddof=1) / np.sqrt(diff.size))


def test_criterion_01_full_budget_matches_unclustered():
    # every algorithm at Z=K reproduces the unclustered average capacity
    cfg = desk_config(
        realizations=20,
        geometry=dict(num_ues=10),
        arrays=dict(irs=[8, 4]),
        phase_sets=["continuous", 1, 2],
    )
    worst = 0.0
    for bits in cfg.phase_sets:
        for i in range(cfg.realizations):
            profile = compute_profiles(cfg, "plos", bits, i)
            base = evaluate(
                cluster(profile, ClusteringSettings(algorithm="unclustered", z_max=1)),
                profile,
                cfg.radio,
            ).avg_sum_capacity
            for alg in ALGORITHMS:
                settings = ClusteringSettings(
                    algorithm=alg, z_max=10, phase_set=cfg.phase_set(bits)
                )
                got = evaluate(
                    cluster(profile, settings, cfg.radio), profile, cfg.radio
                ).avg_sum_capacity
                worst = max(worst, abs(got - base) / base)
    ok = worst <= 1e-9
    report("criterion 1", ok, f"max relative deviation {worst:.2e}")
    assert ok


def test_criterion_02_optimizer_vs_exhaustive():
    # 6-element surface, 1-bit phases: all 64 configurations enumerable
    radio = snr_radio(50.0)
    pset = PhaseSet(bits=1)
    ratios = []
    for seed in range(50):
        g, h = random_small_channels(seed, 2, 6, 2)
        ratios.append(run_oracle_config(g, h, pset, radio).ratio)
    ratios = np.array(ratios)
    ok = ratios.min() >= 0.9 and np.median(ratios) >= 0.98
    report(
        "criterion 2",
        ok,
        f"min ratio {ratios.min():.4f}, median {np.median(ratios):.4f}",
    )
    assert ok


def test_criterion_03_convergence_speed():
    # full-array desk analog: N_g=16, N_U=2, N_I=128, continuous phases
    cfg = desk_config(radio=dict(tx_power_dbm=33.0))
    gnb, irs, ue = cfg.array("gnb"), cfg.array("irs"), cfg.array("ue")
    fast = 0
    for seed in range(200):
        geom = sample_geometry(seed, 1, cfg.cell_radius_m)
        chan = synthesize_channel(
            seed + 5000, geom, gnb, irs, ue, ChannelMode.PLOS, cfg.carrier_ghz
        )
        opt = optimize_ue(chan.g[0], chan.h, CONTINUOUS, OptimizerSettings(), cfg.radio)
        fast += opt.converged and opt.iterations_used <= 10
    frac = fast / 200
    ok = frac >= 0.95
    report("criterion 3", ok, f"converged within 10 iterations in {frac:.1%} of seeds")
    assert ok


def test_criterion_04_monotone_in_budget(fig2_data):
    cfg, cbar, _ = fig2_data
    rhos = {}
    max_dev = 0.0
    base = cbar["unclustered"].mean(axis=1)[-1]
    for alg in ALGORITHMS:
        means = cbar[alg].mean(axis=1)
        rhos[alg] = spearmanr(FIG2_Z, means).statistic
        max_dev = max(max_dev, abs(means[-1] - base) / base)
    ok = min(rhos.values()) >= 0.95 and max_dev <= 1e-9
    report(
        "criterion 4",
        ok,
        f"min Spearman rho {min(rhos.values()):.3f}, full-budget deviation {max_dev:.2e}",
    )
    assert ok


def test_criterion_05_cwc_leads_in_average_capacity(fig2_data):
    cfg, cbar, _ = fig2_data
    ok = True
    details = []
    for z in (8, 20):  # 0.2K and 0.5K
        zi = FIG2_Z.index(z)
        for rival in ("km", "hc", "kmed", "icwc"):
            margin, se = paired_margin(cbar["cwc"][zi], cbar[rival][zi])
            ok &= margin > se
            details.append(f"Z={z} cwc-{rival}={margin:.2f}±{se:.2f}")
        gap = abs(cbar["cwc"][zi].mean() - cbar["oscbc"][zi].mean()) / cbar["cwc"][zi].mean()
        ok &= gap <= 0.1
        details.append(f"Z={z} oscbc gap {gap:.3f}")
    report("criterion 5", ok, "; ".join(details))
    assert ok


def test_criterion_06_icwc_leads_in_percentile(fig2_data):
    cfg, _, perc = fig2_data
    ok = True
    details = []
    for z in (20, 32):  # 0.5K and 0.8K
        zi = FIG2_Z.index(z)
        for rival in ("cwc", "oscbc"):
            margin, se = paired_margin(perc["icwc"][zi], perc[rival][zi])
            ok &= margin > se
            details.append(f"Z={z} icwc-{rival}={margin:.2f}±{se:.2f}")
    report("criterion 6", ok, "; ".join(details))
    assert ok


def test_criterion_07_quantization_loss():
    cfg = desk_config(
        realizations=30, geometry=dict(num_ues=10), arrays=dict(irs=[8, 4])
    )
    means = {}
    for bits in (None, 1, 2):
        rates = [
            compute_profiles(cfg, "plos", bits, i).rates().mean()
            for i in range(cfg.realizations)
        ]
        means[bits] = float(np.mean(rates))
    loss1 = (means[None] - means[1]) / means[None]
    loss2 = (means[None] - means[2]) / means[None]
    ok = (
        means[None] > means[2] > means[1]
        and 0.15 <= loss1 <= 0.35
        and loss2 <= 0.10
    )
    report("criterion 7", ok, f"b=1 loss {loss1:.3f}, b=2 loss {loss2:.3f}")
    assert ok


def test_criterion_08_reconfiguration_halving():
    details = []
    ok = True
    for k, irs in ((20, [8, 8]), (40, [8, 16])):
        cfg = desk_config(geometry=dict(num_ues=k), arrays=dict(irs=irs))
        template = ClusteringSettings(algorithm="cwc", z_max=1, seed=cfg.seed)
        z_mins = []
        for seed in range(20):
            profile = compute_profiles(cfg, "plos", None, seed)
            z_mins.append(find_z_min([profile], template, 0.8, cfg.radio))
        mean_z = float(np.mean(z_mins))
        ok &= mean_z <= 0.55 * k
        details.append(f"K={k}: mean Z_min {mean_z:.1f} (bound {0.55 * k:.1f})")
    report("criterion 8", ok, "; ".join(details))
    assert ok


def test_criterion_09_average_los_probability():
    # Monte-Carlo mean of the LoS probability over the coverage geometry
    geom = sample_geometry(123, 100_000, 167.0, gnb=(0.0, 0.0), irs=(75.0, 100.0))
    mean_p = float(np.mean(los_probability(geom.irs_ue_distances())))
    ok = abs(mean_p - 0.35) <= 0.02
    report("criterion 9", ok, f"mean LoS probability {mean_p:.4f} (target 0.35±0.02)")
    assert ok


def test_criterion_10_channel_mode_ordering():
    cfg = desk_config(
        realizations=30,
        geometry=dict(num_ues=20),
        arrays=dict(irs=[8, 8]),
        channel=dict(modes=["dlos", "plos", "nlos"]),
        seed=11,
    )
    settings = ClusteringSettings(algorithm="cwc", z_max=10, seed=cfg.seed)
    vals = {}
    for mode in ("dlos", "plos", "nlos"):
        per_real = []
        for i in range(cfg.realizations):
            profile = compute_profiles(cfg, mode, None, i)
            per_real.append(
                evaluate(cluster(profile, settings, cfg.radio), profile, cfg.radio)
                .avg_sum_capacity
                / 1e6
            )
        vals[mode] = np.array(per_real)
    m1, s1 = paired_margin(vals["dlos"], vals["plos"])
    m2, s2 = paired_margin(vals["plos"], vals["nlos"])
    ratio = vals["dlos"].mean() / vals["plos"].mean()
    ok = m1 > s1 and m2 > s2 and ratio >= 1.5
    report(
        "criterion 10",
        ok,
        f"dlos-plos {m1:.1f}±{s1:.1f}, plos-nlos {m2:.1f}±{s2:.1f}, ratio {ratio:.2f}",
    )
    assert ok


def _random_tiny_profile(rng, k=6, n_i=4, n_u=2, n_g=2):
    h = rng.standard_normal((n_i, n_g)) + 1j * rng.standard_normal((n_i, n_g))
    g = rng.standard_normal((k, n_u, n_i)) + 1j * rng.standard_normal((k, n_u, n_i))
    chan = ChannelRealization(
        h=h, g=g, link_los=np.ones(k, dtype=bool), lsfc=np.ones(k), gnb_irs_lsfc=1.0
    )
    thetas = rng.uniform(-np.pi, np.pi, (k, n_i))
    rates = rng.uniform(0.1, 5.0, k)
    w = np.ones(n_g, dtype=complex) / np.sqrt(n_g)
    v = np.ones(n_u, dtype=complex) / np.sqrt(n_u)
    optima = tuple(
        PerUeOptimum(
            theta=thetas[i], w=w, v=v,
            achievable_rate=float(rates[i]), iterations_used=1, converged=True,
        )
        for i in range(k)
    )
    return UeProfile(optima=optima, channels=chan)


def test_criterion_11_property_suites():
    rng = np.random.default_rng(0)
    radio = snr_radio(10.0)
    ok = True
    details = []

    # circular-distance metric axioms over 1e4 random triples
    a, b, c = rng.uniform(-np.pi, np.pi, (3, 10_000, 6))
    metric_ok = True
    for i in range(10_000):
        dab = circular_distance(a[i], b[i])
        metric_ok &= dab >= 0
        metric_ok &= np.isclose(dab, circular_distance(b[i], a[i]))
        metric_ok &= circular_distance(a[i], a[i]) == 0.0
        metric_ok &= (
            dab <= circular_distance(a[i], c[i]) + circular_distance(c[i], b[i]) + 1e-9
        )
    ok &= metric_ok
    details.append(f"metric axioms {'ok' if metric_ok else 'violated'}")

    # quantization error bound pi / 2^b over 1e4 random phases
    quant_ok = True
    for bits in (1, 2, 3):
        theta = rng.uniform(-np.pi, np.pi, 10_000)
        err = np.abs(wrap_phase(theta - quantize_phase(theta, PhaseSet(bits=bits))))
        quant_ok &= bool(np.all(err <= np.pi / 2**bits + 1e-12))
    ok &= quant_ok
    details.append(f"quantization bound {'ok' if quant_ok else 'violated'}")

    # partition laws for all six algorithms over 1e3 random instances
    part_ok = True
    for trial in range(1000):
        profile = _random_tiny_profile(rng)
        z = int(rng.integers(1, 7))
        alg = ALGORITHMS[trial % len(ALGORITHMS)]
        assignment = cluster(
            profile, ClusteringSettings(algorithm=alg, z_max=z, seed=trial), radio
        )
        m = assignment.membership
        part_ok &= m.shape == (6,)
        part_ok &= assignment.effective_z <= z
        part_ok &= bool(np.all(m >= 0) and np.all(m < assignment.effective_z))
        part_ok &= all(np.any(m == cc) for cc in range(assignment.effective_z))
    ok &= part_ok
    details.append(f"partition laws {'ok' if part_ok else 'violated'}")

    # SVD reconstruction over 1e3 random matrices
    svd_ok = True
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        mat = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        res = svd(mat)
        svd_ok &= bool(
            np.linalg.norm(res.reconstruct() - mat) <= 1e-8 * max(np.linalg.norm(mat), 1.0)
        )
    ok &= svd_ok
    details.append(f"svd reconstruction {'ok' if svd_ok else 'violated'}")

    # per-iteration monotonicity of the continuous-phase optimizer, 200 seeds
    mono_ok = True
    for seed in range(200):
        srng = np.random.default_rng(seed)
        g = srng.standard_normal((2, 8)) + 1j * srng.standard_normal((2, 8))
        h = srng.standard_normal((8, 3)) + 1j * srng.standard_normal((8, 3))
        rates = []
        optimize_ue(g, h, CONTINUOUS, OptimizerSettings(), radio, record_rates=rates)
        mono_ok &= bool(np.all(np.diff(rates) >= -1e-9))
    ok &= mono_ok
    details.append(f"optimizer monotonicity {'ok' if mono_ok else 'violated'}")

    report("criterion 11", ok, "; ".join(details))
    assert ok
