"""Scenario geometry and stochastic mmWave channel generation.

Everything lives on a 2-D plane. The gNB-IRS link is pure line of sight; the
IRS-UE links follow a simplified clustered-ray model (isotropic elements,
single polarization, no Doppler) scaled by the large-scale amplitude gain of
the street-canyon path-loss formulas.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import ContractViolation

SPEED_OF_LIGHT = 299_792_458.0


class ChannelMode(Enum):
    DLOS = "dlos"
    NLOS = "nlos"
    PLOS = "plos"


@dataclass(frozen=True)
class AntennaArray:
    """Rectangular panel: rows_v vertical by cols_h horizontal elements.

    On the 2-D plane only the horizontal dimension produces phase progression;
    vertical elements sit at broadside.
    """

    rows_v: int
    cols_h: int
    element_spacing: float = 0.5  # in wavelengths

    def __post_init__(self):
        if self.rows_v * self.cols_h < 1:
            raise ContractViolation("array needs at least one element")

    @property
    def size(self) -> int:
        return self.rows_v * self.cols_h


@dataclass(frozen=True)
class ScenarioGeometry:
    gnb_position: np.ndarray
    irs_position: np.ndarray
    cell_radius: float
    ue_positions: np.ndarray  # (K, 2)

    @property
    def num_ues(self) -> int:
        return self.ue_positions.shape[0]

    def irs_ue_distances(self) -> np.ndarray:
        return np.linalg.norm(self.ue_positions - self.irs_position[None, :], axis=1)


@dataclass(frozen=True)
class ChannelModelParams:
    n_clusters_los: int = 12
    n_clusters_nlos: int = 19
    n_rays: int = 20
    rician_k_db: float = 9.0
    ray_spread_deg: float = 5.0


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # (N_I, N_g), IRS <- gNB
    g: np.ndarray  # (K, N_U, N_I), UE <- IRS
    link_los: np.ndarray  # (K,) bool
    lsfc: np.ndarray  # (K,) amplitude gains of the IRS-UE links
    gnb_irs_lsfc: float


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_geometry(
    seed,
    k: int,
    radius: float,
    gnb=(0.0, 0.0),
    irs=(75.0, 100.0),
    half_plane: bool = True,
) -> ScenarioGeometry:
    """Drop K UEs uniformly over the coverage disk around the gNB.

    With half_plane=True the disk is restricted to the x >= 0 half relative to
    the gNB, matching a cell that extends into the positive-x region.
    """
    if k < 1 or radius < 0:
        raise ContractViolation("need k >= 1 and radius >= 0")
    rng = _rng(seed)
    gnb = np.asarray(gnb, dtype=float)
    irs = np.asarray(irs, dtype=float)
    r = radius * np.sqrt(rng.random(k))
    if half_plane:
        ang = rng.uniform(-np.pi / 2, np.pi / 2, k)
    else:
        ang = rng.uniform(-np.pi, np.pi, k)
    ue = gnb[None, :] + np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    return ScenarioGeometry(
        gnb_position=gnb, irs_position=irs, cell_radius=float(radius), ue_positions=ue
    )


def los_probability(d) -> np.ndarray | float:
    """Line-of-sight probability of an IRS-UE link at distance d meters."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ContractViolation("distance must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        far = 18.0 / d + (1.0 - 18.0 / d) * np.exp(-d / 36.0)
    out = np.where(d <= 18.0, 1.0, far)
    return out if out.ndim else float(out)


def sample_link_state(seed, mode: ChannelMode, d) -> np.ndarray | bool:
    """LoS indicator(s): forced by dLoS/NLoS, Bernoulli under pLoS."""
    d = np.asarray(d, dtype=float)
    if mode is ChannelMode.DLOS:
        out = np.ones(d.shape, dtype=bool)
    elif mode is ChannelMode.NLOS:
        out = np.zeros(d.shape, dtype=bool)
    else:
        rng = _rng(seed)
        out = rng.random(d.shape) < los_probability(d)
    return out if out.ndim else bool(out)


def path_loss_db(d: float, fc_ghz: float, los: bool) -> float:
    """UMi street-canyon path loss, shadowing disabled.

    LoS:  32.4 + 21 log10(d) + 20 log10(fc)
    NLoS: max(LoS, 35.3 log10(d) + 22.4 + 21.3 log10(fc))
    """
    if d < 1.0:
        raise ContractViolation(f"distance {d} m below model validity (1 m)")
    if not 0.5 <= fc_ghz <= 100.0:
        raise ContractViolation("carrier frequency outside 0.5-100 GHz")
    pl_los = 32.4 + 21.0 * np.log10(d) + 20.0 * np.log10(fc_ghz)
    if los:
        return float(pl_los)
    pl_nlos = 35.3 * np.log10(d) + 22.4 + 21.3 * np.log10(fc_ghz)
    return float(max(pl_los, pl_nlos))


def amplitude_gain(d: float, fc_ghz: float, los: bool) -> float:
    """Linear amplitude LSFC, 10^(-PL/20)."""
    return 10.0 ** (-path_loss_db(d, fc_ghz, los) / 20.0)


def array_response(array: AntennaArray, angle: float) -> np.ndarray:
    """Unit-modulus steering vector for a planar wave at `angle` off broadside.

    Horizontal elements see a linear phase ramp; vertical rows repeat it.
    """
    cols = np.arange(array.cols_h)
    ramp = np.exp(1j * 2.0 * np.pi * array.element_spacing * cols * np.sin(angle))
    return np.tile(ramp, array.rows_v)


def _azimuth(src: np.ndarray, dst: np.ndarray) -> float:
    d = dst - src
    return float(np.arctan2(d[1], d[0]))


def _diffuse_matrix(
    rng: np.random.Generator,
    rx_array: AntennaArray,
    tx_array: AntennaArray,
    rx_center: float,
    tx_center: float,
    n_clusters: int,
    n_rays: int,
    spread: float,
    total_power: float,
) -> np.ndarray:
    """Sum of clustered rays with random phases; E[|entry|^2] = total_power."""
    powers = rng.exponential(size=n_clusters)
    powers *= total_power / powers.sum()
    out = np.zeros((rx_array.size, tx_array.size), dtype=complex)
    for n in range(n_clusters):
        # cluster central angles uniform in the half-space facing the link
        rx_c = rx_center + rng.uniform(-np.pi / 2, np.pi / 2)
        tx_c = tx_center + rng.uniform(-np.pi / 2, np.pi / 2)
        amp = np.sqrt(powers[n] / n_rays)
        for _ in range(n_rays):
            rx_a = rx_c + rng.normal(0.0, spread)
            tx_a = tx_c + rng.normal(0.0, spread)
            phase = rng.uniform(-np.pi, np.pi)
            out += (
                amp
                * np.exp(1j * phase)
                * np.outer(array_response(rx_array, rx_a), array_response(tx_array, tx_a))
            )
    return out


def synthesize_channel(
    seed,
    geom: ScenarioGeometry,
    gnb_array: AntennaArray,
    irs_array: AntennaArray,
    ue_array: AntennaArray,
    mode: ChannelMode,
    fc_ghz: float,
    params: ChannelModelParams = ChannelModelParams(),
) -> ChannelRealization:
    """Draw one channel realization for every link of the scenario.

    The IRS panel keeps a fixed orientation (broadside toward the gNB) so that
    UEs at different azimuths produce distinct phase signatures across the
    surface. UE arrays point at the IRS; the gNB panel faces the +x axis.
    """
    rng = _rng(seed)
    wavelength = SPEED_OF_LIGHT / (fc_ghz * 1e9)
    irs_boresight = _azimuth(geom.irs_position, geom.gnb_position)
    gnb_boresight = 0.0

    # gNB -> IRS: deterministic LoS rank-one link
    d_gi = float(np.linalg.norm(geom.irs_position - geom.gnb_position))
    gnb_irs_lsfc = amplitude_gain(d_gi, fc_ghz, los=True)
    a_irs_rx = array_response(irs_array, 0.0)  # broadside points at the gNB
    a_gnb_tx = array_response(
        gnb_array, _azimuth(geom.gnb_position, geom.irs_position) - gnb_boresight
    )
    h = (
        gnb_irs_lsfc
        * np.exp(-1j * 2.0 * np.pi * d_gi / wavelength)
        * np.outer(a_irs_rx, a_gnb_tx)
    )

    dists = geom.irs_ue_distances()
    link_los = np.asarray(sample_link_state(rng, mode, dists), dtype=bool).reshape(-1)
    spread = np.deg2rad(params.ray_spread_deg)
    kf = 10.0 ** (params.rician_k_db / 10.0)

    k_ues = geom.num_ues
    g = np.zeros((k_ues, ue_array.size, irs_array.size), dtype=complex)
    lsfc = np.zeros(k_ues)
    for k in range(k_ues):
        d = float(dists[k])
        lsfc[k] = amplitude_gain(d, fc_ghz, los=bool(link_los[k]))
        dep = _azimuth(geom.irs_position, geom.ue_positions[k]) - irs_boresight
        # UE boresight faces the IRS, so the specular arrival is at broadside
        if link_los[k]:
            specular = np.exp(-1j * 2.0 * np.pi * d / wavelength) * np.outer(
                array_response(ue_array, 0.0), array_response(irs_array, dep)
            )
            diffuse = _diffuse_matrix(
                rng, ue_array, irs_array, 0.0, dep,
                params.n_clusters_los, params.n_rays, spread,
                total_power=1.0 / (kf + 1.0),
            )
            g[k] = lsfc[k] * (np.sqrt(kf / (kf + 1.0)) * specular + diffuse)
        else:
            g[k] = lsfc[k] * _diffuse_matrix(
                rng, ue_array, irs_array, 0.0, dep,
                params.n_clusters_nlos, params.n_rays, spread,
                total_power=1.0,
            )
    return ChannelRealization(
        h=h, g=g, link_los=link_los, lsfc=lsfc, gnb_irs_lsfc=gnb_irs_lsfc
    )
