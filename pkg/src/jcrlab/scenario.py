"""Scene generation from node positions.

One realization draws, in this order: position jitter for Bob and the Eve
estimate, target bearings and ranges, one exponential fading draw per node
pair, and one reflectivity per target. Transmit powers (dB relative to the
unit noise power) are folded into the channel gains.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    EveUncertainty,
    PathLossModel,
    UlaGeometry,
    broadside_angle,
    channel,
    distance,
    draw_reflectivity,
    eve_bounded_alpha,
    path_loss,
    point_at,
    sample_in_disc,
    steering_vector,
    target_channel,
)
from .receiver import Scene

PAIRS = ("AB", "AE", "AD", "CB", "CE")


@dataclass(frozen=True)
class SceneParams:
    n_comm_tx: int = 8
    n_comm_rx: int = 4
    n_radar_tx: int = 8
    n_radar_rx: int = 4
    n_targets: int = 3
    carrier_hz: float = 2e9
    spacing_wavelengths: float = 0.5
    rho0: float = 1e-3
    comm_power_db: float = 130.0
    radar_power_db: float = 140.0
    noise_bob: float = 1.0
    noise_eve: float = 1.0
    noise_radar: float = 1.0
    comm_tx: tuple = (0.0, 0.0)
    bob: tuple = (30.0, 60.0)
    radar: tuple = (120.0, 0.0)
    eve_center: tuple = (-40.0, 70.0)
    eve_radius: float = 5.0
    jitter_m: float = 10.0
    sector_deg: tuple = (-60.0, 60.0)
    target_range_m: tuple = (100.0, 300.0)

    def __post_init__(self):
        for name in ("n_comm_tx", "n_comm_rx", "n_radar_tx", "n_radar_rx"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_targets < 0:
            raise ValueError("n_targets must be >= 0")
        if self.eve_radius < 0 or self.jitter_m < 0:
            raise ValueError("eve_radius and jitter_m must be >= 0")
        lo, hi = self.sector_deg
        if not -90 <= lo <= hi <= 90:
            raise ValueError(f"sector_deg must satisfy -90 <= min <= max <= 90, got {self.sector_deg}")
        r0, r1 = self.target_range_m
        if not 0 < r0 <= r1:
            raise ValueError(f"target_range_m must satisfy 0 < min <= max, got {self.target_range_m}")

    def with_(self, **kw):
        return replace(self, **kw)

    def array(self, n):
        lam = 299_792_458.0 / self.carrier_hz
        return UlaGeometry(int(n), self.spacing_wavelengths * lam, lam)


@dataclass(eq=False)
class Layout:
    """Sampled positions and fading draws of one realization."""

    comm_tx: np.ndarray
    bob: np.ndarray
    radar: np.ndarray
    eve: EveUncertainty
    targets: np.ndarray
    fading: dict = field(default_factory=dict)
    beta: np.ndarray = None


def sample_layout(params, rng):
    p = params
    bob = np.asarray(p.bob, float)
    center = np.asarray(p.eve_center, float)
    if p.jitter_m > 0:
        bob = sample_in_disc(rng, bob, p.jitter_m, 1)[0]
        center = sample_in_disc(rng, center, p.jitter_m, 1)[0]
    radar = np.asarray(p.radar, float)
    geo = p.array(p.n_radar_tx)
    theta = np.deg2rad(rng.uniform(*p.sector_deg, size=p.n_targets))
    ranges = rng.uniform(*p.target_range_m, size=p.n_targets)
    targets = np.array([point_at(geo, radar, t, r) for t, r in zip(theta, ranges)]).reshape(-1, 2)
    names = list(PAIRS)
    for l in range(p.n_targets):
        names += [f"T{l}r", f"T{l}B", f"T{l}E", f"T{l}D"]
    fading = {k: float(v) for k, v in zip(names, rng.exponential(1.0, size=len(names)))}
    beta = draw_reflectivity(rng, 1, p.n_targets)[0]
    return Layout(np.asarray(p.comm_tx, float), bob, radar, EveUncertainty(center, p.eve_radius),
                  targets, fading, beta)


def build_scene(params, layout, eve_position=None):
    """Scene for ``layout``.

    Eve-facing channels use the worst-case bounded gains over the uncertainty
    disc unless ``eve_position`` gives a true Eve location (same fading draws).
    """
    p = params
    a_geo = p.array(p.n_comm_tx)
    b_geo = p.array(p.n_comm_rx)
    c_geo = p.array(p.n_radar_tx)
    d_geo = p.array(p.n_radar_rx)
    amp_c = 10 ** (p.comm_power_db / 20)
    amp_r = 10 ** (p.radar_power_db / 20)
    a_pos, b_pos, r_pos = layout.comm_tx, layout.bob, layout.radar
    e_pos = layout.eve.center if eve_position is None else np.asarray(eve_position, float)
    models = {k: PathLossModel(p.rho0, z) for k, z in layout.fading.items()}

    def gain_to_eve(key, src):
        if eve_position is None:
            return eve_bounded_alpha(models[key], src, layout.eve)
        return path_loss(models[key], src, e_pos)

    # every path leaves its transmitter along the steering toward its receiver
    def steer(geo, at, src):
        return steering_vector(geo, broadside_angle(geo, at, src))

    comm_bob = channel(steer(b_geo, b_pos, a_pos), amp_c * path_loss(models["AB"], a_pos, b_pos),
                       steer(a_geo, a_pos, b_pos))
    comm_eve = channel(steer(b_geo, e_pos, a_pos), amp_c * gain_to_eve("AE", a_pos),
                       steer(a_geo, a_pos, e_pos))
    comm_radar = channel(steer(d_geo, r_pos, a_pos), amp_c * path_loss(models["AD"], a_pos, r_pos),
                         steer(a_geo, a_pos, r_pos))

    radar_bob = channel(steer(b_geo, b_pos, r_pos), amp_r * path_loss(models["CB"], r_pos, b_pos),
                        steer(c_geo, r_pos, b_pos))
    radar_eve = channel(steer(b_geo, e_pos, r_pos), amp_r * gain_to_eve("CE", r_pos),
                        steer(c_geo, r_pos, e_pos))
    t_bob, t_eve, t_rad = [], [], []
    for l, tgt in enumerate(layout.targets):
        c_t = steer(c_geo, r_pos, tgt)
        a_lr = path_loss(models[f"T{l}r"], r_pos, tgt)
        beta = layout.beta[l]
        t_bob.append(target_channel(steer(b_geo, b_pos, tgt), path_loss(models[f"T{l}B"], tgt, b_pos),
                                    beta, amp_r * a_lr, c_t))
        t_eve.append(target_channel(steer(b_geo, e_pos, tgt), gain_to_eve(f"T{l}E", tgt),
                                    beta, amp_r * a_lr, c_t))
        t_rad.append(target_channel(steer(d_geo, r_pos, tgt), path_loss(models[f"T{l}D"], tgt, r_pos),
                                    beta, amp_r * a_lr, c_t))
    meta = {"distance_ab": distance(a_pos, b_pos), "eve_radius": layout.eve.radius}
    return Scene(comm_bob, comm_eve, comm_radar, radar_bob, radar_eve, t_bob, t_eve, t_rad,
                 p.noise_bob, p.noise_eve, p.noise_radar, meta)


def random_scene(params, rng):
    return build_scene(params, sample_layout(params, rng))
