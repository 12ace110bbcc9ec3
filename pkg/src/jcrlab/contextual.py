"""Contextual receive records for the uncooperative (unknown-channel) regime.

The geometry is fixed; every variation draws fresh fading, fresh target
reflectivities and fresh PSK symbols (``pilot_mode="random"``) or reuses
one pilot block (``"fixed"``). The communication transmitter steers at Bob
(matched filter on the transmit steering) and the radar radiates the
orthogonal bank isotropically (W = I / N_D); neither adapts to the other.

Gains are normalized so the desired component has unit expected power per
complex entry at each receiver, and the interference total sits ``sir_db``
below it. With noise variance 10**(-snr_db/10) the SNR is then the receive
desired-signal power over the noise power at the receiver under test.
"""

from dataclasses import dataclass, replace

import numpy as np

from .autoencoder import vectorize
from .baselines import NullSpaceProjector, SignalTerm, snapshot_basis
from .linalg import trace_power
from .receiver import ReceiveRecord, Scene, receive_case2
from .scenario import build_scene, sample_layout
from .waveform import beamform, orthogonal_bank, psk_symbols, radar_emission

RECEIVERS = ("comm", "radar")
PILOT_MODES = ("random", "fixed")
FADING_MODES = ("fresh", "fixed")

# E[zeta^2] for a unit-mean exponential; target paths carry two such draws
ZETA2 = 2.0


@dataclass(frozen=True)
class ContextParams:
    n_snapshots: int = 16
    snr_db: float = 10.0
    sir_db: float = 0.0
    psk_order: int = 4
    pilot_mode: str = "random"
    fading_mode: str = "fresh"

    def __post_init__(self):
        if self.pilot_mode not in PILOT_MODES:
            raise ValueError(f"pilot_mode must be one of {PILOT_MODES}")
        if self.fading_mode not in FADING_MODES:
            raise ValueError(f"fading_mode must be one of {FADING_MODES}")
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")

    @property
    def noise_var(self):
        return 10 ** (-self.snr_db / 10)


@dataclass(eq=False)
class Variation:
    record: ReceiveRecord
    projected: np.ndarray
    terms: list
    noise_var: float


def _scale_scene(scene, g, noise):
    """Scene with per-receiver desired/interference gains folded into the channels."""
    gd_b, gi_b, gd_r, gi_r = g
    return Scene(
        scene.comm_bob.scaled(gd_b), scene.comm_eve, scene.comm_radar.scaled(gi_r),
        scene.radar_bob.scaled(gi_b), scene.radar_eve,
        [h.scaled(gi_b) for h in scene.target_bob], list(scene.target_eve),
        [h.scaled(gd_r) for h in scene.target_radar],
        noise, noise, noise, dict(scene.meta),
    )


class ContextGenerator:
    """Draws matched variations for one fixed geometry.

    Variation ``i`` of stream ``stream`` depends only on (seed, stream, i),
    so the first 500 of 2000 training variations are the 500-variation set.
    """

    def __init__(self, scene_params, ctx, seed=0):
        if ctx.n_snapshots < scene_params.n_radar_tx:
            raise ValueError(
                f"n_snapshots={ctx.n_snapshots} cannot carry {scene_params.n_radar_tx} orthogonal radar waveforms")
        self.params = scene_params
        self.ctx = ctx
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        self.layout = sample_layout(scene_params, rng)
        self.pilot = psk_symbols(ctx.n_snapshots, ctx.psk_order, rng)
        nominal = replace(self.layout, fading={k: 1.0 for k in self.layout.fading},
                          beta=np.ones(scene_params.n_targets, complex))
        sc = build_scene(scene_params, nominal)
        self.comm_weight = sc.comm_bob.tx_steering / np.linalg.norm(sc.comm_bob.tx_steering)
        self.radar_cov = np.eye(scene_params.n_radar_tx) / scene_params.n_radar_tx
        self.radar_signal = radar_emission(self.radar_cov, orthogonal_bank(scene_params.n_radar_tx, ctx.n_snapshots))
        self.gains = self._gains(sc)

    def _gains(self, sc):
        w_ab = np.outer(self.comm_weight, self.comm_weight.conj())
        w_k = self.radar_cov
        n_b, n_c = sc.comm_bob.shape[0], sc.comm_radar.shape[0]
        bob_d = ZETA2 * trace_power(sc.comm_bob.power_form, w_ab) / n_b
        bob_i = (ZETA2 * trace_power(sc.radar_bob.power_form, w_k)
                 + sum(ZETA2 ** 2 * trace_power(h.power_form, w_k) for h in sc.target_bob)) / n_b
        rad_d = sum(ZETA2 ** 2 * trace_power(h.power_form, w_k) for h in sc.target_radar) / n_c
        rad_i = ZETA2 * trace_power(sc.comm_radar.power_form, w_ab) / n_c
        if rad_d <= 0:
            raise ValueError("radar receiver sees no target return (n_targets = 0?)")
        sir = 10 ** (-self.ctx.sir_db / 10)
        return (1 / np.sqrt(bob_d), np.sqrt(sir / bob_i) if bob_i > 0 else 0.0,
                1 / np.sqrt(rad_d), np.sqrt(sir / rad_i) if rad_i > 0 else 0.0)

    def rng_for(self, stream, index):
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(1, stream, index)))

    def draw(self, stream, index, receiver):
        if receiver not in RECEIVERS:
            raise ValueError(f"receiver must be one of {RECEIVERS}")
        rng = self.rng_for(stream, index)
        p, ctx = self.params, self.ctx
        fading = self.layout.fading
        if ctx.fading_mode == "fresh":
            fading = dict(zip(fading, rng.exponential(1.0, size=len(fading))))
        beta = (rng.standard_normal(p.n_targets) + 1j * rng.standard_normal(p.n_targets)) / np.sqrt(2)
        x = psk_symbols(ctx.n_snapshots, ctx.psk_order, rng) if ctx.pilot_mode == "random" else self.pilot
        unit = _scale_scene(build_scene(p, replace(self.layout, fading=fading, beta=np.ones(p.n_targets, complex))),
                            self.gains, ctx.noise_var)
        scene = replace(unit, target_bob=[h.scaled(b) for h, b in zip(unit.target_bob, beta)],
                        target_eve=[h.scaled(b) for h, b in zip(unit.target_eve, beta)],
                        target_radar=[h.scaled(b) for h, b in zip(unit.target_radar, beta)])
        s_ab = beamform(self.comm_weight, x)
        s_r = self.radar_signal
        bob, _, radar = receive_case2(scene, s_ab, s_r, rng)
        data_prior = None if ctx.pilot_mode == "fixed" else 1.0
        t = ctx.n_snapshots
        if receiver == "comm":
            proj = NullSpaceProjector.for_channel(scene.radar_bob).apply(s_r)
            interf = scene.radar_bob @ proj + sum((h @ proj for h in scene.target_bob), 0)
            projected = bob.clean + interf + bob.noise
            desired = scene.comm_bob @ np.conj(self.comm_weight)
            terms = [self._data_term(desired, x, data_prior, True, t),
                     SignalTerm(scene.radar_bob @ s_r)]
            terms += [SignalTerm(h @ s_r, 1.0) for h in unit.target_bob]
            return Variation(bob, projected, terms, ctx.noise_var)
        proj = NullSpaceProjector.for_channel(scene.comm_radar).apply(s_ab)
        projected = radar.clean + scene.comm_radar @ proj + radar.noise
        leak = scene.comm_radar @ np.conj(self.comm_weight)
        terms = [SignalTerm(h @ s_r, 1.0, True) for h in unit.target_radar]
        terms.append(self._data_term(leak, x, data_prior, False, t))
        return Variation(radar, projected, terms, ctx.noise_var)

    @staticmethod
    def _data_term(signature, x, prior, desired, t):
        if prior is None:
            return SignalTerm(np.outer(signature, x), None, desired)
        return SignalTerm(snapshot_basis(signature, t), prior, desired)

    def dataset(self, stream, n, receiver):
        """Stacked (inputs, targets, variations) for indices 0..n-1 of ``stream``."""
        vs = [self.draw(stream, i, receiver) for i in range(n)]
        x = np.stack([vectorize(v.record.samples) for v in vs])
        y = np.stack([vectorize(v.record.clean) for v in vs])
        return x, y, vs
