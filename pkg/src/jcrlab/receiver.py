"""Received-signal synthesis and trace-form SINR / rate bookkeeping.

All trace forms use ``Tr(Q W)`` with ``Q = conj(H^H H)`` (see
:func:`jcrlab.linalg.power_form`), which is the received power of the
time-domain emission ``conj(w) x(t)`` for unit-power x.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitize, trace_power

PSD_TOL = 1e-8


class NotPsdError(ValueError):
    pass


@dataclass(eq=False)
class Scene:
    """Every channel of one realization plus the receiver noise powers.

    Eve-facing channels carry the worst-case bounded gains. Transmit powers
    are already folded into the channel gains.
    """

    comm_bob: object
    comm_eve: object
    comm_radar: object
    radar_bob: object
    radar_eve: object
    target_bob: list = field(default_factory=list)
    target_eve: list = field(default_factory=list)
    target_radar: list = field(default_factory=list)
    noise_bob: float = 1.0
    noise_eve: float = 1.0
    noise_radar: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("noise_bob", "noise_eve", "noise_radar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not len(self.target_bob) == len(self.target_eve) == len(self.target_radar):
            raise ValueError("target channel lists differ in length")
        n_a = self.comm_bob.shape[1]
        n_d = self.radar_bob.shape[1]
        for h in (self.comm_eve, self.comm_radar):
            if h.shape[1] != n_a:
                raise ValueError("communication channels disagree on transmit size")
        for h in [self.radar_eve, *self.target_bob, *self.target_eve, *self.target_radar]:
            if h.shape[1] != n_d:
                raise ValueError("radar channels disagree on transmit size")

    @property
    def n_targets(self):
        return len(self.target_radar)

    @property
    def n_comm_tx(self):
        return self.comm_bob.shape[1]

    @property
    def n_radar_tx(self):
        return self.radar_bob.shape[1]

    def without_targets(self):
        return Scene(self.comm_bob, self.comm_eve, self.comm_radar, self.radar_bob,
                     self.radar_eve, [], [], [], self.noise_bob, self.noise_eve,
                     self.noise_radar, dict(self.meta))

    # aggregated power forms used by the optimizers
    def bob_radar_form(self, include_targets=True):
        q = self.radar_bob.power_form.copy()
        if include_targets:
            for h in self.target_bob:
                q = q + h.power_form
        return q

    def eve_radar_form(self):
        q = self.radar_eve.power_form.copy()
        for h in self.target_eve:
            q = q + h.power_form
        return q

    def echo_form(self):
        q = np.zeros((self.n_radar_tx,) * 2, dtype=complex)
        for h in self.target_radar:
            q = q + h.power_form
        return q


@dataclass(eq=False)
class ReceiveRecord:
    """samples = clean + interference + noise, each (N_rx, T)."""

    samples: np.ndarray
    clean: np.ndarray
    interference: np.ndarray = None

    def __post_init__(self):
        if self.samples.shape != self.clean.shape:
            raise ValueError("samples and clean component differ in shape")
        if self.interference is None:
            self.interference = np.zeros_like(self.samples)

    @property
    def n_rx(self):
        return self.samples.shape[0]

    @property
    def n_snapshots(self):
        return self.samples.shape[1]

    @property
    def noise(self):
        return self.samples - self.clean - self.interference


def complex_noise(rng, shape, variance):
    return np.sqrt(variance / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _apply(h, s):
    if h.shape[1] != s.shape[0]:
        raise ValueError(f"channel with {h.shape[1]} inputs applied to {s.shape[0]} streams")
    return h.matrix @ s


def _record(rng, clean, interference, variance):
    noise = complex_noise(rng, clean.shape, variance)
    return ReceiveRecord(clean + interference + noise, clean, interference)


def receive_case2(scene, s_ab, s_radar, rng):
    """Records at Bob, Eve and the radar receiver with target reflections.

    ``s_radar`` is the aggregate radar emission (sum over waveforms). With no
    targets this reduces to the target-free synthesis; noise is drawn for
    Bob, Eve and the radar in that order either way.
    """
    s_ab = np.asarray(s_ab)
    s_radar = np.asarray(s_radar)
    if s_ab.shape[1] != s_radar.shape[1]:
        raise ValueError("communication and radar blocks differ in length")
    out = []
    for direct, cross, targets, var in (
        (scene.comm_bob, scene.radar_bob, scene.target_bob, scene.noise_bob),
        (scene.comm_eve, scene.radar_eve, scene.target_eve, scene.noise_eve),
    ):
        clean = _apply(direct, s_ab)
        interf = _apply(cross, s_radar)
        for h in targets:
            interf = interf + _apply(h, s_radar)
        out.append(_record(rng, clean, interf, var))
    n_rx = scene.comm_radar.shape[0]
    echo = np.zeros((n_rx, s_ab.shape[1]), dtype=complex)
    for h in scene.target_radar:
        echo = echo + _apply(h, s_radar)
    out.append(_record(rng, echo, _apply(scene.comm_radar, s_ab), scene.noise_radar))
    return tuple(out)


def receive_case1(scene, s_ab, s_radar, rng):
    """Records without any target reflections (targets in ``scene`` ignored)."""
    return receive_case2(scene.without_targets(), s_ab, s_radar, rng)


def check_psd(w_cov, name="W"):
    w_cov = np.asarray(w_cov)
    if w_cov.ndim != 2 or w_cov.shape[0] != w_cov.shape[1]:
        raise NotPsdError(f"{name} must be square")
    lam = np.linalg.eigvalsh(hermitize(w_cov))
    if lam[0] < -PSD_TOL * max(1.0, abs(lam[-1])):
        raise NotPsdError(f"{name} has eigenvalue {lam[0]:.3e} < 0")
    return w_cov


def _power(q, w_cov):
    # both factors are PSD, so a negative trace is roundoff from an exact null
    return max(0.0, trace_power(q, w_cov))


def _radar_power(chs, w_k):
    return sum(_power(h.power_form, w_k) for h in chs)


def sinr_bob(scene, w_ab, w_k):
    check_psd(w_ab, "W_AB")
    check_psd(w_k, "W_k")
    sig = _power(scene.comm_bob.power_form, w_ab)
    interf = _radar_power([scene.radar_bob, *scene.target_bob], w_k)
    return sig / (interf + scene.noise_bob)


def sinr_eve_bounded(scene, w_ab, w_k):
    """Eve's SINR with the worst-case gains already stored in ``scene``."""
    check_psd(w_ab, "W_AB")
    check_psd(w_k, "W_k")
    sig = _power(scene.comm_eve.power_form, w_ab)
    interf = _radar_power([scene.radar_eve, *scene.target_eve], w_k)
    return sig / (interf + scene.noise_eve)


def sinr_radar_eavesdropper(scene, w_ab, w_k):
    """Communication SINR at the radar receiver acting as the eavesdropper."""
    check_psd(w_ab, "W_AB")
    check_psd(w_k, "W_k")
    sig = _power(scene.comm_radar.power_form, w_ab)
    return sig / (_radar_power(scene.target_radar, w_k) + scene.noise_radar)


def rate(sinr):
    return float(np.log2(1.0 + sinr))


def secrecy_rate(sinr_b, sinr_e):
    if sinr_b < 0 or sinr_e < 0:
        raise ValueError(f"negative SINR ({sinr_b}, {sinr_e})")
    return max(0.0, rate(sinr_b) - rate(sinr_e))


def radar_rate(scene, w_ab, w_k):
    """Target-return rate at the radar receiver, communication leakage as interference."""
    check_psd(w_ab, "W_AB")
    check_psd(w_k, "W_k")
    echo = _radar_power(scene.target_radar, w_k)
    leak = _power(scene.comm_radar.power_form, w_ab)
    return rate(echo / (leak + scene.noise_radar))


def radar_rate_noise_only(scene, w_k):
    """Return rate with noise-only denominator, as in the joint design's constraint."""
    return rate(_radar_power(scene.target_radar, w_k) / scene.noise_radar)
