"""Experiment configuration: TOML file -> validated dataclasses.

Every table is optional; omitted keys take the desk-scale defaults below.
Unknown keys are rejected with the list of accepted ones. See
``configs/desk.toml`` for a commented example.
"""

import sys
from dataclasses import dataclass, field, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .autoencoder import OPTIMIZERS
from .beamforming import BOB_NULLING
from .contextual import FADING_MODES, PILOT_MODES, RECEIVERS
from .scenario import SceneParams

OUTPUT_ENV = "JCRLAB_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SecrecyConfig:
    antenna_counts: tuple = (4, 8)
    radar_tx_counts: tuple = (8,)
    realizations: int = 50
    r_th: float = 0.0
    eps_converge: float = 1e-5
    m_max: int = 50
    bob_nulling: str = "direct"


@dataclass(frozen=True)
class ConvergenceConfig:
    scenes: int = 100
    n_comm_tx: int = 8


@dataclass(frozen=True)
class RmseConfig:
    snr_db: tuple = (-10.0, 0.0, 10.0, 20.0, 30.0)
    train_variations: tuple = (500, 2000)
    test_variations: int = 500
    n_snapshots: int = 16
    sir_db: float = 0.0
    receivers: tuple = RECEIVERS
    pilot_mode: str = "random"
    fading_mode: str = "fresh"
    shared_network: bool = False


@dataclass(frozen=True)
class TrainSection:
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    momentum: float = 0.9
    patience: int = 20
    optimizer: str = "adam"
    validation_fraction: float = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    output_dir: str = "out"
    scene: SceneParams = field(default_factory=SceneParams)
    secrecy: SecrecyConfig = field(default_factory=SecrecyConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    rmse: RmseConfig = field(default_factory=RmseConfig)
    train: TrainSection = field(default_factory=TrainSection)

    def with_(self, **kw):
        return replace(self, **kw)


SECTIONS = {
    "scene": SceneParams,
    "secrecy": SecrecyConfig,
    "convergence": ConvergenceConfig,
    "rmse": RmseConfig,
    "train": TrainSection,
}


def _coerce(cls, table, where):
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(table) - set(known))
    if unknown:
        raise ConfigError(f"[{where}] unknown key(s) {unknown}; accepted: {sorted(known)}")
    out = {}
    for key, value in table.items():
        default = getattr(cls(), key)
        try:
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise TypeError
                out[key] = value
            elif isinstance(default, tuple):
                if not isinstance(value, list) or not value:
                    raise TypeError
                kind = type(default[0]) if default else float
                out[key] = tuple(kind(v) for v in value)
            elif isinstance(default, int):
                if isinstance(value, bool) or int(value) != value:
                    raise TypeError
                out[key] = int(value)
            elif isinstance(default, float):
                out[key] = float(value)
            else:
                out[key] = type(default)(value)
        except (TypeError, ValueError):
            raise ConfigError(
                f"[{where}] {key} = {value!r} should look like {default!r}") from None
    return out


def _check(cond, msg):
    if not cond:
        raise ConfigError(msg)


def validate(cfg):
    s, r, t = cfg.secrecy, cfg.rmse, cfg.train
    _check(cfg.seed >= 0, "seed must be a nonnegative integer")
    _check(all(n >= 1 for n in s.antenna_counts), "[secrecy] antenna_counts must all be >= 1")
    _check(all(n >= 1 for n in s.radar_tx_counts), "[secrecy] radar_tx_counts must all be >= 1")
    _check(s.realizations >= 1, "[secrecy] realizations must be >= 1")
    _check(s.r_th >= 0, "[secrecy] r_th must be >= 0")
    _check(s.m_max >= 1 and s.eps_converge > 0, "[secrecy] need m_max >= 1 and eps_converge > 0")
    _check(s.bob_nulling in BOB_NULLING, f"[secrecy] bob_nulling must be one of {BOB_NULLING}")
    _check(cfg.convergence.scenes >= 1, "[convergence] scenes must be >= 1")
    _check(cfg.convergence.n_comm_tx >= 1, "[convergence] n_comm_tx must be >= 1")
    _check(all(n >= 2 for n in r.train_variations), "[rmse] train_variations must all be >= 2")
    _check(r.test_variations >= 1, "[rmse] test_variations must be >= 1")
    _check(r.n_snapshots >= cfg.scene.n_radar_tx,
           f"[rmse] n_snapshots={r.n_snapshots} must be >= scene.n_radar_tx={cfg.scene.n_radar_tx} "
           "(one orthogonal radar waveform per antenna)")
    _check(cfg.scene.n_targets >= 1, "[scene] the RMSE experiments need n_targets >= 1")
    _check(set(r.receivers) <= set(RECEIVERS), f"[rmse] receivers must be drawn from {RECEIVERS}")
    _check(r.pilot_mode in PILOT_MODES, f"[rmse] pilot_mode must be one of {PILOT_MODES}")
    _check(r.fading_mode in FADING_MODES, f"[rmse] fading_mode must be one of {FADING_MODES}")
    _check(t.optimizer in OPTIMIZERS, f"[train] optimizer must be one of {OPTIMIZERS}")
    _check(t.epochs >= 1 and t.batch_size >= 1 and t.patience >= 1,
           "[train] epochs, batch_size and patience must be >= 1")
    _check(t.learning_rate > 0, "[train] learning_rate must be > 0")
    _check(0 <= t.validation_fraction < 1, "[train] validation_fraction must be in [0, 1)")
    return cfg


def from_dict(data):
    data = dict(data)
    top = {}
    for key in ("seed", "output_dir"):
        if key in data:
            top[key] = data.pop(key)
    sections = {}
    for name, cls in SECTIONS.items():
        table = data.pop(name, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
        try:
            sections[name] = cls(**_coerce(cls, table, name))
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"[{name}] {e}") from None
    if data:
        raise ConfigError(
            f"unknown top-level key(s) {sorted(data)}; accepted: seed, output_dir, {', '.join(SECTIONS)}")
    if "seed" in top and (isinstance(top["seed"], bool) or not isinstance(top["seed"], int)):
        raise ConfigError(f"seed = {top['seed']!r} must be an integer")
    return validate(ExperimentConfig(**top, **sections))


def load(path=None):
    """Read a TOML config (defaults only when ``path`` is None)."""
    if path is None:
        return validate(ExperimentConfig())
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: not valid TOML ({e})") from None
    return from_dict(data)
