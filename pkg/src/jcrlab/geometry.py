"""Planar node geometry, ULA steering vectors and rank-1 path-loss channels.

Positions are 2-D numpy arrays in meters. Every array is a uniform linear
array whose axis makes angle ``orientation`` with the x axis; arrival and
departure angles are measured from the array broadside, so only
``sin(theta)`` ever matters.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import power_form

SPEED_OF_LIGHT = 299_792_458.0


class DegenerateGeometryError(ValueError):
    """Two nodes that must be distinct share a position."""


@dataclass(frozen=True)
class UlaGeometry:
    n_elements: int
    element_spacing: float
    wavelength: float
    orientation: float = 0.0

    def __post_init__(self):
        if int(self.n_elements) < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if not self.element_spacing > 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @classmethod
    def half_wavelength(cls, n_elements, carrier_hz, orientation=0.0):
        lam = SPEED_OF_LIGHT / carrier_hz
        return cls(int(n_elements), lam / 2.0, lam, orientation)

    @property
    def axis(self):
        return np.array([np.cos(self.orientation), np.sin(self.orientation)])


@dataclass(frozen=True)
class PathLossModel:
    """Inverse-square gain ``rho0 * zeta * d**-2`` with reference distance 1 m."""

    rho0: float = 1e-3
    fading: float = 1.0

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError(f"rho0 must be > 0, got {self.rho0}")
        if not self.fading >= 0:
            raise ValueError(f"fading draw must be >= 0, got {self.fading}")

    def with_fading(self, zeta):
        return PathLossModel(self.rho0, float(zeta))

    def draw(self, rng):
        """Same model with a fresh unit-mean exponential fading draw."""
        return self.with_fading(rng.exponential(1.0))


@dataclass(frozen=True, eq=False)
class EveUncertainty:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"uncertainty radius must be >= 0, got {self.radius}")

    def contains(self, position):
        return float(np.linalg.norm(np.asarray(position) - self.center)) <= self.radius * (1 + 1e-12)


@dataclass(eq=False)
class ChannelMatrix:
    """H = rx_steering * alpha * tx_steering^T (plain transpose)."""

    matrix: np.ndarray
    alpha: complex
    rx_steering: np.ndarray
    tx_steering: np.ndarray
    _q: np.ndarray = field(default=None, repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def power_form(self):
        if self._q is None:
            self._q = power_form(self.matrix)
        return self._q

    def scaled(self, factor):
        return channel(self.rx_steering, self.alpha * factor, self.tx_steering)

    def __matmul__(self, other):
        return self.matrix @ other


def distance(a, b):
    return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))


def _check_distinct(a, b):
    d = distance(a, b)
    if not np.isfinite(d):
        raise DegenerateGeometryError(f"non-finite coordinates {a}, {b}")
    if d <= 0:
        raise DegenerateGeometryError(f"nodes at {np.asarray(a)} are co-located")
    return d


def steering_vector(geometry, theta):
    n = np.arange(geometry.n_elements)
    phase = 2 * np.pi / geometry.wavelength * geometry.element_spacing * np.sin(theta)
    return np.exp(1j * phase * n)


def broadside_angle(geometry, origin, toward):
    """Angle of ``toward`` seen from an array at ``origin``, from broadside."""
    delta = np.asarray(toward, float) - np.asarray(origin, float)
    d = _check_distinct(origin, toward)
    return float(np.arcsin(np.clip(delta @ geometry.axis / d, -1.0, 1.0)))


def point_at(geometry, origin, theta, rng_m):
    """Position at range ``rng_m`` and broadside angle ``theta`` from an array."""
    axis = geometry.axis
    normal = np.array([-axis[1], axis[0]])
    return np.asarray(origin, float) + rng_m * (np.sin(theta) * axis + np.cos(theta) * normal)


def path_loss(model, a, b):
    d = _check_distinct(a, b)
    return model.rho0 * model.fading * d ** -2


def eve_bounded_alpha(model, source, eve):
    """Worst-case (smallest) gain toward Eve over the uncertainty disc."""
    d = distance(source, eve.center) + eve.radius
    if not d > 0:
        raise DegenerateGeometryError("source sits at the Eve estimate with zero radius")
    return model.rho0 * model.fading * d ** -2


def channel(rx_steer, alpha, tx_steer):
    rx_steer = np.asarray(rx_steer, dtype=complex)
    tx_steer = np.asarray(tx_steer, dtype=complex)
    if rx_steer.size == 0 or tx_steer.size == 0:
        raise ValueError("steering vectors must be nonempty")
    return ChannelMatrix(np.outer(rx_steer * alpha, tx_steer), alpha, rx_steer, tx_steer)


def target_channel(rx_steer, alpha_rx, beta, alpha_tx, radar_steer):
    return channel(rx_steer, alpha_rx * beta * alpha_tx, radar_steer)


def draw_reflectivity(rng, n_pulses, n_targets):
    """Swerling-II reflectivities: one CN(0, 1) draw per (pulse, target)."""
    shape = (n_pulses, n_targets)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sample_in_disc(rng, center, radius, n):
    r = radius * np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0, 2 * np.pi, size=n)
    return np.asarray(center, float) + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)
