"""Radar orthogonal waveform bank, PSK communication symbols, beamforming."""

import numpy as np

from .linalg import hermitize


class OrthogonalityError(ValueError):
    """More orthogonal waveforms requested than there are snapshots."""


def orthogonal_bank(n_waveforms, n_snapshots):
    """Rows of the T-point DFT: (1/T) * Psi @ Psi^H is the identity exactly."""
    if n_waveforms > n_snapshots:
        raise OrthogonalityError(
            f"cannot build {n_waveforms} orthogonal waveforms over {n_snapshots} snapshots"
        )
    m = np.arange(n_waveforms)[:, None]
    t = np.arange(n_snapshots)[None, :]
    return np.exp(2j * np.pi * m * t / n_snapshots)


def psk_symbols(n_snapshots, order=4, rng=None):
    """Uniform draws from the ``order``-point unit-circle constellation.

    Points sit at odd multiples of pi/order (the usual QPSK set for order 4).
    """
    order = int(order)
    if order < 2 or order & (order - 1):
        raise ValueError(f"PSK order must be a power of two >= 2, got {order}")
    if rng is None:
        rng = np.random.default_rng()
    k = rng.integers(0, order, size=n_snapshots)
    return np.exp(1j * np.pi * (2 * k + 1) / order)


def constellation(order=4):
    k = np.arange(order)
    return np.exp(1j * np.pi * (2 * k + 1) / order)


def beamform(weight, waveform, power=1.0):
    """Transmit block ``conj(w) x(t)``, shape (len(w), T)."""
    weight = np.asarray(weight, dtype=complex)
    if weight.size == 0:
        raise ValueError("beamforming weight is empty")
    return np.sqrt(power) * np.outer(np.conj(weight), np.asarray(waveform))


def covariance_factor(w_cov, rtol=1e-12):
    """Columns w_m with sum_m w_m w_m^H == w_cov (eigen-factorization)."""
    lam, v = np.linalg.eigh(hermitize(np.asarray(w_cov, dtype=complex)))
    keep = lam > rtol * max(lam[-1], 0.0)
    if not np.any(keep):
        return np.zeros((w_cov.shape[0], 0), dtype=complex)
    lam, v = lam[keep][::-1], v[:, keep][:, ::-1]
    return v * np.sqrt(lam)


def radar_emission(w_cov, bank, power=1.0):
    """Radar transmit block sum_m conj(w_m) psi_m(t) for weight covariance ``w_cov``.

    With an orthonormal bank the sample covariance of the emission equals
    conj(w_cov) exactly, so trace-form powers and time averages agree.
    """
    factors = covariance_factor(w_cov)
    k = factors.shape[1]
    if k > bank.shape[0]:
        raise OrthogonalityError(f"weight rank {k} exceeds bank size {bank.shape[0]}")
    return np.sqrt(power) * np.conj(factors) @ bank[:k]


def average_power(samples):
    """Tr of the sample covariance, i.e. mean over t of ||s(t)||^2."""
    samples = np.asarray(samples)
    return float(np.sum(np.abs(samples) ** 2) / samples.shape[-1])
