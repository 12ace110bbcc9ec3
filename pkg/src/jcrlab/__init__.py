"""Simulation toolkit for co-located MIMO radar and communication links.

Modules cover array geometry and channels, waveforms, receive-side SINR and
secrecy-rate bookkeeping, a small dense SDP solver, cooperative and
secrecy-aware transmit beamforming, a numpy denoising autoencoder with its
baselines, and seeded experiment runners behind the ``jcrlab`` CLI.
"""

__version__ = "0.1.0"
