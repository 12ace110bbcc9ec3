"""Reference interference-mitigation methods.

* Null-space projection: the interfering transmitter pre-multiplies its
  emission by the projector onto the null space of the cross channel.
* Known-channel oracle: per-snapshot linear estimate of the desired
  component when every receive signature is known. This is the reference
  floor in the RMSE tables.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import herm, null_space

RIDGE = 1e-8


class EmptyNullSpaceError(ValueError):
    pass


@dataclass(eq=False)
class NullSpaceProjector:
    basis: np.ndarray

    @classmethod
    def for_channel(cls, cross_channel):
        h = getattr(cross_channel, "matrix", cross_channel)
        basis = null_space(h)
        if basis.shape[1] == 0:
            raise EmptyNullSpaceError(
                f"cross channel of rank {np.linalg.matrix_rank(h)} leaves no null space "
                f"among {h.shape[1]} transmit antennas"
            )
        return cls(basis)

    @property
    def matrix(self):
        return self.basis @ herm(self.basis)

    def apply(self, signal):
        return self.basis @ (herm(self.basis) @ signal)


def null_space_project(cross_channel, radar_signal):
    """Project a transmit block (N_tx x T) so ``cross_channel`` sees nothing of it."""
    return NullSpaceProjector.for_channel(cross_channel).apply(np.asarray(radar_signal))


@dataclass(eq=False)
class SignalTerm:
    """One additive component of a receive record: sum_k coeff_k * basis[k].

    ``basis`` is (K, N_rx, T). ``prior`` holds the coefficient variances of
    unknown coefficients; ``None`` marks a fully known term (coefficient 1).
    """

    basis: np.ndarray
    prior: np.ndarray = None
    desired: bool = False

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=complex)
        if self.basis.ndim == 2:
            self.basis = self.basis[None]
        if self.prior is not None:
            self.prior = np.broadcast_to(np.asarray(self.prior, float), (len(self.basis),)).copy()


def snapshot_basis(signature, n_snapshots):
    """Basis for an unknown per-snapshot stream arriving on ``signature``."""
    sig = np.asarray(signature, dtype=complex)
    out = np.zeros((n_snapshots, sig.size, n_snapshots), dtype=complex)
    out[np.arange(n_snapshots), :, np.arange(n_snapshots)] = sig
    return out


def known_channel_oracle(samples, terms, noise_var, lmmse=True):
    """Estimate the desired component of ``samples`` with every channel known.

    Known terms are subtracted; unknown coefficients are estimated jointly
    over the whole record. With ``lmmse`` the estimate is the linear MMSE one
    under the term priors; otherwise it is least squares, regularized with a
    ridge of 1e-8 (relative to the mean Gram diagonal) when singular.
    """
    samples = np.asarray(samples, dtype=complex)
    resid = samples.copy()
    known_desired = np.zeros_like(samples)
    cols, prior, desired = [], [], []
    for term in terms:
        if term.basis.shape[1:] != samples.shape:
            raise ValueError(f"term basis {term.basis.shape[1:]} does not match record {samples.shape}")
        if term.prior is None:
            total = term.basis.sum(axis=0)
            resid -= total
            if term.desired:
                known_desired += total
            continue
        cols.append(term.basis.reshape(len(term.basis), -1).T)
        prior.append(term.prior)
        desired.append(np.full(len(term.basis), term.desired))
    if not cols:
        return known_desired
    a = np.concatenate(cols, axis=1)
    p = np.concatenate(prior)
    sel = np.concatenate(desired)
    y = resid.ravel()
    if lmmse:
        cov = (a * p) @ herm(a) + noise_var * np.eye(a.shape[0])
        theta = p * (herm(a) @ np.linalg.solve(cov, y))
    else:
        gram = herm(a) @ a
        ridge = RIDGE * max(np.trace(gram).real / gram.shape[0], 1e-300)
        theta = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), herm(a) @ y)
    est = (a[:, sel] @ theta[sel]).reshape(samples.shape)
    return known_desired + est
