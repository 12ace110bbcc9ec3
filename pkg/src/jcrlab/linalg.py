"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

RANK_RTOL = 1e-10


def herm(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hermitize(x):
    return 0.5 * (x + herm(x))


def null_space(rows, rtol=RANK_RTOL):
    """Orthonormal basis (columns) of the right null space of ``rows``.

    Singular values below ``rtol * sigma_max`` count as zero. An all-zero
    input returns the identity.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    n = rows.shape[1]
    if not np.any(rows):
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(rows, full_matrices=True)
    rank = int(np.sum(s > rtol * s[0]))
    return herm(vh[rank:])


def psd_project(x):
    """Project a Hermitian (or real symmetric) matrix onto the PSD cone."""
    lam, v = np.linalg.eigh(hermitize(x))
    lam = np.clip(lam, 0.0, None)
    return (v * lam) @ herm(v)


def min_eig(x):
    return float(np.linalg.eigvalsh(hermitize(x))[0])


def real_embed(x):
    """Map a complex n x n matrix to the real 2n x 2n form [[Re, -Im], [Im, Re]]."""
    x = np.asarray(x)
    re, im = x.real, x.imag
    return np.block([[re, -im], [im, re]])


def real_unembed(y):
    """Inverse of :func:`real_embed`, averaging the redundant blocks."""
    n = y.shape[0] // 2
    re = 0.5 * (y[:n, :n] + y[n:, n:])
    im = 0.5 * (y[n:, :n] - y[:n, n:])
    return re + 1j * im


def power_form(h):
    """Hermitian Q with ``||H conj(w)||^2 == w^H Q w``.

    Transmitters emit ``s(t) = conj(w) x(t)``, so the received power of a
    weight covariance W = w w^H through H is Tr(Q W) with Q = conj(H^H H).
    """
    h = np.asarray(h)
    return np.conj(herm(h) @ h)


def trace_power(q, w_cov):
    return float(np.real(np.trace(q @ w_cov)))
