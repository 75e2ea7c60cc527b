"""Normalized associated Legendre functions and spherical harmonics.

``Q_n^m(theta) = sqrt((2n+1)/2 * (n-m)!/(n+m)!) P_n^{|m|}(cos theta)`` with the
Condon-Shortley phase inside ``P_n^m``, so that
``int_0^pi Q_n^m Q_{n'}^m sin(theta) dtheta = delta_{n n'}``.

Values come from the upward fully-normalized three-term recurrence in ``n``
seeded by the sectoral recurrence in ``m``.  ``cos(theta)`` and ``sin(theta)``
enter separately so nothing is formed as ``(1 - x**2)**(m/2)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "legendre_q",
    "legendre_q_table",
    "spherical_harmonic",
    "spherical_harmonic_grad",
]


def _check_index(n: int, m: int) -> None:
    if n < 0:
        raise ValueError(f"degree n must be >= 0, got {n}")
    if abs(m) > n:
        raise ValueError(f"order |m| must be <= n, got n={n}, m={m}")


def legendre_q_table(nmax: int, theta, derivative: bool = False):
    """All ``Q_n^m(theta)`` for ``0 <= m <= n <= nmax``.

    Parameters
    ----------
    nmax : int
        Largest degree.
    theta : array_like
        Colatitudes in radians, any shape.
    derivative : bool
        Also return ``dQ_n^m/dtheta``.

    Returns
    -------
    ndarray
        Shape ``(nmax+1, nmax+1) + theta.shape`` indexed ``[n, m]``; entries
        with ``m > n`` are zero.  A second array of the same shape holds the
        derivatives when requested.
    """
    if nmax < 0:
        raise ValueError(f"nmax must be >= 0, got {nmax}")
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta)
    s = np.sin(theta)
    Q = np.zeros((nmax + 1, nmax + 1) + theta.shape)
    dQ = np.zeros_like(Q)

    Q[0, 0] = 1.0 / np.sqrt(2.0)
    for m in range(1, nmax + 1):
        f = -np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        Q[m, m] = f * s * Q[m - 1, m - 1]
        dQ[m, m] = f * (c * Q[m - 1, m - 1] + s * dQ[m - 1, m - 1])
    for m in range(0, nmax):
        f = np.sqrt(2.0 * m + 3.0)
        Q[m + 1, m] = f * c * Q[m, m]
        dQ[m + 1, m] = f * (c * dQ[m, m] - s * Q[m, m])
    for m in range(0, nmax + 1):
        for n in range(m + 2, nmax + 1):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
            Q[n, m] = a * (c * Q[n - 1, m] - b * Q[n - 2, m])
            dQ[n, m] = a * (c * dQ[n - 1, m] - s * Q[n - 1, m] - b * dQ[n - 2, m])
    if derivative:
        return Q, dQ
    return Q


def legendre_q(n: int, m: int, theta, derivative: bool = False):
    """Normalized associated Legendre function ``Q_n^m(theta)``; ``Q_n^{-m} = Q_n^m``."""
    _check_index(n, m)
    out = legendre_q_table(n, theta, derivative=True)
    if derivative:
        return out[0][n, abs(m)], out[1][n, abs(m)]
    return out[0][n, abs(m)]


def _phase(m: int) -> float:
    return -1.0 if ((m + abs(m)) // 2) % 2 else 1.0


def spherical_harmonic(n: int, m: int, theta, phi):
    """``Y_n^m = (-1)^{(m+|m|)/2} Q_n^m(theta) exp(i m phi) / sqrt(2 pi)``."""
    _check_index(n, m)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    q = legendre_q(n, m, theta)
    return _phase(m) * q * np.exp(1j * m * phi) / np.sqrt(2.0 * np.pi)


def spherical_harmonic_grad(n: int, m: int, theta, phi):
    """Partial derivatives ``(dY/dtheta, dY/dphi)`` of :func:`spherical_harmonic`."""
    _check_index(n, m)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    q, dq = legendre_q(n, m, theta, derivative=True)
    e = _phase(m) * np.exp(1j * m * phi) / np.sqrt(2.0 * np.pi)
    return dq * e, 1j * m * q * e
