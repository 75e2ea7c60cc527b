"""Type-I sine/cosine transforms and the DFT pair used by the interpolant.

Conventions are fixed here and nowhere else::

    dst1(y)_j = sum_{k=1}^{N-1} y_k sin(k j pi / N),            j = 1..N-1
    dct1(x)_j = sum''_{k=0}^{N} x_k cos(k j pi / N),            j = 0..N
    ifft(z)_j = (1/M) sum_{k=0}^{M-1} z_k exp(-2 pi i k j / M)
    fft(f)_k  = sum_{j=0}^{M-1} f_j exp(+2 pi i k j / M)

``sum''`` halves the first and last terms.  Note that ``ifft`` carries the
negative exponent; numpy/scipy use the opposite assignment, so the fast paths
swap the library routines at this boundary.

Fast paths go through :mod:`scipy.fft` (pocketfft, any length).  The
``naive_*`` functions are O(n^2) direct sums kept as oracles.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.fft as _sfft

__all__ = [
    "TransformLengthError",
    "dst1",
    "idst1",
    "dct1",
    "idct1",
    "ifft",
    "fft",
    "naive_dst1",
    "naive_dct1",
    "naive_ifft",
    "naive_fft",
    "workers",
]


class TransformLengthError(ValueError):
    """Input length does not match the transform's declared domain."""


def workers() -> int | None:
    """Thread cap for scipy.fft, read from ``SPHEREFFT_THREADS``."""
    value = os.environ.get("SPHEREFFT_THREADS")
    if not value:
        return None
    n = int(value)
    return n if n > 0 else None


def _as_array(v) -> np.ndarray:
    a = np.asarray(v)
    return a.astype(np.complex128 if np.iscomplexobj(a) else np.float64, copy=False)


def _check(a: np.ndarray, expected: int, name: str, axis: int) -> None:
    if a.ndim == 0:
        raise TransformLengthError(f"{name}: expected a vector of length {expected}, got a scalar")
    actual = a.shape[axis]
    if actual != expected:
        raise TransformLengthError(f"{name}: expected length {expected}, got {actual}")


def _check_N(N: int, name: str) -> int:
    N = int(N)
    if N < 2:
        raise TransformLengthError(f"{name}: N must be >= 2, got {N}")
    return N


def dst1(y, N: int, axis: int = -1, overwrite_x: bool = False) -> np.ndarray:
    """Type-I discrete sine transform of length ``N - 1`` along ``axis``."""
    N = _check_N(N, "dst1")
    a = _as_array(y)
    _check(a, N - 1, "dst1", axis)
    out = _sfft.dst(a, type=1, axis=axis, overwrite_x=overwrite_x, workers=workers())
    out *= 0.5
    return out


def idst1(b, N: int, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`dst1`; equals ``(2/N) * dst1``."""
    N = _check_N(N, "idst1")
    a = _as_array(b)
    _check(a, N - 1, "idst1", axis)
    out = _sfft.dst(a, type=1, axis=axis, workers=workers())
    out *= 1.0 / N
    return out


def dct1(x, N: int, axis: int = -1, overwrite_x: bool = False) -> np.ndarray:
    """Type-I discrete cosine transform (``sum''`` convention), length ``N + 1``."""
    N = _check_N(N, "dct1")
    a = _as_array(x)
    _check(a, N + 1, "dct1", axis)
    out = _sfft.dct(a, type=1, axis=axis, overwrite_x=overwrite_x, workers=workers())
    out *= 0.5
    return out


def idct1(a, N: int, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`dct1`; equals ``(2/N) * dct1``."""
    N = _check_N(N, "idct1")
    arr = _as_array(a)
    _check(arr, N + 1, "idct1", axis)
    out = _sfft.dct(arr, type=1, axis=axis, workers=workers())
    out *= 1.0 / N
    return out


def ifft(z, axis: int = -1) -> np.ndarray:
    """``(1/M) sum_k z_k exp(-2 pi i k j / M)``: numpy's *forward* FFT over M."""
    a = np.asarray(z, dtype=np.complex128)
    if a.ndim == 0 or a.shape[axis] == 0:
        raise TransformLengthError("ifft: input must be a non-empty vector")
    return _sfft.fft(a, axis=axis, norm="forward", workers=workers())


def fft(f, axis: int = -1) -> np.ndarray:
    """``sum_j f_j exp(+2 pi i k j / M)``: inverse of :func:`ifft`."""
    a = np.asarray(f, dtype=np.complex128)
    if a.ndim == 0 or a.shape[axis] == 0:
        raise TransformLengthError("fft: input must be a non-empty vector")
    return _sfft.ifft(a, axis=axis, norm="forward", workers=workers())


# -- O(n^2) reference sums -------------------------------------------------


def naive_dst1(y, N: int) -> np.ndarray:
    N = _check_N(N, "naive_dst1")
    y = _as_array(y)
    _check(y, N - 1, "naive_dst1", -1)
    k = np.arange(1, N)
    S = np.sin(np.pi * np.outer(k, k) / N)
    return S @ y


def naive_dct1(x, N: int) -> np.ndarray:
    N = _check_N(N, "naive_dct1")
    x = _as_array(x)
    _check(x, N + 1, "naive_dct1", -1)
    k = np.arange(N + 1)
    w = np.ones(N + 1)
    w[0] = w[-1] = 0.5
    C = np.cos(np.pi * np.outer(k, k) / N) * w
    return C @ x


def naive_ifft(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    M = z.shape[-1]
    if M == 0:
        raise TransformLengthError("naive_ifft: input must be a non-empty vector")
    jk = np.outer(np.arange(M), np.arange(M))
    # reduce the integer product mod M before scaling to keep the phase exact
    return np.exp(-2j * np.pi * (jk % M) / M) @ z / M


def naive_fft(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128)
    M = f.shape[-1]
    if M == 0:
        raise TransformLengthError("naive_fft: input must be a non-empty vector")
    jk = np.outer(np.arange(M), np.arange(M))
    return np.exp(2j * np.pi * (jk % M) / M) @ f
