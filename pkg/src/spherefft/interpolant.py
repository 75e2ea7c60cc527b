"""FFT-based interpolation onto chi_N from samples on the uniform grid.

Coefficient layout
------------------
``f = ifft(F, axis=phi)`` gives ``2N`` azimuthal columns per latitude row.
Column ``c`` carries the azimuthal frequency

    q(c) = c        if c <= N
    q(c) = c - 2N   if c >  N

so the frequencies in use are exactly ``-N < q <= N``.  Even columns
``c = 2m`` (``m = 0..N-1``) are cosine-transformed over ``j = 0..N`` and stored
as ``alpha[m, 0..N]``; odd columns ``c = 2n-1`` (``n = 1..N``) are
sine-transformed over the interior rows ``j = 1..N-1`` and stored as
``beta[n-1, 0..N-2]`` (``beta[n-1, l-1]`` multiplies ``sin(l theta)``).  The
latitudinal profile of column ``c`` is then

    even:  (2/N) sum''_{l=0..N} alpha[m, l] cos(l theta)
    odd:   (2/N) sum_{l=1..N-1} beta[n-1, l-1] sin(l theta)

and ``Q_N F(theta, phi) = sum_c profile_c(theta) exp(i q(c) phi)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import transforms as tr
from .grid import SphericalSamples, sample
from .harmonics import legendre_q_table

__all__ = [
    "InterpolantCoefficients",
    "build",
    "evaluate",
    "evaluate_tensor",
    "evaluate_grid",
    "reproduce_check",
    "random_sphere_points",
]


@dataclass(frozen=True)
class InterpolantCoefficients:
    N: int
    alpha: np.ndarray  # (N, N+1)
    beta: np.ndarray  # (N, N-1)

    def __post_init__(self):
        N = self.N
        alpha = np.asarray(self.alpha, dtype=np.complex128)
        beta = np.asarray(self.beta, dtype=np.complex128).reshape(N, N - 1)
        if alpha.shape != (N, N + 1):
            raise ValueError(f"alpha must have shape {(N, N + 1)}, got {alpha.shape}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def even_frequencies(self) -> np.ndarray:
        return _frequency(2 * np.arange(self.N), self.N)

    @property
    def odd_frequencies(self) -> np.ndarray:
        return _frequency(2 * np.arange(1, self.N + 1) - 1, self.N)

    def pole_residuals(self) -> np.ndarray:
        """``|p_2m(0)|`` and ``|p_2m(pi)|`` for every nonzero even mode, shape ``(N-1, 2)``."""
        w = _dct_weights(self.N)
        a = self.alpha[1:] * w
        sign = (-1.0) ** np.arange(self.N + 1)
        scale = 2.0 / self.N
        return np.abs(np.stack([scale * a.sum(axis=1), scale * (a * sign).sum(axis=1)], axis=1))

    def to_json(self) -> dict:
        def pairs(a):
            return [[[float(v.real), float(v.imag)] for v in row] for row in a]

        return {"N": self.N, "alpha": pairs(self.alpha), "beta": pairs(self.beta)}

    @classmethod
    def from_json(cls, data: dict) -> "InterpolantCoefficients":
        N = int(data["N"])

        def unpairs(rows, ncol):
            arr = np.array(rows, dtype=float).reshape(N, ncol, 2)
            return arr[..., 0] + 1j * arr[..., 1]

        return cls(N, unpairs(data["alpha"], N + 1), unpairs(data["beta"], N - 1))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "InterpolantCoefficients":
        return cls.from_json(json.loads(Path(path).read_text()))


def _frequency(columns: np.ndarray, N: int) -> np.ndarray:
    return np.where(columns <= N, columns, columns - 2 * N)


def _dct_weights(N: int) -> np.ndarray:
    w = np.ones(N + 1)
    w[0] = w[-1] = 0.5
    return w


# rows of samples per azimuthal block; a block and its transform stay in cache
_BUILD_BLOCK = 32


def build(samples: SphericalSamples) -> InterpolantCoefficients:
    """Coefficients of ``Q_N F`` from grid samples in O(N^2 log N).

    The azimuthal transform runs over blocks of latitude rows, and each block
    is scattered straight into the transposed even/odd column buffers, so no
    full-size intermediate is formed.  The latitudinal transforms then run in
    place along contiguous rows.
    """
    N = samples.N
    v = samples.values
    even = np.empty((N, N + 1), dtype=np.complex128)  # even[m, j] = f[j, 2m]
    odd = np.empty((N, N - 1), dtype=np.complex128)  # odd[n-1, j-1] = f[j, 2n-1]
    for r0 in range(0, N + 1, _BUILD_BLOCK):
        r1 = min(r0 + _BUILD_BLOCK, N + 1)
        f = tr.ifft(v[r0:r1], axis=1)
        even[:, r0:r1] = f[:, 0::2].T
        lo, hi = max(r0, 1), min(r1, N)
        if hi > lo:
            odd[:, lo - 1 : hi - 1] = f[lo - r0 : hi - r0, 1::2].T
    alpha = tr.dct1(even, N, axis=1, overwrite_x=True)
    beta = tr.dst1(odd, N, axis=1, overwrite_x=True)
    return InterpolantCoefficients(N, alpha, beta)


def _profiles(coeffs: InterpolantCoefficients, theta: np.ndarray, derivative: bool = False):
    """Latitudinal profiles at ``theta`` (1-D): even ``(P, N)`` and odd ``(P, N)``."""
    N = coeffs.N
    scale = 2.0 / N
    ell = np.arange(N + 1)
    arg = np.outer(theta, ell)
    cos_m, sin_m = np.cos(arg), np.sin(arg)
    a = (coeffs.alpha * _dct_weights(N)).T  # (N+1, N)
    b = coeffs.beta.T  # (N-1, N)
    even = scale * (cos_m @ a)
    odd = scale * (sin_m[:, 1:N] @ b)
    if not derivative:
        return even, odd
    d_even = -scale * ((sin_m * ell) @ a)
    d_odd = scale * ((cos_m[:, 1:N] * ell[1:N]) @ b)
    return even, odd, d_even, d_odd


def evaluate(coeffs: InterpolantCoefficients, theta, phi) -> np.ndarray | complex:
    """``Q_N F`` at arbitrary parameter points (broadcast ``theta`` with ``phi``)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    shape = theta.shape
    th, ph = theta.ravel(), phi.ravel()
    if not (np.all(np.isfinite(th)) and np.all(np.isfinite(ph))):
        raise ValueError("evaluation points must be finite")
    even, odd = _profiles(coeffs, th)
    val = np.sum(even * np.exp(1j * np.outer(ph, coeffs.even_frequencies)), axis=1)
    val += np.sum(odd * np.exp(1j * np.outer(ph, coeffs.odd_frequencies)), axis=1)
    val = val.reshape(shape)
    return complex(val) if val.ndim == 0 else val


def evaluate_tensor(coeffs: InterpolantCoefficients, theta, phi, partials: bool = False):
    """``Q_N F`` on the tensor product ``theta x phi`` (1-D node arrays).

    Returns an array of shape ``(len(theta), len(phi))``, or a triple
    ``(value, d/dtheta, d/dphi)`` with ``partials=True``.  The partials are
    exact term-by-term derivatives of the trigonometric representation.
    """
    theta = np.asarray(theta, float).ravel()
    phi = np.asarray(phi, float).ravel()
    qe, qo = coeffs.even_frequencies, coeffs.odd_frequencies
    Ee = np.exp(1j * np.outer(qe, phi))
    Eo = np.exp(1j * np.outer(qo, phi))
    if not partials:
        even, odd = _profiles(coeffs, theta)
        return even @ Ee + odd @ Eo
    even, odd, d_even, d_odd = _profiles(coeffs, theta, derivative=True)
    value = even @ Ee + odd @ Eo
    d_theta = d_even @ Ee + d_odd @ Eo
    d_phi = (even * (1j * qe)) @ Ee + (odd * (1j * qo)) @ Eo
    return value, d_theta, d_phi


def evaluate_grid(coeffs: InterpolantCoefficients, M: int) -> np.ndarray:
    """``Q_N F`` on the refined grid ``theta'_j = j pi/(MN)``, ``phi'_k = k pi/(MN)``.

    Zero-padded type-I transforms in theta followed by a length-``2MN``
    transform in phi; output shape ``(MN+1, 2MN)``.
    """
    if int(M) != M or M < 1:
        raise ValueError(f"refinement factor M must be an integer >= 1, got {M!r}")
    N = coeffs.N
    L = M * N
    scale = 2.0 / N

    a = np.zeros((N, L + 1), dtype=np.complex128)
    a[:, : N + 1] = coeffs.alpha
    if M > 1:
        # the coarse sum'' halves l = N, which is no longer an endpoint after padding
        a[:, N] *= 0.5
    even = scale * tr.dct1(a, L, axis=1)  # (N, L+1)

    odd = np.zeros((N, L + 1), dtype=np.complex128)
    if L > 1 and N > 1:
        b = np.zeros((N, L - 1), dtype=np.complex128)
        b[:, : N - 1] = coeffs.beta
        odd[:, 1:L] = scale * tr.dst1(b, L, axis=1)

    spectrum = np.zeros((L + 1, 2 * L), dtype=np.complex128)
    spectrum[:, coeffs.even_frequencies % (2 * L)] += even.T
    spectrum[:, coeffs.odd_frequencies % (2 * L)] += odd.T
    return tr.fft(spectrum, axis=1)


def random_sphere_points(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``n`` points uniformly distributed on the sphere, as ``(theta, phi)``."""
    theta = np.arccos(rng.uniform(-1.0, 1.0, n))
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    return theta, phi


def _harmonic_combination(degree: int, rng: np.random.Generator):
    coef = {}
    for n in range(degree + 1):
        for m in range(-n, n + 1):
            coef[(n, m)] = complex(rng.standard_normal(), rng.standard_normal())

    def fn(theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        Q = legendre_q_table(degree, theta)
        out = np.zeros(theta.shape, dtype=np.complex128)
        for (n, m), c in coef.items():
            sign = -1.0 if ((m + abs(m)) // 2) % 2 else 1.0
            out += c * sign * Q[n, abs(m)] * np.exp(1j * m * phi)
        return out / np.sqrt(2.0 * np.pi)

    scale = max(abs(c) for c in coef.values())
    return fn, scale


def reproduce_check(
    N: int,
    degree: int,
    trials: int = 1000,
    rng: np.random.Generator | int | None = 0,
    relative: bool = True,
) -> float:
    """Max deviation of ``Q_N Y - Y`` for a random spherical polynomial ``Y``.

    ``Y`` is a random complex combination of all ``Y_n^m`` with
    ``n <= degree``; the deviation is taken over ``trials`` random points and
    divided by the largest coefficient magnitude when ``relative`` is set.
    For ``degree < N`` the result should sit at rounding level.
    """
    rng = np.random.default_rng(rng)
    fn, scale = _harmonic_combination(degree, rng)
    coeffs = build(sample(fn, N))
    theta, phi = random_sphere_points(trials, rng)
    dev = float(np.max(np.abs(evaluate(coeffs, theta, phi) - fn(theta, phi))))
    return dev / scale if relative else dev
