"""Filon-type cubature of ``F(theta, phi) exp(i kappa cos theta)`` over the sphere.

Only the zero azimuthal mode of ``Q_N F`` survives the phi integration, so

    I_{N,kappa} F = (2/N) sum''_{l=0..N} alpha_l omega_l(kappa),

where ``alpha = dct1(mean_k F(theta_j, phi_k))`` and the weights are the
Chebyshev moments

    omega_l(kappa) = 2 pi int_{-1}^{1} T_l(x) exp(i kappa x) dx.

Moments
-------
Integrating by parts with ``2 T_l = T'_{l+1}/(l+1) - T'_{l-1}/(l-1)`` gives,
for ``l >= 2`` and ``M_l = int T_l exp(i kappa x) dx``,

    -(i kappa/(l-1)) M_{l-1} + 2 M_l + (i kappa/(l+1)) M_{l+1} = B_l,
    B_l = -2 (exp(i kappa) + (-1)^l exp(-i kappa)) / (l^2 - 1).

The homogeneous solutions are ``l i^l J_l(kappa)`` and ``l i^l Y_l(kappa)``.
Below ``l ~ kappa`` both oscillate, so forward recursion is stable; above it
``Y`` dominates and the moments are obtained from a banded boundary-value
problem (Olver's method) closed at ``L >> max(l, kappa)`` by the asymptote
``M_L ~ B_L / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import transforms as tr
from .grid import SphericalSamples, TestFunction, sample
from .interpolant import _dct_weights

__all__ = [
    "CubatureBoundError",
    "MomentVector",
    "CubatureResult",
    "chebyshev_moments",
    "moments",
    "integrate",
    "rate_table",
    "write_rate_table",
]

_SERIES_KAPPA = 1.0
_FORWARD_KAPPA = 2.0


class CubatureBoundError(ArithmeticError):
    """``|I_{N,kappa} F|`` exceeded ``10 * 4 pi * max |F|``."""


@dataclass(frozen=True)
class MomentVector:
    kappa: float
    omega: np.ndarray


@dataclass(frozen=True)
class CubatureResult:
    value: complex
    N: int
    kappa: float
    omega: np.ndarray


def _power_moments_series(kappa: float) -> tuple[complex, complex, complex]:
    # int_{-1}^{1} x^n exp(i kappa x) dx = sum_k (i kappa)^k / k! * 2/(n+k+1), n+k even
    out = []
    for n in range(3):
        total = 0j
        term = 1.0 + 0j  # (i kappa)^k / k!
        for k in range(40):
            if (n + k) % 2 == 0:
                total += term * 2.0 / (n + k + 1)
            term *= 1j * kappa / (k + 1)
        out.append(total)
    return tuple(out)


def _power_moments_closed(kappa: float) -> tuple[complex, complex, complex]:
    s, c = math.sin(kappa), math.cos(kappa)
    k = kappa
    mu0 = 2.0 * s / k
    mu1 = 2j * (s / k**2 - c / k)
    mu2 = 2.0 * (s / k + 2.0 * c / k**2 - 2.0 * s / k**3)
    return mu0, mu1, mu2


def _rhs(ell: np.ndarray, kappa: float) -> np.ndarray:
    e = np.exp(1j * kappa)
    sign = np.where(ell % 2 == 0, 1.0, -1.0)
    return -2.0 * (e + sign * np.conj(e)) / (ell.astype(float) ** 2 - 1.0)


def chebyshev_moments(kappa: float, n: int) -> np.ndarray:
    """``int_{-1}^{1} T_l(x) exp(i kappa x) dx`` for ``l = 0..n``."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    kappa = float(kappa)
    if not math.isfinite(kappa):
        raise ValueError("kappa must be finite")
    if kappa < 0:
        return np.conj(chebyshev_moments(-kappa, n))

    M = np.zeros(n + 1, dtype=np.complex128)
    if kappa == 0.0:
        ell = np.arange(0, n + 1, 2)
        M[0::2] = -2.0 / (ell.astype(float) ** 2 - 1.0)
        return M

    mu0, mu1, mu2 = _power_moments_series(kappa) if kappa < _SERIES_KAPPA else _power_moments_closed(kappa)
    head = [mu0, mu1, 2.0 * mu2 - mu0]
    M[: min(n, 2) + 1] = head[: min(n, 2) + 1]
    if n <= 2:
        return M

    # forward region: l + 1 <= ceil(kappa)
    top = 1
    if kappa >= _FORWARD_KAPPA:
        top = min(n, max(2, int(math.ceil(kappa))))
        ik = 1j * kappa
        for ell in range(2, top):
            b = _rhs(np.array([ell]), kappa)[0]
            M[ell + 1] = (ell + 1) * (M[ell - 1] / (ell - 1) + (b - 2.0 * M[ell]) / ik)
    if top >= n:
        return M

    # boundary-value region: unknowns M_{top+1..L}; M_top known, M_{L+1} ~ B_{L+1}/2
    L = n + int(2 * kappa) + 64
    ell = np.arange(top + 1, L + 1)
    size = ell.size
    ik = 1j * kappa
    ab = np.zeros((3, size), dtype=np.complex128)
    ab[1] = 2.0
    ab[0, 1:] = ik / (ell[:-1] + 1.0)  # super-diagonal: coefficient of M_{l+1} in row l
    ab[2, :-1] = -ik / (ell[1:] - 1.0)  # sub-diagonal: coefficient of M_{l-1} in row l
    rhs = _rhs(ell, kappa)
    rhs[0] += ik / top * M[top]
    m_tail = 0.5 * _rhs(np.array([L + 1]), kappa)[0]
    rhs[-1] -= ik / (L + 1.0) * m_tail
    sol = solve_banded((1, 1), ab, rhs)
    M[top + 1 :] = sol[: n - top]
    return M


def moments(kappa: float, N: int) -> MomentVector:
    """Cubature weights ``omega_l(kappa) = 2 pi int T_l exp(i kappa x)``, ``l = 0..N``."""
    return MomentVector(float(kappa), 2.0 * np.pi * chebyshev_moments(kappa, N))


def integrate(samples: SphericalSamples, kappa: float) -> CubatureResult:
    """Approximate ``int F exp(i kappa cos theta) dS`` from grid samples."""
    N = samples.N
    f0 = samples.values.mean(axis=1)
    alpha = tr.dct1(f0, N)
    omega = moments(kappa, N).omega
    value = complex((2.0 / N) * np.sum(_dct_weights(N) * alpha * omega))
    bound = 10.0 * 4.0 * np.pi * float(np.max(np.abs(samples.values)))
    if not abs(value) <= bound:
        raise CubatureBoundError(f"|I| = {abs(value):.6e} exceeds sanity bound {bound:.6e} (N={N}, kappa={kappa})")
    return CubatureResult(value, N, float(kappa), omega)


def rate_table(
    fn: TestFunction,
    N_list,
    kappa_list,
    N_ref: int | None = None,
) -> np.ndarray:
    """``|I_kappa F - I_{N,kappa} F|`` over ``N_list x kappa_list``.

    The reference is the cubature itself at ``N_ref`` (default
    ``4 * max(N_list)``).
    """
    N_list = [int(n) for n in N_list]
    kappa_list = [float(k) for k in kappa_list]
    if N_ref is None:
        N_ref = 4 * max(N_list)
    ref_samples = sample(fn, N_ref)
    ref = [integrate(ref_samples, k).value for k in kappa_list]
    out = np.empty((len(N_list), len(kappa_list)))
    for i, N in enumerate(N_list):
        s = sample(fn, N)
        for j, k in enumerate(kappa_list):
            out[i, j] = abs(integrate(s, k).value - ref[j])
    return out


def write_rate_table(path, N_list, kappa_list, errors: np.ndarray) -> str:
    """CSV: first row the kappa values, first column N, cells absolute errors."""
    lines = ["N\\kappa," + ",".join(f"{k:g}" for k in kappa_list)]
    for N, row in zip(N_list, errors):
        lines.append(f"{int(N)}," + ",".join(f"{e:.3e}" for e in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text
