"""Independent reference computations used by the test-suite.

Nothing here calls into the code paths under test.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss


def chebyshev_moments_quadrature(kappa: float, lmax: int, points_per_panel: int = 60) -> np.ndarray:
    """``int_{-1}^{1} T_l(x) exp(i kappa x) dx`` by composite Gauss-Legendre.

    Panels are sized so ``kappa * h / 2 <= 16`` and the count is a power of two
    with ``kappa * h`` exactly representable; the panel phase ``exp(i kappa c)``
    is formed as ``exp(-i kappa) * exp(i p kappa h)`` so no large argument is
    rounded before the trig call.
    """
    t, w = leggauss(points_per_panel)
    panels = 64
    while abs(kappa) * (2.0 / panels) / 2.0 > 16.0:
        panels *= 2
    h = 2.0 / panels
    step = kappa * h  # exact: power-of-two scaling
    out = np.zeros(lmax + 1, dtype=np.complex128)
    chunk = max(1, 2**17 // points_per_panel)
    local = np.exp(1j * kappa * (h / 2.0) * (t + 1.0)) * w * (h / 2.0)
    start_phase = np.exp(-1j * kappa)
    for p0 in range(0, panels, chunk):
        p = np.arange(p0, min(panels, p0 + chunk))
        left = -1.0 + p * h
        x = (left[:, None] + (h / 2.0) * (t[None, :] + 1.0)).ravel()
        weight = (start_phase * np.exp(1j * (p * step))[:, None] * local[None, :]).ravel()
        T_prev, T_cur = np.ones_like(x), x.copy()
        out[0] += np.sum(weight)
        if lmax >= 1:
            out[1] += weight @ T_cur
        for ell in range(1, lmax):
            T_prev, T_cur = T_cur, 2.0 * x * T_cur - T_prev
            out[ell + 1] += weight @ T_cur
    return out
