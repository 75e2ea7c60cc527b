"""Uniform spherical-polar grid, sample containers, test functions and sample I/O.

The grid is ``theta_j = j pi / N`` (``j = 0..N``) by ``phi_k = k pi / N``
(``k = 0..2N-1``).  Rows ``j = 0`` and ``j = N`` are the two poles, so the
``(N+1) x 2N`` parameter grid covers ``2N(N-1) + 2`` distinct sphere points.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "SphericalGrid",
    "SphericalSamples",
    "TestFunction",
    "PoleConsistencyError",
    "SampleFileError",
    "BUILTIN_NAMES",
    "builtin",
    "sample",
    "to_cartesian",
    "read_samples",
    "write_samples",
]

BINARY_MAGIC = b"SPH1"


class PoleConsistencyError(ValueError):
    """A pole row varies with azimuth beyond tolerance."""


class SampleFileError(ValueError):
    """Malformed sample file."""


def to_cartesian(theta, phi):
    """Map parameters to points on the unit sphere, returned as ``(x, y, z)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sin(theta)
    return s * np.cos(phi), s * np.sin(phi), np.cos(theta)


@dataclass(frozen=True)
class SphericalGrid:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"grid parameter N must be an integer >= 2, got {self.N!r}")

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.N + 1) * (np.pi / self.N)

    @property
    def phi(self) -> np.ndarray:
        return np.arange(2 * self.N) * (np.pi / self.N)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N + 1, 2 * self.N)

    @property
    def n_points(self) -> int:
        """Number of distinct sphere points, equal to ``dim chi_N``."""
        return 2 * self.N * (self.N - 1) + 2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")


@dataclass(frozen=True)
class SphericalSamples:
    """Values ``F(theta_j, phi_k)`` on :class:`SphericalGrid` ``N``.

    ``values`` is an ``(N+1, 2N)`` complex array.  Construction checks the pole
    rows: each must be constant to within ``pole_tol`` (defaults to
    ``1e-12 * max|F|``).  With ``strict=False`` a violation is only logged.
    """

    N: int
    values: np.ndarray
    strict: bool = field(default=True, compare=False)
    pole_tol: float | None = field(default=None, compare=False)

    def __post_init__(self):
        grid = SphericalGrid(self.N)
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape != grid.shape:
            raise ValueError(f"samples for N={self.N} must have shape {grid.shape}, got {vals.shape}")
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            j, k = bad[0]
            raise ValueError(f"non-finite sample at (j={j}, k={k})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        dev = self.pole_deviation()
        tol = self.tolerance()
        if dev > tol:
            msg = f"pole rows vary with azimuth by {dev:.3e} (tolerance {tol:.3e})"
            if self.strict:
                raise PoleConsistencyError(msg)
            logger.warning(msg)

    @property
    def grid(self) -> SphericalGrid:
        return SphericalGrid(self.N)

    def tolerance(self) -> float:
        if self.pole_tol is not None:
            return float(self.pole_tol)
        scale = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        return 1e-12 * max(scale, np.finfo(float).tiny)

    def pole_deviation(self) -> float:
        north, south = self.values[0], self.values[-1]
        return float(max(np.max(np.abs(north - north[0])), np.max(np.abs(south - south[0]))))


@dataclass(frozen=True)
class TestFunction:
    """A function of ``(theta, phi)`` with optional analytic partials.

    ``evaluate``, ``d_theta`` and ``d_phi`` take broadcastable arrays and
    return arrays.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d_theta: Callable | None = None
    d_phi: Callable | None = None
    smoothness: str = ""

    def __call__(self, theta, phi):
        return self.evaluate(np.asarray(theta, float), np.asarray(phi, float))

    @property
    def has_partials(self) -> bool:
        return self.d_theta is not None and self.d_phi is not None


def _cart_partials(theta, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    x, y, z = st * cp, st * sp, ct
    dth = (ct * cp, ct * sp, -st)
    dph = (-st * sp, st * cp, np.zeros_like(st * cp))
    return (x, y, z), dth, dph


def _f1(theta, phi):
    x, y, z = to_cartesian(theta, phi)
    return 1.0 / (4.0 + x + y + z)


def _f1_grad(theta, phi, which):
    (x, y, z), dth, dph = _cart_partials(theta, phi)
    d = dth if which == 0 else dph
    return -(d[0] + d[1] + d[2]) / (4.0 + x + y + z) ** 2


def _make_power_yz(p: float):
    # (1 - x^2)^p y z with 1 - x^2 = y^2 + z^2 on the sphere (no cancellation)
    def value(theta, phi):
        _, y, z = to_cartesian(theta, phi)
        w = y * y + z * z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(w > 0, np.power(np.where(w > 0, w, 1.0), p) * y * z, 0.0)
        return out

    def grad(theta, phi, which):
        (x, y, z), dth, dph = _cart_partials(theta, phi)
        d = dth if which == 0 else dph
        w = y * y + z * z
        safe = np.where(w > 0, w, 1.0)
        term = p * np.power(safe, p - 1.0) * (-2.0 * x * d[0]) * y * z
        term = term + np.power(safe, p) * (d[1] * z + y * d[2])
        return np.where(w > 0, term, 0.0)

    return value, grad


_INV_SQRT3 = 1.0 / math.sqrt(3.0)


def _f4(theta, phi):
    x, y, z = to_cartesian(theta, phi)
    a = _INV_SQRT3
    return ((a - x) ** 2 + (a - y) ** 2 + (a - z) ** 2) ** 1.5


def _f4_grad(theta, phi, which):
    (x, y, z), dth, dph = _cart_partials(theta, phi)
    d = dth if which == 0 else dph
    a = _INV_SQRT3
    r = np.sqrt((a - x) ** 2 + (a - y) ** 2 + (a - z) ** 2)
    # d(r^3) = (3/2) r d(r^2) and d(r^2) = -2 sum_i (a - x_i) dx_i
    return 3.0 * r * (-((a - x) * d[0] + (a - y) * d[1] + (a - z) * d[2]))


def _partial(grad, which):
    return lambda theta, phi: grad(np.asarray(theta, float), np.asarray(phi, float), which)


def _build_registry() -> dict[str, TestFunction]:
    f2, f2g = _make_power_yz(0.5)
    f3, f3g = _make_power_yz(-0.5)
    return {
        "F1": TestFunction("F1", _f1, _partial(_f1_grad, 0), _partial(_f1_grad, 1), "analytic"),
        "F2": TestFunction("F2", f2, _partial(f2g, 0), _partial(f2g, 1), "H^(4-eps)"),
        "F3": TestFunction("F3", f3, _partial(f3g, 0), _partial(f3g, 1), "H^(2-eps)"),
        "F4": TestFunction("F4", _f4, _partial(_f4_grad, 0), _partial(_f4_grad, 1), "H^(4-eps)"),
        "one": TestFunction(
            "one",
            lambda t, p: np.ones(np.broadcast(t, p).shape),
            lambda t, p: np.zeros(np.broadcast(t, p).shape),
            lambda t, p: np.zeros(np.broadcast(t, p).shape),
            "analytic",
        ),
    }


_REGISTRY = _build_registry()
BUILTIN_NAMES = tuple(_REGISTRY)


def builtin(name: str) -> TestFunction:
    """Look up a built-in test function (``F1``..``F4`` or ``one``)."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; available: {', '.join(BUILTIN_NAMES)}") from None


def sample(fn: Callable, N: int) -> SphericalSamples:
    """Evaluate ``fn`` on grid ``N``; each pole is evaluated once and broadcast."""
    grid = SphericalGrid(N)
    th, ph = grid.mesh()
    vals = np.array(np.broadcast_to(fn(th, ph), grid.shape), dtype=np.complex128)
    for j in (0, N):
        vals[j, :] = np.asarray(fn(np.array(grid.theta[j]), np.array(0.0)), dtype=np.complex128)
    bad = np.argwhere(~np.isfinite(vals))
    if bad.size:
        j, k = bad[0]
        raise ValueError(f"test function returned a non-finite value at (j={j}, k={k})")
    return SphericalSamples(N, vals)


# -- file I/O ----------------------------------------------------------------


def _format_complex(v: complex) -> str:
    if v.imag == 0.0:
        return repr(float(v.real))
    return f"{float(v.real)!r}{float(v.imag):+}j"


def write_samples(samples: SphericalSamples, path, binary: bool | None = None) -> None:
    """Write samples as text (``N=<int>`` header + CSV rows) or binary ``SPH1``.

    Binary is chosen when ``binary`` is true or, if unset, when the suffix is
    ``.sph``/``.bin``.
    """
    path = Path(path)
    if binary is None:
        binary = path.suffix.lower() in (".sph", ".bin")
    if binary:
        data = np.ascontiguousarray(samples.values, dtype="<c16")
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<I", samples.N))
            fh.write(data.tobytes())
        return
    lines = [f"N={samples.N}"]
    for row in samples.values:
        lines.append(",".join(_format_complex(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_samples(path, strict: bool = False) -> SphericalSamples:
    """Read a sample file in either format (detected by the magic bytes)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == BINARY_MAGIC:
        values, N = _parse_binary(raw, path)
    else:
        values, N = _parse_text(raw.decode("utf-8"), path)
    return SphericalSamples(N, values, strict=strict)


def _parse_binary(raw: bytes, path: Path):
    if len(raw) < 8:
        raise SampleFileError(f"{path}: truncated binary header")
    (N,) = struct.unpack("<I", raw[4:8])
    if N < 2:
        raise SampleFileError(f"{path}: N must be >= 2, got {N}")
    expected = (N + 1) * 2 * N * 16
    body = raw[8:]
    if len(body) != expected:
        raise SampleFileError(
            f"{path}: expected {expected} payload bytes for N={N} ({N + 1} rows x {2 * N} columns), got {len(body)}"
        )
    values = np.frombuffer(body, dtype="<c16").reshape(N + 1, 2 * N).astype(np.complex128)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        j, k = bad[0]
        raise SampleFileError(f"{path}: non-finite entry at row {j}, column {k}")
    return values, N


def _parse_text(text: str, path: Path):
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or not lines[0].startswith("N="):
        raise SampleFileError(f"{path}:1: malformed header, expected 'N=<int>'")
    try:
        N = int(lines[0][2:])
    except ValueError:
        raise SampleFileError(f"{path}:1: malformed header {lines[0]!r}") from None
    if N < 2:
        raise SampleFileError(f"{path}:1: N must be >= 2, got {N}")
    rows = lines[1:]
    if len(rows) != N + 1:
        raise SampleFileError(f"{path}: expected {N + 1} rows for N={N}, got {len(rows)}")
    values = np.empty((N + 1, 2 * N), dtype=np.complex128)
    for j, line in enumerate(rows):
        lineno = j + 2
        fields = line.split(",")
        if len(fields) != 2 * N:
            raise SampleFileError(f"{path}:{lineno}: expected {2 * N} columns, got {len(fields)}")
        for k, tok in enumerate(fields):
            try:
                v = complex(tok.strip().replace(" ", ""))
            except ValueError:
                raise SampleFileError(f"{path}:{lineno}: cannot parse entry {k + 1}: {tok!r}") from None
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise SampleFileError(f"{path}:{lineno}: non-finite entry in column {k + 1}")
            values[j, k] = v
    return values, N
