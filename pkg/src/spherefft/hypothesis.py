"""Numerical check of the weighted Chebyshev inequality

    -2 int p^2 (1-x^2)^a T_{2N} dx <= c_H int p^2 (1-x^2)^a dx,   p in P_{N-2},

for ``a in {0, 1, 2}``.  With ``p = sum_j b_{j+1} T_j`` the best constant is

    c_H(N; a) = -2 min_b (b' B b) / (b' A b),

    A_ij = int T_{i-1} T_{j-1} (1-x^2)^a dx,
    B_ij = int T_{i-1} T_{j-1} T_{2N} (1-x^2)^a dx,     i, j = 1..N-1.

Every entry is assembled exactly from ``C_{i+1,j+1} = int T_i T_j`` using
``T_i T_j = (T_{i+j} + T_{|i-j|}) / 2``, ``(1-x^2) = 1/2 - T_2/2`` and
``T_{2N} = 2 T_N^2 - 1``.  The minimum is the smallest eigenvalue of
``R^{-T} B R^{-1}`` where ``A = R'R``.

Index formulas (1-based, ``c`` = entries of ``C``)::

    a_ij(0) = c_ij
    a_ij(1) = c_ij/2 - [c_{i+2,j} + c_{|i-3|+1,j}]/4
    a_ij(2) = [c_{i+2,j+2} + c_{|i-3|+1,j+2} + c_{i+2,|j-3|+1} + c_{|i-3|+1,|j-3|+1}]/16
              - [c_{i+2,j} + c_{|i-3|+1,j}]/4 + c_ij/4
    b_ij    = [a_{i+N,j+N} + a_{|i-1-N|+1,j+N} + a_{i+N,|j-1-N|+1}
               + a_{|i-1-N|+1,|j-1-N|+1}]/2 - a_ij
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigvalsh, solve_triangular

from .transforms import workers

logger = logging.getLogger(__name__)

__all__ = [
    "IndefiniteGramError",
    "ChebyshevGram",
    "HypothesisRow",
    "HypothesisReport",
    "cheb_integral_table",
    "assemble",
    "c_h",
    "iter_rows",
    "verify_range",
    "DESK_N_MAX",
]

ALPHAS = (0, 1, 2)
# dense eigen-solves beyond this are opt-in (``extended=True``)
DESK_N_MAX = 2048


class IndefiniteGramError(RuntimeError):
    """Cholesky factorization of ``A`` failed; ``A`` is SPD by construction, so this is a bug."""


@dataclass(frozen=True)
class ChebyshevGram:
    alpha: int
    N: int
    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class HypothesisRow:
    N: int
    alpha: int
    c_H: float

    @property
    def passed(self) -> bool:
        return self.c_H < 1.0


@dataclass
class HypothesisReport:
    rows: list[HypothesisRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[HypothesisRow]:
        return [r for r in self.rows if not r.passed]

    def max_c_h(self, alpha: int | None = None) -> float:
        vals = [r.c_H for r in self.rows if alpha is None or r.alpha == alpha]
        return max(vals) if vals else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "alpha", "c_H", "pass"])
        for r in self.rows:
            writer.writerow([r.N, r.alpha, repr(r.c_H), int(r.passed)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([dict(asdict(r), passed=r.passed) for r in self.rows], indent=2)


def _cheb_integrals(kmax: int) -> np.ndarray:
    """``I_k = int_{-1}^{1} T_k dx`` for ``k = 0..kmax``."""
    k = np.arange(kmax + 1, dtype=float)
    out = np.zeros(kmax + 1)
    even = np.arange(0, kmax + 1, 2)
    out[even] = -2.0 / (k[even] ** 2 - 1.0)
    return out


def cheb_integral_table(max_index: int) -> np.ndarray:
    """``C[i, j] = int_{-1}^{1} T_i T_j dx`` for ``0 <= i, j <= max_index``.

    Stored 0-based, so ``C[i, j]`` is the 1-based ``C_{i+1, j+1}``.
    """
    if max_index < 0:
        raise ValueError(f"max_index must be >= 0, got {max_index}")
    I = _cheb_integrals(2 * max_index)
    i = np.arange(max_index + 1)
    return 0.5 * (I[i[:, None] + i[None, :]] + I[np.abs(i[:, None] - i[None, :])])


def _table_size(N: int) -> int:
    # largest degree reached: (N-2) + N on each side, plus 2 from each (1-x^2) factor
    return 2 * N + 2


def _weighted(C: np.ndarray, alpha: int, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``int T_p T_q (1-x^2)^alpha dx`` for 0-based degree arrays ``p``, ``q``."""
    if alpha == 0:
        return C[p, q]
    # T_p T_2 = (T_{p+2} + T_{|p-2|}) / 2
    pu, pd = p + 2, np.abs(p - 2)
    half_t2 = 0.5 * (C[pu, q] + C[pd, q])  # int T_p T_2 T_q
    if alpha == 1:
        return 0.5 * C[p, q] - 0.5 * half_t2
    qu, qd = q + 2, np.abs(q - 2)
    t2t2 = 0.25 * (C[pu, qu] + C[pd, qu] + C[pu, qd] + C[pd, qd])  # int T_p T_2 T_2 T_q
    return 0.25 * t2t2 - 0.5 * half_t2 + 0.25 * C[p, q]


def assemble(alpha: int, N: int, C: np.ndarray | None = None) -> ChebyshevGram:
    """Gram matrices ``A(alpha, N)`` and ``B(alpha, N)``, both ``(N-1) x (N-1)``.

    Parameters
    ----------
    alpha : {0, 1, 2}
        Exponent of the weight ``(1 - x^2)``.
    N : int
        ``N >= 2``.
    C : ndarray, optional
        A precomputed :func:`cheb_integral_table` of size at least ``2N + 2``.
    """
    if alpha not in ALPHAS:
        raise ValueError(f"alpha must be one of {ALPHAS}, got {alpha!r}")
    N = int(N)
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    need = _table_size(N)
    if C is None:
        C = cheb_integral_table(need)
    elif C.shape[0] <= need:
        raise ValueError(f"C table too small for N={N}: need size > {need}, got {C.shape[0]}")

    d = np.arange(N - 1)  # Chebyshev degrees 0..N-2
    p, q = d[:, None], d[None, :]
    A = _weighted(C, alpha, p, q)
    # T_p T_N = (T_{p+N} + T_{|p-N|}) / 2 and T_{2N} = 2 T_N^2 - 1
    pu, pd = p + N, np.abs(p - N)
    qu, qd = q + N, np.abs(q - N)
    B = 0.5 * (
        _weighted(C, alpha, pu, qu)
        + _weighted(C, alpha, pd, qu)
        + _weighted(C, alpha, pu, qd)
        + _weighted(C, alpha, pd, qd)
    ) - A
    # the summation order above is not symmetric in (p, q); restore exact symmetry
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    return ChebyshevGram(alpha, N, A, B)


def _min_rayleigh(gram: ChebyshevGram) -> float:
    try:
        R = cholesky(gram.A, lower=False)
    except LinAlgError as exc:
        raise IndefiniteGramError(f"A(alpha={gram.alpha}, N={gram.N}) is not positive definite") from exc
    X = solve_triangular(R, gram.B, trans="T")  # R^{-T} B
    S = solve_triangular(R, X.T, trans="T").T  # R^{-T} B R^{-1}
    S = 0.5 * (S + S.T)
    n = S.shape[0]
    return float(eigvalsh(S, subset_by_index=[0, 0])[0]) if n > 1 else float(S[0, 0])


def c_h(alpha: int, N: int, C: np.ndarray | None = None) -> float:
    """``c_H(N; alpha) = -2 lambda_min(R^{-T} B R^{-1})``."""
    return -2.0 * _min_rayleigh(assemble(alpha, N, C))


def iter_rows(
    N_max: int,
    alphas: Iterable[int] = ALPHAS,
    N_min: int = 2,
    extended: bool = False,
    threads: int | None = None,
) -> Iterator[HypothesisRow]:
    """Rows ``(N, alpha, c_H)`` for ``N = N_min..N_max``, ordered by ``N`` then ``alpha``.

    The cells are independent and are computed on a thread pool
    (``SPHEREFFT_THREADS`` caps its size); the C table is built once.
    """
    alphas = tuple(int(a) for a in alphas)
    for a in alphas:
        if a not in ALPHAS:
            raise ValueError(f"alpha must be one of {ALPHAS}, got {a!r}")
    N_max = int(N_max)
    if N_max < N_min or N_min < 2:
        raise ValueError(f"need 2 <= N_min <= N_max, got N_min={N_min}, N_max={N_max}")
    if N_max > DESK_N_MAX and not extended:
        raise ValueError(f"N_max={N_max} exceeds {DESK_N_MAX}; pass extended=True for the slow sweep")

    C = cheb_integral_table(_table_size(N_max) + 1)
    cells = [(N, a) for N in range(N_min, N_max + 1) for a in alphas]

    def run(cell):
        N, a = cell
        return HypothesisRow(N, a, c_h(a, N, C))

    n_threads = threads or workers() or min(8, os.cpu_count() or 1)
    if n_threads <= 1:
        yield from map(run, cells)
        return
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        # bounded look-ahead keeps rows streaming and lets a failure stop early
        window = 4 * n_threads
        pending = [pool.submit(run, c) for c in cells[:window]]
        nxt = window
        while pending:
            row = pending.pop(0).result()
            if nxt < len(cells):
                pending.append(pool.submit(run, cells[nxt]))
                nxt += 1
            try:
                yield row
            except GeneratorExit:
                for f in pending:
                    f.cancel()
                raise


def verify_range(
    N_max: int,
    alphas: Sequence[int] = ALPHAS,
    fail_fast: bool = True,
    extended: bool = False,
    threads: int | None = None,
) -> HypothesisReport:
    """Evaluate ``c_H`` for ``N = 2..N_max`` and every ``alpha``.

    With ``fail_fast`` the sweep stops at the first row with ``c_H >= 1``
    (that row is included).
    """
    report = HypothesisReport()
    rows = iter_rows(N_max, alphas, extended=extended, threads=threads)
    try:
        for row in rows:
            report.rows.append(row)
            if not row.passed:
                logger.warning("c_H(N=%d, alpha=%d) = %.6f >= 1", row.N, row.alpha, row.c_H)
                if fail_fast:
                    break
    finally:
        rows.close()
    return report
