"""Exhaustive optimization of the combinatorial objective on tiny instances.

Every candidate cover is scored against every snapshot, and every sequence
of covers is scored as a whole, so the results are exact ground truth for
testing the relaxed solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import Cover, DynamicNetwork, cover_matrix_of
from .objective import modularity_weights, _dense_adjacency

MAX_NODES = 8
MAX_COMMUNITIES = 3


class OracleLimitError(ValueError):
    """Raised when an instance exceeds the brute-force guard rails."""


@dataclass(frozen=True)
class OracleLimits:
    max_communities: int = 2
    max_tuples: int = 5_000_000


@dataclass(frozen=True)
class OracleResult:
    """Optimal value and every cover sequence attaining it."""

    value: float
    optima: tuple[tuple[Cover, ...], ...]
    quality: float
    distance: float

    @property
    def unique(self) -> bool:
        return len(self.optima) == 1


def count_covers(n: int, max_communities: int) -> int:
    """``sum_{k <= c} binom(2^n - 1, k)``: sets of at most ``c`` distinct nonempty subsets."""
    return sum(math.comb(2**n - 1, k) for k in range(max_communities + 1))


def _check(n, max_communities):
    if n < 0 or max_communities < 0:
        raise ValueError("sizes must be non-negative")
    if n > MAX_NODES or max_communities > MAX_COMMUNITIES:
        raise OracleLimitError(
            f"refusing to enumerate n={n}, max_communities={max_communities} "
            f"(limits n<={MAX_NODES}, max_communities<={MAX_COMMUNITIES})"
        )


def enumerate_covers(n: int, max_communities: int, max_multiplicity: int = 1) -> Iterator[Cover]:
    """Yield every cover of ``n`` nodes with at most ``max_communities`` distinct communities.

    The empty cover comes first.  Only ``max_multiplicity=1`` is supported:
    a repeated community never improves the objective.
    """
    _check(n, max_communities)
    if max_multiplicity != 1:
        raise ValueError("only max_multiplicity=1 is supported")
    subsets = [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1, 2**n)]
    for k in range(max_communities + 1):
        for combo in itertools.combinations(subsets, k):
            yield Cover(n, combo)


def _flat_covers(n, max_communities):
    covers = list(enumerate_covers(n, max_communities))
    Ys = np.stack([cover_matrix_of(c).astype(float) for c in covers]) if covers else np.zeros((0, n, n))
    return covers, Ys


def cover_qualities(Ys: np.ndarray, A, include_diagonal: bool = False) -> np.ndarray:
    """``f_A(Y)`` for a stack of cover matrices."""
    n = Ys.shape[1]
    W = modularity_weights(A, include_diagonal)
    C = W.dense()
    Ad = _dense_adjacency(A, n, include_diagonal)
    return -np.abs(C * (Ys - Ad)).sum(axis=(1, 2))


def cover_distances(Ys: np.ndarray, A_next, A_prev, include_diagonal: bool = False,
                    chunk: int = 256) -> np.ndarray:
    """Pairwise ``d`` between all covers: entry ``[a, b]`` is ``d(Y_b -> Y_a)``."""
    n = Ys.shape[1]
    mask = _dense_adjacency(A_next, n, include_diagonal) * _dense_adjacency(A_prev, n, include_diagonal)
    idx = np.flatnonzero(mask.ravel())
    Ym = Ys.reshape(len(Ys), -1)[:, idx]
    out = np.empty((len(Ys), len(Ys)))
    for s in range(0, len(Ys), chunk):
        out[s:s + chunk] = np.abs(Ym[s:s + chunk, None, :] - Ym[None, :, :]).sum(axis=2)
    return out


def brute_force_solve(net: DynamicNetwork, delta: float = math.inf, limits: OracleLimits = OracleLimits(),
                      gamma: float | None = None, include_diagonal: bool = False,
                      budget: float | None = None, rtol: float = 1e-12) -> OracleResult:
    """Exhaustively optimize over all ``T``-tuples of covers.

    By default this maximizes ``sum_t f_t`` subject to ``sum_t d_t <= delta``.
    Passing ``gamma`` instead maximizes ``sum_t f_t - gamma sum_t d_t`` with
    no constraint, the multiplier form used by the solver.  ``budget``
    keeps only covers with ``sum_k |C_k| <= budget``, the discrete
    counterpart of the trace-norm ball.  All maximizers (within ``rtol`` of
    the best value) are returned.
    """
    _check(net.n, limits.max_communities)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if gamma is not None and gamma < 0:
        raise ValueError("gamma must be non-negative")
    N = count_covers(net.n, limits.max_communities)
    if N**net.T > limits.max_tuples:
        raise OracleLimitError(f"{N}^{net.T} cover sequences exceed max_tuples={limits.max_tuples}")
    covers, Ys = _flat_covers(net.n, limits.max_communities)
    if budget is not None:
        keep = [i for i, c in enumerate(covers) if sum(len(x) for x in c.communities) <= budget + 1e-9]
        covers, Ys = [covers[i] for i in keep], Ys[keep]
        N = len(covers)
    T = net.T
    f = [cover_qualities(Ys, a, include_diagonal) for a in net.snapshots]
    d = [cover_distances(Ys, net.snapshots[t + 1], net.snapshots[t], include_diagonal) for t in range(T - 1)]

    def axis(v, t):
        shape = [1] * T
        shape[t] = len(v)
        return v.reshape(shape)

    def pair(m, t):
        # m[a, b] = d(next = a, prev = b) with prev on axis t
        shape = [1] * T
        shape[t], shape[t + 1] = m.shape[1], m.shape[0]
        return m.T.reshape(shape)

    F = sum(axis(v, t) for t, v in enumerate(f))
    D = sum((pair(m, t) for t, m in enumerate(d)), np.zeros([1] * T))
    F, D = np.broadcast_to(F, (N,) * T), np.broadcast_to(D, (N,) * T)
    if gamma is None:
        score = np.where(D <= delta, F, -np.inf)
    else:
        score = F - gamma * D
    best = float(score.max())
    hits = np.argwhere(score >= best - rtol * max(abs(best), 1.0))
    optima = tuple(tuple(covers[i] for i in h) for h in hits)
    first = tuple(hits[0])
    return OracleResult(best, optima, float(F[first]), float(D[first]))


def sequence_objective(seq, net: DynamicNetwork, gamma: float = 0.0, include_diagonal: bool = False) -> float:
    """``sum_t f_t - gamma sum_t d_t`` for a sequence of discrete covers."""
    Ys = [cover_matrix_of(c).astype(float)[None] for c in seq]
    val = sum(float(cover_qualities(Y, a, include_diagonal)[0]) for Y, a in zip(Ys, net.snapshots))
    for t in range(net.T - 1):
        both = np.concatenate([Ys[t + 1], Ys[t]])
        val -= gamma * float(cover_distances(both, net.snapshots[t + 1], net.snapshots[t], include_diagonal)[0, 1])
    return val
