"""Snapshot quality, temporal distance, overlap cap, and their factored gradients.

All pair sums run over ordered pairs ``(i, j)``.  The diagonal is excluded
from quality and distance unless ``include_diagonal`` is set, in which case
the unit-diagonal convention ``A_ii = 1`` is used.  Subgradients take
``sign(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .model import DynamicNetwork


class DegenerateSnapshotError(ValueError):
    """Raised when a snapshot has no edges, so modularity weights are undefined."""


@dataclass(frozen=True)
class WeightMatrix:
    """Penalty weights ``C_ij = |A_ij - k_i k_j / 2M|`` held implicitly.

    Only the adjacency, degrees and ``2M`` are stored; use :meth:`dense`
    for an explicit matrix on small inputs.  ``two_m = inf`` encodes the
    degenerate fallback ``C = A``.
    """

    adjacency: sp.csr_matrix
    degrees: np.ndarray
    two_m: float
    include_diagonal: bool = False

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def dense(self) -> np.ndarray:
        A = self.adjacency.toarray().astype(float)
        k = self.degrees
        C = np.abs(A - np.outer(k, k) / self.two_m)
        diag = np.abs(1.0 - k**2 / self.two_m) if self.include_diagonal else 0.0
        np.fill_diagonal(C, diag)
        return C

    def max_weight(self) -> float:
        """Largest off-diagonal weight.

        Edge weights are scanned exactly; for non-edges the product of the
        two largest degrees is used as a bound.
        """
        A = sp.triu(self.adjacency, k=1).tocoo()
        k = self.degrees
        edge_max = np.abs(1.0 - k[A.row] * k[A.col] / self.two_m).max(initial=0.0)
        top = np.sort(k)[-2:] if self.n > 1 else np.zeros(2)
        return float(max(edge_max, top.prod() / self.two_m))


@dataclass(frozen=True)
class ObjectiveConfig:
    """Knobs of the penalized objective.

    ``gamma = 0`` decouples snapshots.  With ``overlap_allowed = False`` a
    hinge penalty on ``Y_ij > 1`` weighted by ``cap_penalty_weight`` is
    subtracted; ``None`` means ten times the snapshot's largest weight.
    """

    gamma: float = 1.0
    overlap_allowed: bool = True
    cap_penalty_weight: float | None = None
    include_diagonal: bool = False
    cap_diagonal: bool = True

    def __post_init__(self):
        if not 0 <= self.gamma < np.inf:
            raise ValueError("gamma must be finite and non-negative")
        if self.cap_penalty_weight is not None and self.cap_penalty_weight < 0:
            raise ValueError("cap_penalty_weight must be non-negative")


def modularity_weights(A, include_diagonal: bool = False, allow_degenerate: bool = False) -> WeightMatrix:
    """Weights ``C_ij = |A_ij - k_i k_j / 2M|`` for one snapshot.

    An edgeless snapshot raises :class:`DegenerateSnapshotError` unless
    ``allow_degenerate`` is set, in which case ``C = A``.
    """
    A = sp.csr_matrix(A)
    A.setdiag(0)
    A.eliminate_zeros()
    A.sort_indices()
    k = np.asarray(A.sum(axis=1)).ravel().astype(float)
    two_m = float(A.nnz)
    if two_m == 0:
        if not allow_degenerate:
            raise DegenerateSnapshotError("degenerate snapshot: no edges, modularity weights undefined")
        two_m = np.inf
    return WeightMatrix(A, k, two_m, include_diagonal)


def _dense_adjacency(A, n: int, unit_diagonal: bool) -> np.ndarray:
    Ad = A.toarray().astype(float) if sp.issparse(A) else np.array(A, dtype=float)
    if unit_diagonal:
        np.fill_diagonal(Ad, 1.0)
    else:
        np.fill_diagonal(Ad, 0.0)
    return Ad


def snapshot_quality(Y, A, C) -> float:
    """``f_A(Y) = -sum_ij |C_ij (Y_ij - A_ij)|`` for an explicit matrix ``Y``.

    ``C`` is a :class:`WeightMatrix` or a dense array of weights.
    """
    Y = np.asarray(Y, dtype=float)
    if isinstance(C, WeightMatrix):
        Cd, unit = C.dense(), C.include_diagonal
    else:
        Cd, unit = np.asarray(C, dtype=float), True
    Ad = _dense_adjacency(A, Y.shape[0], unit)
    return -float(np.abs(Cd * (Y - Ad)).sum())


def _csr_parts(C: WeightMatrix):
    A = C.adjacency
    return A.indptr, A.indices, C.degrees, C.two_m


def quality_terms(U, C: WeightMatrix, want_cap=False, cap_diagonal=True):
    """Quality, its factored gradient, and optionally the cap hinge with gradient."""
    indptr, indices, deg, two_m = _csr_parts(C)
    return kernels.snapshot_terms(U, indptr, indices, deg, two_m, C.include_diagonal, want_cap, cap_diagonal)


def quality_subgradient_factored(U, A, C: WeightMatrix | None = None) -> np.ndarray:
    """Gradient of ``f(U U^T)`` in ``U``: ``2 S U`` with ``S_ij = -C_ij sign(Y_ij - A_ij)``."""
    C = modularity_weights(A) if C is None else C
    return quality_terms(U, C)[1]


def persisting_pairs(A_a, A_b) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``i < j`` that are edges in both snapshots."""
    both = sp.triu(sp.csr_matrix(A_a).multiply(sp.csr_matrix(A_b)), k=1).tocoo()
    order = np.lexsort((both.col, both.row))
    return both.row[order].astype(np.int64), both.col[order].astype(np.int64)


def temporal_distance(Y_next, Y_prev, A_next, A_prev, include_diagonal: bool = False) -> float:
    """``d = sum_ij A'_ij A_ij |Y'_ij - Y_ij|`` over edges present in both snapshots."""
    Y_next = np.asarray(Y_next, dtype=float)
    n = Y_next.shape[0]
    mask = _dense_adjacency(A_next, n, include_diagonal) * _dense_adjacency(A_prev, n, include_diagonal)
    return float((mask * np.abs(Y_next - np.asarray(Y_prev, dtype=float))).sum())


def distance_terms(U_a, U_b, pairs, include_diagonal=False):
    """Distance between ``U_a U_a^T`` and ``U_b U_b^T`` and gradients for both factors."""
    rows, cols = pairs
    return kernels.persist_terms(U_a, U_b, rows, cols, include_diagonal)


def distance_subgradient_factored(U_self, U_other, A_self, A_other, side: str = "next",
                                  include_diagonal: bool = False) -> np.ndarray:
    """Gradient of ``d`` with respect to ``U_self``.

    ``side`` names which argument of ``d`` the factor occupies.  Since ``d``
    is symmetric in its two cover arguments the result is the same either
    way: ``2 (mask * sign(Y_self - Y_other)) U_self``.
    """
    if side not in ("next", "prev"):
        raise ValueError("side must be 'next' or 'prev'")
    return distance_terms(U_self, U_other, persisting_pairs(A_self, A_other), include_diagonal)[1]


def overlap_cap_penalty(U, diagonal: bool = True) -> tuple[float, np.ndarray]:
    """Hinge ``sum_ij max(Y_ij - 1, 0)`` and its gradient in ``U``.

    Off-diagonal pairs always count; ``diagonal`` also caps each node's
    membership count ``Y_ii``.
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    empty = np.zeros(n + 1, dtype=np.intc)
    _, _, cap, grad = kernels.snapshot_terms(U, empty, empty[:0], np.zeros(n), np.inf, False, True, diagonal)
    return cap, grad


class Problem:
    """Per-network cache of weights, persisting pairs and cap weights."""

    def __init__(self, net: DynamicNetwork, cfg: ObjectiveConfig, allow_degenerate: bool = False):
        self.net = net
        self.cfg = cfg
        self.weights = [
            modularity_weights(a, cfg.include_diagonal, allow_degenerate) for a in net.snapshots
        ]
        self.pairs = [persisting_pairs(net.snapshots[t], net.snapshots[t + 1]) for t in range(net.T - 1)]
        if cfg.overlap_allowed:
            self.cap_weights = [0.0] * net.T
        elif cfg.cap_penalty_weight is not None:
            self.cap_weights = [float(cfg.cap_penalty_weight)] * net.T
        else:
            self.cap_weights = [10.0 * w.max_weight() for w in self.weights]

    def snapshot(self, t, U):
        """Penalized quality of snapshot ``t`` and its gradient."""
        w = self.cap_weights[t]
        q, gq, cap, gc = quality_terms(U, self.weights[t], w > 0, self.cfg.cap_diagonal)
        if w > 0:
            return q - w * cap, gq - w * gc
        return q, gq

    def coupling(self, t, U_t, U_next):
        """``gamma * d(Y^{t+1}, Y^t)`` and its gradients for ``U_t`` and ``U_next``."""
        d, g_next, g_t = distance_terms(U_next, U_t, self.pairs[t], self.cfg.include_diagonal)
        g = self.cfg.gamma
        return g * d, g * g_t, g * g_next


def total_objective(F, net: DynamicNetwork, cfg: ObjectiveConfig, problem: Problem | None = None) -> float:
    """``sum_t f_t - gamma sum_t d_t - sum_t w_t cap_t`` for a factor sequence."""
    problem = problem or Problem(net, cfg)
    value = sum(problem.snapshot(t, F[t])[0] for t in range(net.T))
    if cfg.gamma > 0:
        value -= sum(problem.coupling(t, F[t], F[t + 1])[0] for t in range(net.T - 1))
    return float(value)
