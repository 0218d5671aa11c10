"""Core data types: dynamic networks, covers and their matrix views."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp


def _as_snapshot(a, n: int) -> sp.csr_matrix:
    a = sp.csr_matrix(a, dtype=np.int8)
    if a.shape != (n, n):
        raise ValueError(f"snapshot has shape {a.shape}, expected {(n, n)}")
    a.setdiag(0)
    a.eliminate_zeros()
    if a.nnz and (a.data != 1).any():
        raise ValueError("snapshot entries must be 0/1")
    if (a != a.T).nnz:
        raise ValueError("snapshot adjacency must be symmetric")
    a.sort_indices()
    return a


class DynamicNetwork:
    """Ordered sequence of undirected snapshots on a fixed node set.

    Snapshots are stored as symmetric CSR matrices with no diagonal; the
    convention ``A_ii = 1`` is applied by consumers, never stored.

    Parameters
    ----------
    n : int
        Number of nodes shared by every snapshot.
    snapshots : sequence of sparse or dense (n, n) 0/1 matrices
    """

    def __init__(self, n: int, snapshots: Sequence):
        if n < 1:
            raise ValueError("n must be positive")
        if len(snapshots) == 0:
            raise ValueError("a dynamic network needs at least one snapshot")
        self.n = int(n)
        self.snapshots = tuple(_as_snapshot(a, self.n) for a in snapshots)
        self._degrees = tuple(
            np.asarray(a.sum(axis=1)).ravel().astype(np.float64) for a in self.snapshots
        )

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Iterable[tuple[int, int]]]) -> "DynamicNetwork":
        """Build from one iterable of ``(u, v)`` pairs per snapshot."""
        snaps = []
        for es in edges:
            es = [(u, v) for u, v in es if u != v]
            if es:
                u, v = np.array(es, dtype=np.int64).T
                rows, cols = np.concatenate([u, v]), np.concatenate([v, u])
            else:
                rows = cols = np.zeros(0, dtype=np.int64)
            a = sp.coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)).tocsr()
            a.data[:] = 1
            snaps.append(a)
        return cls(n, snaps)

    @property
    def T(self) -> int:
        return len(self.snapshots)

    def degrees(self, t: int) -> np.ndarray:
        return self._degrees[t]

    def edge_count(self, t: int) -> int:
        return self.snapshots[t].nnz // 2

    @property
    def total_edges(self) -> int:
        return sum(self.edge_count(t) for t in range(self.T))

    def edges(self, t: int) -> list[tuple[int, int]]:
        """Edges of snapshot ``t`` as sorted ``(u, v)`` pairs with ``u < v``."""
        a = sp.triu(self.snapshots[t], k=1).tocoo()
        return sorted(zip(a.row.tolist(), a.col.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DynamicNetwork):
            return NotImplemented
        return (
            self.n == other.n
            and self.T == other.T
            and all((a != b).nnz == 0 for a, b in zip(self.snapshots, other.snapshots))
        )

    def __repr__(self) -> str:
        return f"DynamicNetwork(n={self.n}, T={self.T}, E={self.total_edges})"


def _canonical_key(c: frozenset) -> tuple:
    return (min(c), len(c), tuple(sorted(c)))


@dataclass(frozen=True)
class Cover:
    """A collection of possibly overlapping communities; uncovered nodes are outliers.

    Communities are stored in canonical order, sorted by ``(min member, size)``
    with the sorted member tuple breaking remaining ties.
    """

    n: int
    communities: tuple[frozenset, ...] = ()

    def __post_init__(self):
        comms = []
        for c in self.communities:
            c = frozenset(int(i) for i in c)
            if not c:
                raise ValueError("empty communities are not allowed")
            if min(c) < 0 or max(c) >= self.n:
                raise ValueError(f"community member out of range for n={self.n}")
            comms.append(c)
        object.__setattr__(self, "communities", tuple(sorted(comms, key=_canonical_key)))

    def __len__(self) -> int:
        return len(self.communities)

    @property
    def outliers(self) -> frozenset:
        covered = frozenset().union(*self.communities) if self.communities else frozenset()
        return frozenset(range(self.n)) - covered

    def memberships(self) -> dict[int, set[int]]:
        """Map each covered node to the indices of its communities."""
        out: dict[int, set[int]] = {}
        for k, c in enumerate(self.communities):
            for i in c:
                out.setdefault(i, set()).add(k)
        return out


@dataclass(frozen=True)
class CoverTimeline:
    """Per-snapshot covers with cross-snapshot community labels.

    ``labels[t][k]`` is the label of ``covers[t].communities[k]``.
    """

    covers: tuple[Cover, ...]
    labels: tuple[tuple[int, ...], ...] = field(default=None)

    def __post_init__(self):
        covers = tuple(self.covers)
        object.__setattr__(self, "covers", covers)
        if self.labels is not None:
            labels = tuple(tuple(int(x) for x in ls) for ls in self.labels)
            if len(labels) != len(covers) or any(len(l) != len(c) for l, c in zip(labels, covers)):
                raise ValueError("labels must align with the communities of every cover")
            object.__setattr__(self, "labels", labels)
        if len({c.n for c in covers}) > 1:
            raise ValueError("all covers in a timeline must share n")

    @property
    def T(self) -> int:
        return len(self.covers)

    @property
    def n(self) -> int:
        return self.covers[0].n

    def labeled(self, t: int) -> list[tuple[int, frozenset]]:
        """``(label, members)`` pairs of snapshot ``t`` sorted by label."""
        if self.labels is None:
            raise ValueError("timeline has no labels")
        return sorted(zip(self.labels[t], self.covers[t].communities), key=lambda x: x[0])


def assignment_of(c: Cover) -> np.ndarray:
    """Cluster assignment matrix ``U`` with ``U[i, k] = 1`` iff ``i`` is in community ``k``."""
    U = np.zeros((c.n, len(c)), dtype=np.int64)
    for k, comm in enumerate(c.communities):
        U[list(comm), k] = 1
    return U


def cover_matrix_of(c: Cover) -> np.ndarray:
    """Cover matrix ``Y = U U^T``; ``Y[i, j]`` counts communities shared by ``i`` and ``j``."""
    U = assignment_of(c)
    return U @ U.T


def trace_norm_of_cover(c: Cover) -> int:
    """Total membership count, which equals the trace norm of the cover matrix."""
    return sum(len(comm) for comm in c.communities)


def cover_from_memberships(n: int, memberships: Mapping[int, Iterable[Hashable]]) -> Cover:
    """Invert a node -> labels view into a :class:`Cover`.

    Nodes absent from ``memberships`` or mapped to no labels become outliers.
    """
    groups: dict[Hashable, set[int]] = {}
    for node, labels in memberships.items():
        if not 0 <= node < n:
            raise ValueError(f"node id {node} out of range for n={n}")
        for lab in labels:
            groups.setdefault(lab, set()).add(int(node))
    return Cover(n, tuple(frozenset(g) for g in groups.values()))


def cover_from_assignment(U: np.ndarray, merge_duplicates: bool = False) -> Cover:
    """Cover from a 0/1 assignment matrix; empty columns are dropped."""
    U = np.asarray(U) != 0
    comms = [frozenset(np.flatnonzero(U[:, k]).tolist()) for k in range(U.shape[1]) if U[:, k].any()]
    if merge_duplicates:
        comms = list(dict.fromkeys(comms))
    return Cover(U.shape[0], tuple(comms))
