"""Planted-structure generators with ground truth.

Every snapshot draws an edge for each unordered pair independently, with
probability ``p_in`` when the two nodes share at least one community and
``p_out`` otherwise (outliers included).  Sharing several communities does
not raise the edge probability.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .model import Cover, CoverTimeline, DynamicNetwork, assignment_of

DEFAULT_P_IN = 0.5
DEFAULT_P_OUT = 0.2


def _rng(seed, t=0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(t)]))


def sample_snapshot(truth: Cover, p_in: float = DEFAULT_P_IN, p_out: float = DEFAULT_P_OUT,
                    seed=0) -> sp.csr_matrix:
    """One random snapshot for a fixed cover.

    ``seed`` is an int or a ``numpy.random.Generator``.
    """
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise ValueError("probabilities must lie in [0, 1]")
    n = truth.n
    rng = _rng(seed)
    U = assignment_of(truth)
    iu, ju = np.triu_indices(n, k=1)
    shared = np.einsum("ij,ij->i", U[iu], U[ju]) > 0 if len(truth) else np.zeros(len(iu), bool)
    prob = np.where(shared, p_in, p_out)
    hit = rng.random(len(iu)) < prob
    rows, cols = iu[hit], ju[hit]
    A = sp.coo_matrix(
        (np.ones(2 * len(rows), dtype=np.int8), (np.r_[rows, cols], np.r_[cols, rows])), shape=(n, n)
    )
    return A.tocsr()


def sample_network(truths: Sequence[Cover], p_in=DEFAULT_P_IN, p_out=DEFAULT_P_OUT, seed=0) -> DynamicNetwork:
    """Sample snapshot ``t`` from ``truths[t]`` with a per-snapshot derived seed."""
    snaps = [sample_snapshot(c, p_in, p_out, _rng(seed, t)) for t, c in enumerate(truths)]
    return DynamicNetwork(truths[0].n, snaps)


@dataclass(frozen=True)
class PlantedConfig:
    """Multi-snapshot planted partition parameters.

    Either give ``sizes`` explicitly or ``K`` and ``r`` for ``r`` equal
    clusters of size ``K``.  Nodes beyond the clusters are outliers.
    """

    n: int | None = None
    sizes: tuple[int, ...] | None = None
    K: int | None = None
    r: int | None = None
    p: float = DEFAULT_P_IN
    q: float = DEFAULT_P_OUT
    m: int = 1
    seed: int = 0

    def cluster_sizes(self) -> tuple[int, ...]:
        if self.sizes is not None:
            return tuple(int(s) for s in self.sizes)
        if self.K is None:
            raise ValueError("need sizes or K")
        r = self.r if self.r is not None else (self.n // self.K if self.n else None)
        if r is None:
            raise ValueError("need r or n with K")
        return (int(self.K),) * int(r)

    def node_count(self) -> int:
        return self.n if self.n is not None else sum(self.cluster_sizes())


def planted_cover(cfg: PlantedConfig) -> Cover:
    sizes = cfg.cluster_sizes()
    n = cfg.node_count()
    if not sizes or any(s < 1 for s in sizes) or sum(sizes) > n:
        raise ValueError(f"invalid cluster sizes {sizes} for n={n}")
    bounds = np.cumsum((0,) + sizes)
    return Cover(n, tuple(frozenset(range(a, b)) for a, b in zip(bounds[:-1], bounds[1:])))


def planted_partition_network(cfg: PlantedConfig) -> tuple[DynamicNetwork, CoverTimeline]:
    """``m`` independent snapshots of a static planted partition."""
    if not 0 <= cfg.q < cfg.p <= 1:
        raise ValueError("need 0 <= q < p <= 1")
    if not cfg.q < 0.5 < cfg.p:
        warnings.warn("outside the q < 1/2 < p regime", stacklevel=2)
    if cfg.m < 1:
        raise ValueError("m must be positive")
    truth = planted_cover(cfg)
    return sample_network([truth] * cfg.m, cfg.p, cfg.q, cfg.seed), static_timeline(truth, cfg.m)


def static_timeline(c: Cover, T: int) -> CoverTimeline:
    return CoverTimeline((c,) * T, (tuple(range(len(c))),) * T)


def _span(a, b):
    return frozenset(range(a, b + 1))


def expt1_truth(strict_counts: bool = False) -> Cover:
    """Five communities on 120 nodes (inclusive ranges).

    The literal ranges give sizes 15/38/39/20/20 with overlaps 47..52 and
    100..104 (and node 85 shared by the third and fourth).  ``strict_counts``
    starts the third community at 48 so it has 38 nodes and a 5-node overlap.
    """
    third = _span(48, 85) if strict_counts else _span(47, 85)
    return Cover(120, (_span(0, 14), _span(15, 52), third, _span(85, 104), _span(100, 119)))


def scenario_expt1(T: int = 10, seed: int = 0, p_in=DEFAULT_P_IN, p_out=DEFAULT_P_OUT,
                   strict_counts: bool = False) -> tuple[DynamicNetwork, CoverTimeline]:
    """Static overlapping five-community network observed ``T`` times."""
    if T < 1:
        raise ValueError("T must be positive")
    truth = expt1_truth(strict_counts)
    return sample_network([truth] * T, p_in, p_out, seed), static_timeline(truth, T)


def expt2_truth() -> CoverTimeline:
    """Four ten-snapshot phases on 100 nodes: overlap, merge and shrink, split and growth."""
    covers, labels = [], []
    for _ in range(10):
        covers.append(Cover(100, (_span(0, 39), _span(40, 79))))
        labels.append((0, 1))
    for _ in range(10):
        covers.append(Cover(100, (_span(0, 39), _span(30, 69))))
        labels.append((0, 1))
    for tau in range(10):
        # one node leaves per snapshot after the merge: 0..69 down to 0..60
        covers.append(Cover(100, (_span(0, 69 - tau), _span(75, 99))))
        labels.append((2, 3))
    for _ in range(10):
        # "nodes 60-100" read as 60..99 on a 100-node network
        covers.append(Cover(100, (_span(0, 19), _span(20, 59), _span(60, 99))))
        labels.append((4, 5, 3))
    return CoverTimeline(tuple(covers), tuple(labels))


def scenario_expt2(seed: int = 0, p_in=DEFAULT_P_IN, p_out=DEFAULT_P_OUT) -> tuple[DynamicNetwork, CoverTimeline]:
    """40 snapshots following :func:`expt2_truth`."""
    truth = expt2_truth()
    return sample_network(truth.covers, p_in, p_out, seed), truth
