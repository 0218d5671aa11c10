"""Ground-truth comparison and the recovery phase-transition sweep."""

from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .model import Cover, CoverTimeline, cover_matrix_of
from .postprocess import NmfConfig, extract_timeline
from .solver import SolverConfig, solve_offline
from .synthgen import PlantedConfig, planted_partition_network

SWEEP_HEADER = ("n", "K", "m", "p", "q", "trials", "success_rate")
# static truth: one shared factor is the zero-change limit; B = n matches a partition's trace
SWEEP_SOLVER = SolverConfig(tie_snapshots=True, b_mult=1.0)


def _resized(c: Cover, n: int) -> Cover:
    return c if c.n == n else Cover(n, c.communities)


def cover_distance(truth: CoverTimeline, est: CoverTimeline) -> int:
    """``sum_t ||Y*_t - Yhat_t||_1`` over full cover matrices (diagonal and both orders)."""
    if truth.T != est.T:
        raise ValueError(f"snapshot counts differ: {truth.T} vs {est.T}")
    if truth.n != est.n:
        raise ValueError(f"node counts differ: {truth.n} vs {est.n}")
    return int(
        sum(np.abs(cover_matrix_of(a) - cover_matrix_of(b)).sum() for a, b in zip(truth.covers, est.covers))
    )


def exact_recovery(truth: CoverTimeline, est: CoverTimeline) -> bool:
    return cover_distance(truth, est) == 0


def align_n(a: CoverTimeline, b: CoverTimeline) -> tuple[CoverTimeline, CoverTimeline]:
    """Pad both timelines to a common node count (extra nodes are outliers)."""
    n = max(a.n, b.n)
    return (
        CoverTimeline(tuple(_resized(c, n) for c in a.covers), a.labels),
        CoverTimeline(tuple(_resized(c, n) for c in b.covers), b.labels),
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    K: int
    m: int
    p: float
    q: float
    trials: int
    success_rate: float

    @property
    def stderr(self) -> float:
        """Binomial standard error of the success rate."""
        s = self.success_rate
        return math.sqrt(max(s * (1 - s), 0.0) / self.trials) if self.trials else 0.0


def _trial_seed(seed: int, cell: tuple, trial: int) -> int:
    ss = np.random.SeedSequence([int(seed), *map(int, cell), int(trial)])
    return int(ss.generate_state(1)[0])


def run_trial(n: int, K: int, m: int, p: float, q: float, seed: int,
              solver_cfg: SolverConfig = SWEEP_SOLVER, nmf_cfg: NmfConfig = NmfConfig()) -> bool:
    """Sample one planted instance (``n // K`` clusters of size ``K``), solve, round, compare."""
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    cfg = PlantedConfig(n=n, K=K, r=n // K, p=p, q=q, m=m, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        net, truth = planted_partition_network(cfg)
        F, _ = solve_offline(net, replace(solver_cfg, seed=seed))
        est = extract_timeline(F, nmf_cfg)
    return exact_recovery(truth, est)


def phase_sweep(grid: Iterable[tuple[int, int, int]], p: float = 0.5, q: float = 0.2, trials: int = 10,
                solver_cfg: SolverConfig = SWEEP_SOLVER, nmf_cfg: NmfConfig = NmfConfig(),
                seed: int = 0, workers: int = 1) -> list[SweepRow]:
    """Exact-recovery rate per ``(n, K, m)`` cell of the planted partition model.

    Trial seeds derive from ``(seed, n, K, m, trial)``, so rates do not
    depend on ``workers`` or on the grid order.  Rows come back sorted.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= q < p <= 1:
        raise ValueError("need 0 <= q < p <= 1")
    cells = sorted({tuple(int(v) for v in c) for c in grid})
    jobs = [(c, k) for c in cells for k in range(trials)]

    def one(job):
        (n, K, m), k = job
        return run_trial(n, K, m, p, q, _trial_seed(seed, (n, K, m), k), solver_cfg, nmf_cfg)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = list(pool.map(one, jobs))
    else:
        hits = [one(j) for j in jobs]
    rows = []
    for i, (n, K, m) in enumerate(cells):
        ok = hits[i * trials:(i + 1) * trials]
        rows.append(SweepRow(n, K, m, p, q, trials, sum(ok) / trials))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r.n, r.K, r.m, r.p, r.q, r.trials, r.success_rate])
    return buf.getvalue()


def theory_csv(rows: Sequence[SweepRow]) -> str:
    """Reference curve ``K = sqrt(n / m)`` for every ``(n, m)`` in the sweep."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "m", "K_ref"))
    for n, m in sorted({(r.n, r.m) for r in rows}):
        w.writerow([n, m, repr(math.sqrt(n / m))])
    return buf.getvalue()


def monotone_in_m(rows: Sequence[SweepRow], sigmas: float = 2.0) -> dict[tuple, bool]:
    """Per ``(n, K)``: is the success rate non-decreasing in ``m`` up to ``sigmas`` standard errors?"""
    out = {}
    key = lambda r: (r.n, r.K)
    for nk, grp in itertools.groupby(sorted(rows, key=lambda r: (r.n, r.K, r.m)), key=key):
        grp = list(grp)
        out[nk] = all(
            b.success_rate >= a.success_rate - sigmas * math.hypot(a.stderr, b.stderr)
            for a, b in zip(grp, grp[1:])
        )
    return out
