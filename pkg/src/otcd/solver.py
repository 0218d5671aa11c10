"""Factored projected subgradient ascent on the trace-norm-relaxed objective.

Each cover matrix is parameterized as ``Y^t = U^t U^t.T`` so the trace-norm
budget ``||Y^t||_* <= B`` becomes the Frobenius ball ``||U^t||_F^2 <= B``.
Every iteration computes all ascent directions from the current iterate and
then moves every factor (a synchronous sweep), followed by projection.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .model import DynamicNetwork
from .objective import ObjectiveConfig, Problem, distance_terms, persisting_pairs

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the subgradient solver.

    ``r=None`` picks ``min(n, 64)`` and ``B=None`` picks ``b_mult * n``.
    ``tie_snapshots`` shares one factor across all snapshots, which is the
    zero-change limit of the temporal constraint.  ``warm_iters > 0`` starts
    an untied solve from that many tied iterations instead of per-snapshot
    spectral factors; strong coupling stalls the sign-valued distance
    gradients when the snapshot starts disagree.
    """

    r: int | None = None
    B: float | None = None
    b_mult: float = 10.0
    gamma: float = 1.0
    step0: float = 1e-3
    step_decay: float = 0.995
    max_iters: int = 2000
    tol: float = 1e-7
    window: int = 50
    seed: int = 0
    overlap_allowed: bool = True
    cap_penalty_weight: float | None = None
    include_diagonal: bool = False
    cap_diagonal: bool = True
    tie_snapshots: bool = False
    warm_iters: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.r is not None and self.r < 1:
            raise ValueError("r must be at least 1")
        if self.B is not None and self.B <= 0:
            raise ValueError("B must be positive")
        if self.step0 <= 0:
            raise ValueError("step0 must be positive")
        if not 0 < self.step_decay <= 1:
            raise ValueError("step_decay must lie in (0, 1]")
        if self.max_iters < 0 or self.window < 1 or self.warm_iters < 0:
            raise ValueError("max_iters and warm_iters must be >= 0 and window >= 1")

    def rank(self, n: int) -> int:
        return min(n, self.r if self.r is not None else 64)

    def budget(self, n: int) -> float:
        return float(self.B) if self.B is not None else self.b_mult * n

    def objective(self) -> ObjectiveConfig:
        return ObjectiveConfig(
            gamma=self.gamma,
            overlap_allowed=self.overlap_allowed,
            cap_penalty_weight=self.cap_penalty_weight,
            include_diagonal=self.include_diagonal,
            cap_diagonal=self.cap_diagonal,
        )


@dataclass
class SolveTrace:
    """Per-iteration record: objective at the iterate, step taken from it,
    largest squared factor norm, and elapsed wall time."""

    objective: list[float] = field(default_factory=list)
    step: list[float] = field(default_factory=list)
    max_norm: list[float] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)
    best_iter: int = 0

    def __len__(self) -> int:
        return len(self.objective)

    @property
    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate(np.asarray(self.objective))

    def to_csv(self) -> str:
        lines = ["iter,objective,step"]
        lines += [f"{k},{o!r},{s!r}" for k, (o, s) in enumerate(zip(self.objective, self.step))]
        return "\n".join(lines) + "\n"


def step_size(k: int, cfg: SolverConfig) -> float:
    """Geometric schedule ``step0 * step_decay**k``."""
    if k < 0:
        raise ValueError("iteration index must be non-negative")
    return cfg.step0 * cfg.step_decay**k


def project_frobenius_ball(U: np.ndarray, B: float) -> np.ndarray:
    """Euclidean projection onto ``{Z : ||Z||_F^2 <= B}``."""
    if B <= 0:
        raise ValueError("B must be positive")
    norm2 = float(np.vdot(U, U))
    if norm2 <= B:
        return U
    return U * math.sqrt(B / norm2)


def _unit_diag(A) -> sp.csr_matrix:
    return (sp.csr_matrix(A, dtype=float) + sp.identity(A.shape[0], format="csr")).tocsr()


def init_factor(A, r: int, B: float, dense_limit: int = 400) -> np.ndarray:
    """Spectral start ``V sqrt(L)`` from the top-``r`` eigenpairs of ``A + I``.

    Negative eigenvalues are clipped to zero, so ``U U^T`` is the best
    rank-``r`` PSD approximation of the unit-diagonal adjacency.
    """
    n = A.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"rank must lie in [1, {n}]")
    M = _unit_diag(A)
    if n <= dense_limit or r >= n - 1:
        vals, vecs = np.linalg.eigh(M.toarray())
        vals, vecs = vals[::-1][:r], vecs[:, ::-1][:, :r]
    else:
        from scipy.sparse.linalg import eigsh

        vals, vecs = eigsh(M, k=r, which="LA", v0=np.ones(n) / math.sqrt(n))
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
    # fix eigenvector signs so the start does not depend on LAPACK internals
    signs = np.sign(vecs[np.abs(vecs).argmax(axis=0), np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    U = vecs * signs * np.sqrt(np.clip(vals, 0.0, None))
    return project_frobenius_ball(np.ascontiguousarray(U), B)


def init_factors(net: DynamicNetwork, r: int, B: float | None = None) -> list[np.ndarray]:
    """One spectral start per snapshot, each projected into the ``B``-ball."""
    B = 10.0 * net.n if B is None else B
    return [init_factor(a, r, B) for a in net.snapshots]


class _Runner:
    """Evaluates the objective and ascent directions for a factor list."""

    def __init__(self, problem: Problem, cfg: SolverConfig, fixed=()):
        self.problem = problem
        self.cfg = cfg
        self.T = problem.net.T
        # extra distance terms to frozen factors: (t, U_fixed, pairs)
        self.fixed = list(fixed)
        self.pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def _map(self, fn, items):
        if self.pool is None:
            return [fn(x) for x in items]
        return list(self.pool.map(fn, items))

    def evaluate(self, F):
        """Return ``(objective, per-snapshot objectives, directions)``."""
        p, g = self.problem, self.cfg.gamma
        if self.cfg.tie_snapshots:
            U = F[0]
            parts = self._map(lambda t: p.snapshot(t, U), range(self.T))
            vals = [v for v, _ in parts]
            G = sum(gr for _, gr in parts)
            return float(sum(vals)), vals, [G]
        parts = self._map(lambda t: p.snapshot(t, F[t]), range(self.T))
        vals = [v for v, _ in parts]
        dirs = [gr.copy() for _, gr in parts]
        total = sum(vals)
        if g > 0:
            couplings = self._map(lambda t: p.coupling(t, F[t], F[t + 1]), range(self.T - 1))
            for t, (d, g_t, g_next) in enumerate(couplings):
                total -= d
                dirs[t] -= g_t
                dirs[t + 1] -= g_next
            for t, U_fixed, pairs in self.fixed:
                d, g_t, _ = distance_terms(F[t], U_fixed, pairs, self.cfg.include_diagonal)
                total -= g * d
                dirs[t] -= g * g_t
        return float(total), vals, dirs


def _ascend(runner: _Runner, F: list[np.ndarray], cfg: SolverConfig, B: float):
    trace = SolveTrace()
    start = time.perf_counter()
    separable = cfg.gamma == 0 and not runner.fixed and not cfg.tie_snapshots
    best_F = [U.copy() for U in F]
    best_obj = -np.inf
    best_parts = None
    for k in range(cfg.max_iters + 1):
        obj, parts, dirs = runner.evaluate(F)
        if not np.isfinite(obj):
            raise SolverError(f"non-finite objective {obj} at iteration {k}")
        if separable:
            # per-snapshot best iterate is optimal for a separable objective
            if best_parts is None:
                best_parts = list(parts)
            for t, v in enumerate(parts):
                if v > best_parts[t]:
                    best_parts[t] = v
                    best_F[t] = F[t].copy()
            if obj > best_obj:
                best_obj, trace.best_iter = obj, k
        elif obj > best_obj:
            best_obj, trace.best_iter = obj, k
            best_F = [U.copy() for U in F]
        tau = step_size(k, cfg) if k < cfg.max_iters else 0.0
        trace.objective.append(obj)
        trace.step.append(tau)
        trace.max_norm.append(max(float(np.vdot(U, U)) for U in F))
        trace.wall_time.append(time.perf_counter() - start)
        if k == cfg.max_iters:
            break
        if cfg.tol > 0 and k >= cfg.window:
            hist = trace.best_so_far
            gain = hist[-1] - hist[-1 - cfg.window]
            if gain <= cfg.tol * max(abs(hist[-1]), 1e-12):
                log.debug("early stop at iteration %d", k)
                break
        F = [project_frobenius_ball(U + tau * G, B) for U, G in zip(F, dirs)]
    return best_F, trace


def solve_offline(net: DynamicNetwork, cfg: SolverConfig = SolverConfig(),
                  init: list[np.ndarray] | None = None) -> tuple[list[np.ndarray], SolveTrace]:
    """Maximize ``sum_t f_t - gamma sum_t d_t`` (minus the cap penalty) over all snapshots.

    Returns the best-objective iterate, one factor per snapshot, and the trace.
    With ``tie_snapshots`` the single shared factor is repeated ``T`` times.
    """
    problem = Problem(net, cfg.objective())
    r, B = cfg.rank(net.n), cfg.budget(net.n)
    if init is None:
        if cfg.tie_snapshots or cfg.warm_iters:
            mean = sum(sp.csr_matrix(a, dtype=float) for a in net.snapshots) / net.T
            F = [init_factor(mean, r, B)]
        else:
            F = init_factors(net, r, B)
        if cfg.warm_iters and not cfg.tie_snapshots:
            warm = replace(cfg, tie_snapshots=True, max_iters=cfg.warm_iters, tol=0.0)
            runner = _Runner(problem, warm)
            try:
                F, _ = _ascend(runner, F, warm, B)
            finally:
                runner.close()
            F = [F[0].copy() for _ in range(net.T)]
    else:
        F = [project_frobenius_ball(np.array(U, dtype=float), B) for U in init]
    runner = _Runner(problem, cfg)
    try:
        F, trace = _ascend(runner, F, cfg, B)
    finally:
        runner.close()
    if cfg.tie_snapshots:
        F = [F[0]] * net.T
    return F, trace


def solve_online(A_t, A_prev=None, U_prev: np.ndarray | None = None,
                 cfg: SolverConfig = SolverConfig()) -> tuple[np.ndarray, SolveTrace]:
    """Solve one new snapshot against a frozen previous solution.

    The previous cover matrix ``U_prev U_prev.T`` stays fixed; its distance
    on edges persisting from ``A_prev`` to ``A_t`` is penalized by
    ``cfg.gamma``.  Without ``U_prev`` this is a plain single-snapshot solve.
    """
    net = DynamicNetwork(A_t.shape[0], [A_t])
    problem = Problem(net, cfg.objective())
    fixed = []
    if U_prev is not None and cfg.gamma > 0:
        if A_prev is None:
            raise ValueError("A_prev is required together with U_prev")
        fixed = [(0, np.ascontiguousarray(U_prev, dtype=float), persisting_pairs(A_t, A_prev))]
    r, B = cfg.rank(net.n), cfg.budget(net.n)
    runner = _Runner(problem, replace(cfg, tie_snapshots=False), fixed)
    try:
        F, trace = _ascend(runner, [init_factor(net.snapshots[0], r, B)], cfg, B)
    finally:
        runner.close()
    return F[0], trace


def solve_online_sequence(net: DynamicNetwork, cfg: SolverConfig = SolverConfig()):
    """Run :func:`solve_online` left to right over every snapshot."""
    F, traces = [], []
    U_prev = None
    for t in range(net.T):
        A_prev = net.snapshots[t - 1] if t else None
        U, tr = solve_online(net.snapshots[t], A_prev, U_prev, cfg)
        F.append(U)
        traces.append(tr)
        U_prev = U
    return F, traces
