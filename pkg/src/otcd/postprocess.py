"""Rounding relaxed cover matrices to discrete covers and tracking labels over time."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .model import Cover, CoverTimeline, cover_from_assignment, cover_matrix_of


@dataclass(frozen=True)
class NmfConfig:
    """Post-processing knobs.

    ``rank`` fixes the NMF rank; otherwise it is the number of eigenvalues of
    the relaxed matrix at or above ``max(eig_abs, eig_rel * lambda_max)``,
    clamped to ``[1, r_max]``.  ``exclusive`` rounds to a partition with
    outliers (each node keeps only its largest entry), the discrete covers
    that satisfy ``Y_ij <= 1`` including the diagonal.

    ``rank_select="objective"`` rounds at every rank from 1 to ``r_max``
    and keeps the candidate sequence with the best discrete objective.
    """

    rank: int | None = None
    eig_rel: float = 0.25
    eig_abs: float = 1.0
    r_max: int | None = None
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0
    threshold: float = 0.5
    restarts: int = 0
    exclusive: bool = False
    rank_select: str = "eigen"

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if self.rank_select not in ("eigen", "objective"):
            raise ValueError("rank_select must be 'eigen' or 'objective'")


class NmfResult(NamedTuple):
    factor: np.ndarray
    losses: list
    converged: bool


def choose_rank(Yhat: np.ndarray, cfg: NmfConfig = NmfConfig()) -> int:
    """Count eigenvalues above the configured threshold."""
    if cfg.rank is not None:
        return cfg.rank
    Yhat = np.asarray(Yhat, dtype=float)
    vals = np.linalg.eigvalsh((Yhat + Yhat.T) / 2)
    cut = max(cfg.eig_abs, cfg.eig_rel * vals[-1])
    r = int((vals >= cut).sum())
    r_max = cfg.r_max if cfg.r_max is not None else Yhat.shape[0]
    return max(1, min(r, r_max))


def _loss(Y, W):
    R = Y - W @ W.T
    return float(np.vdot(R, R))


def _eig_start(Y, r, rng):
    vals, vecs = np.linalg.eigh(Y)
    vals, vecs = vals[::-1][:r], vecs[:, ::-1][:, :r]
    W = np.abs(vecs * np.sqrt(np.clip(vals, 0.0, None)))
    if W.shape[1] < r:
        W = np.hstack([W, np.zeros((W.shape[0], r - W.shape[1]))])
    return W + 1e-3 * rng.random(W.shape)


def _mu_run(Y, W, cfg):
    """Multiplicative updates ``W *= ((Y W) / (W W^T W))^(1/3)``.

    A step that would raise the loss is retried with a halved exponent, so
    the loss sequence never increases.
    """
    eps = 1e-16
    losses = [_loss(Y, W)]
    converged = False
    for _ in range(cfg.max_iters):
        ratio = (Y @ W + eps) / (W @ (W.T @ W) + eps)
        expo = 1.0 / 3.0
        for _ in range(8):
            cand = W * ratio**expo
            cl = _loss(Y, cand)
            if cl <= losses[-1]:
                break
            expo /= 2.0
        else:
            converged = True
            break
        W = cand
        losses.append(cl)
        if losses[-2] - cl <= cfg.tol * max(losses[-2], 1e-12):
            converged = True
            break
    return W, losses, converged


def symmetric_nmf(Yhat: np.ndarray, r: int, cfg: NmfConfig = NmfConfig()) -> NmfResult:
    """Nonnegative ``W`` (n x r) locally minimizing ``||Yhat - W W^T||_F^2``.

    ``Yhat`` is symmetrized and clipped at zero first.  The start is the
    entrywise absolute value of the top-``r`` eigen-factor plus small seeded
    noise; ``cfg.restarts`` extra random starts keep the best result.
    """
    Y = np.clip((np.asarray(Yhat, dtype=float) + np.asarray(Yhat, dtype=float).T) / 2, 0.0, None)
    rng = np.random.default_rng(cfg.seed)
    best = _mu_run(Y, _eig_start(Y, r, rng), cfg)
    scale = np.sqrt(max(Y.mean(), 1e-12) / r)
    for _ in range(cfg.restarts):
        cand = _mu_run(Y, scale * rng.random((Y.shape[0], r)) + 1e-3, cfg)
        if cand[1][-1] < best[1][-1]:
            best = cand
    W, losses, converged = best
    if not converged:
        warnings.warn("symmetric NMF hit max_iters before converging", RuntimeWarning, stacklevel=2)
    return NmfResult(W, losses, converged)


def round_assignment(W: np.ndarray, threshold: float = 0.5, exclusive: bool = False) -> Cover:
    """Node ``i`` joins community ``k`` iff ``W[i, k] >= threshold``.

    With ``exclusive`` only the row maximum (first on ties) may pass.
    Empty columns are dropped and exact duplicate columns merged.
    """
    W = np.asarray(W)
    keep = W >= threshold
    if exclusive and W.size:
        top = np.zeros_like(keep)
        top[np.arange(W.shape[0]), W.argmax(axis=1)] = True
        keep &= top
    return cover_from_assignment(keep, merge_duplicates=True)


def extract_cover(Yhat: np.ndarray, cfg: NmfConfig = NmfConfig()) -> Cover:
    r = choose_rank(Yhat, cfg)
    return round_assignment(symmetric_nmf(Yhat, r, cfg).factor, cfg.threshold, cfg.exclusive)


def candidate_covers(Yhat: np.ndarray, cfg: NmfConfig = NmfConfig()) -> list[Cover]:
    """Distinct rounded covers over the rank range used by objective-based selection."""
    top = cfg.r_max if cfg.r_max is not None else Yhat.shape[0]
    out: list[Cover] = []
    for r in range(1, top + 1):
        c = extract_cover(Yhat, replace(cfg, rank=r))
        if c not in out:
            out.append(c)
    return out


def select_sequence(candidates: Sequence[Sequence[Cover]], net, gamma: float = 0.0,
                    include_diagonal: bool = False) -> list[Cover]:
    """Pick one candidate per snapshot maximizing ``sum_t f_t - gamma sum_t d_t`` (Viterbi)."""
    from .objective import modularity_weights, snapshot_quality, temporal_distance

    if len(candidates) != net.T:
        raise ValueError("need one candidate list per snapshot")
    Ys = [[cover_matrix_of(c).astype(float) for c in cands] for cands in candidates]
    f = [
        np.array([snapshot_quality(Y, a, modularity_weights(a, include_diagonal)) for Y in ys])
        for ys, a in zip(Ys, net.snapshots)
    ]
    score, back = f[0], []
    for t in range(1, net.T):
        if gamma > 0:
            a_prev, a_next = net.snapshots[t - 1], net.snapshots[t]
            D = np.array([[temporal_distance(y, x, a_next, a_prev, include_diagonal) for y in Ys[t]]
                          for x in Ys[t - 1]])
        else:
            D = np.zeros((len(Ys[t - 1]), len(Ys[t])))
        tot = score[:, None] - gamma * D
        back.append(tot.argmax(axis=0))
        score = tot.max(axis=0) + f[t]
    idx = [int(score.argmax())]
    for b in reversed(back):
        idx.append(int(b[idx[-1]]))
    idx.reverse()
    return [candidates[t][i] for t, i in enumerate(idx)]


def extract_timeline(F: Sequence[np.ndarray], cfg: NmfConfig = NmfConfig(), net=None,
                     gamma: float = 0.0, include_diagonal: bool = False) -> CoverTimeline:
    """Relaxed factors -> discrete covers -> labels tracked across snapshots.

    ``net`` (and ``gamma``) are needed only for ``rank_select="objective"``.
    """
    if cfg.rank_select == "objective":
        if net is None:
            raise ValueError("objective-based rank selection needs the network")
        cands, cache = [], {}
        for U in F:
            if id(U) not in cache:
                c = cfg if cfg.r_max is not None else replace(cfg, r_max=U.shape[1])
                cache[id(U)] = candidate_covers(U @ U.T, c)
            cands.append(cache[id(U)])
        return map_labels(select_sequence(cands, net, gamma, include_diagonal))
    covers = []
    cache: dict[int, Cover] = {}
    for U in F:
        # tied solves repeat the same factor object
        if id(U) not in cache:
            c = cfg if cfg.r_max is not None else replace(cfg, r_max=U.shape[1])
            cache[id(U)] = extract_cover(U @ U.T, c)
        covers.append(cache[id(U)])
    return map_labels(covers)


def jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def map_labels(covers: Sequence[Cover] | CoverTimeline) -> CoverTimeline:
    """Carry labels across consecutive snapshots by mutual best Jaccard match.

    Communities ``X`` (at ``t-1``) and ``Y`` (at ``t``) share a label iff each
    is the other's Jaccard argmax and the index is positive.  Ties go to the
    smaller previous label, or the earlier current community.  Unmatched
    communities get fresh labels in order of first appearance.
    """
    if isinstance(covers, CoverTimeline):
        covers = covers.covers
    covers = tuple(covers)
    if not covers:
        raise ValueError("no covers to label")
    labels = [tuple(range(len(covers[0])))]
    next_label = len(covers[0])
    for t in range(1, len(covers)):
        prev, cur = covers[t - 1].communities, covers[t].communities
        prev_labels = labels[-1]
        J = np.array([[jaccard(x, y) for y in cur] for x in prev]).reshape(len(prev), len(cur))
        # previous communities ordered by label so argmax ties pick the smaller label
        by_label = np.argsort(prev_labels, kind="stable")
        out = []
        for j in range(len(cur)):
            col = J[by_label, j] if len(prev) else np.zeros(0)
            if col.size and col.max() > 0:
                i = by_label[int(np.argmax(col))]
                if int(np.argmax(J[i])) == j:
                    out.append(prev_labels[i])
                    continue
            out.append(next_label)
            next_label += 1
        labels.append(tuple(out))
    return CoverTimeline(covers, tuple(labels))
