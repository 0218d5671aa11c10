"""Acceptance criteria C1 to C8.

Each criterion is a plain function returning ``(passed, detail)`` so the
file also runs standalone::

    python3 tests/test_acceptance.py [C1 C5 ...]

Under pytest every criterion records one PASS/FAIL line, printed in the
terminal summary, and then asserts.
"""

from __future__ import annotations

import math
import sys
import time
import tracemalloc
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from otcd import kernels
from otcd.evaluation import cover_distance, exact_recovery, monotone_in_m, phase_sweep, run_trial
from otcd.model import Cover, cover_matrix_of, trace_norm_of_cover
from otcd.objective import (
    distance_terms,
    modularity_weights,
    overlap_cap_penalty,
    persisting_pairs,
    quality_terms,
)
from otcd.oracle import OracleLimits, brute_force_solve, sequence_objective
from otcd.postprocess import NmfConfig, extract_timeline
from otcd.solver import SolverConfig, solve_offline
from otcd.synthgen import sample_network, scenario_expt1, scenario_expt2

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run outside pytest
    ACCEPTANCE_LINES = {}

pytestmark = [pytest.mark.acceptance]

NAMES = {
    "C1": "ablation ratio on the static overlapping scenario",
    "C2": "planted-partition exact recovery",
    "C3": "temporal-benefit monotonicity",
    "C4": "oracle equivalence on tiny instances",
    "C5": "subgradients match finite differences",
    "C6": "trace-norm identities and ball feasibility",
    "C7": "complexity scaling",
    "C8": "merge, split and overlap dynamics",
}


def _quiet():
    ctx = warnings.catch_warnings()
    ctx.__enter__()
    warnings.simplefilter("ignore")
    return ctx


# ---------------------------------------------------------------- C1

C1_SEEDS = range(5)
C1_COMMON = dict(b_mult=1.1, r=16, tol=0.0)
C1_CONFIGS = {
    "overlap+temporal": dict(tie_snapshots=True, gamma=1.0),
    "overlap-only": dict(gamma=0.0),
    "temporal-only": dict(tie_snapshots=True, gamma=1.0, overlap_allowed=False),
    "neither": dict(gamma=0.0, overlap_allowed=False),
}


def c1_distances(seeds=C1_SEEDS) -> dict[str, list[int]]:
    out = {k: [] for k in C1_CONFIGS}
    for s in seeds:
        net, truth = scenario_expt1(T=10, seed=s)
        for name, kw in C1_CONFIGS.items():
            cfg = SolverConfig(**C1_COMMON, **kw)
            F, _ = solve_offline(net, cfg)
            nmf = NmfConfig(rank_select="objective", exclusive=not cfg.overlap_allowed)
            tl = extract_timeline(F, nmf, net=net, gamma=cfg.gamma)
            out[name].append(cover_distance(truth, tl))
    return out


def criterion_c1():
    ctx = _quiet()
    try:
        dist = c1_distances()
    finally:
        ctx.__exit__(None, None, None)
    mean = {k: float(np.mean(v)) for k, v in dist.items()}
    ref = mean["overlap+temporal"]
    ratios = {k: v / ref if ref else math.inf for k, v in mean.items() if k != "overlap+temporal"}
    ok = all(r >= 3.0 for r in ratios.values())
    detail = f"mean distance {ref:.0f}; ratios " + ", ".join(f"{k} {r:.2f}" for k, r in ratios.items())
    return ok, detail


# ---------------------------------------------------------------- C2

def criterion_c2():
    hits = [run_trial(n=60, K=20, m=10, p=0.5, q=0.2, seed=s) for s in range(10)]
    return sum(hits) >= 9, f"{sum(hits)}/10 seeds exact"


# ---------------------------------------------------------------- C3

def criterion_c3():
    rows = phase_sweep([(100, 10, m) for m in (1, 4, 16)], p=0.5, q=0.2, trials=20, seed=0)
    rate = {r.m: r.success_rate for r in rows}
    mono = monotone_in_m(rows, sigmas=2.0)[(100, 10)]
    gain = rate[16] - rate[1]
    detail = "success " + ", ".join(f"m={m}: {v:.2f}" for m, v in rate.items()) + f"; gain {gain:.2f}"
    return mono and gain >= 0.3, detail


# ---------------------------------------------------------------- C4

C4_INSTANCES = 40
C4_GAMMA = 1.0
C4_SOLVER = SolverConfig(gamma=C4_GAMMA, step0=0.05, step_decay=0.998, max_iters=3000, tol=0.0, b_mult=2.0)


def c4_instance(i):
    """Random ``n`` in 4..6, ``T`` in 1..2, one or two planted communities, dense sampling."""
    rng = np.random.default_rng([7, i])
    while True:
        n, T, k = int(rng.integers(4, 7)), int(rng.integers(1, 3)), int(rng.integers(1, 3))
        comms = {frozenset(rng.choice(n, int(rng.integers(2, n + 1)), replace=False).tolist()) for _ in range(k)}
        net = sample_network([Cover(n, tuple(comms))] * T, 0.9, 0.1, seed=int(rng.integers(1 << 31)))
        if all(a.nnz for a in net.snapshots):
            return net


def c4_compare(i):
    """Return ``(within_5pct, oracle_unique, exact_match)`` for instance ``i``."""
    net = c4_instance(i)
    res = brute_force_solve(net, gamma=C4_GAMMA, limits=OracleLimits(max_communities=2))
    F, _ = solve_offline(net, C4_SOLVER)
    tl = extract_timeline(F, NmfConfig(rank_select="objective"), net=net, gamma=C4_GAMMA)
    val = sequence_objective(tl.covers, net, C4_GAMMA)
    within = val >= res.value - 0.05 * abs(res.value) - 1e-9
    match = tuple(tl.covers) == res.optima[0] if res.unique else None
    return within, res.unique, match


def criterion_c4():
    ctx = _quiet()
    try:
        rows = [c4_compare(i) for i in range(C4_INSTANCES)]
    finally:
        ctx.__exit__(None, None, None)
    good = [w and (m is not False) for w, _, m in rows]
    n_within = sum(w for w, _, _ in rows)
    n_unique = sum(u for _, u, _ in rows)
    n_match = sum(bool(m) for _, _, m in rows)
    frac = sum(good) / len(rows)
    detail = (f"{sum(good)}/{len(rows)} instances pass ({n_within} within 5%, "
              f"{n_match}/{n_unique} unique optima matched exactly)")
    return frac >= 0.8, detail


# ---------------------------------------------------------------- C5

def _fd_grad(fun, U, h=1e-5):
    g = np.empty_like(U)
    for idx in np.ndindex(U.shape):
        e = np.zeros_like(U)
        e[idx] = h
        g[idx] = (fun(U + e) - fun(U - e)) / (2 * h)
    return g


def _rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def _smooth_point(rng, n, r, targets, margin=1e-3):
    """Draw ``U`` whose ``Y = U U^T`` stays ``margin`` away from every kink in ``targets``."""
    while True:
        U = rng.uniform(0.0, 1.2, size=(n, r)) / math.sqrt(r)
        Y = U @ U.T
        if all(np.abs(Y - T).min() > margin for T in targets):
            return U


def c5_point(rng):
    """Worst relative error over the quality, distance and cap gradients at one random point."""
    n, r = int(rng.integers(5, 11)), int(rng.integers(1, 4))
    A = sp.random(n, n, density=0.5, random_state=rng, data_rvs=np.ones, format="csr")
    A = ((A + A.T) > 0).astype(float)
    A.setdiag(0)
    A.eliminate_zeros()
    if A.nnz == 0:
        A = sp.csr_matrix(np.ones((n, n)) - np.eye(n))
    B = sp.random(n, n, density=0.5, random_state=rng, data_rvs=np.ones, format="csr")
    B = ((B + B.T + A) > 0).astype(float).tocsr()
    B.setdiag(0)
    B.eliminate_zeros()
    C = modularity_weights(A)
    Ad = A.toarray()
    U = _smooth_point(rng, n, r, [Ad, np.ones((n, n))])
    V = rng.uniform(0.0, 1.2, size=(n, r)) / math.sqrt(r)
    while np.abs(U @ U.T - V @ V.T).min() < 1e-3:
        V = rng.uniform(0.0, 1.2, size=(n, r)) / math.sqrt(r)
    pairs = persisting_pairs(A, B)

    _, gq, _, gc = quality_terms(U, C, want_cap=True, cap_diagonal=True)
    e_q = _rel_err(gq, _fd_grad(lambda Z: quality_terms(Z, C)[0], U))
    e_c = _rel_err(gc, _fd_grad(lambda Z: overlap_cap_penalty(Z)[0], U))
    _, ga, gb = distance_terms(U, V, pairs)
    if len(pairs[0]):
        e_d = max(_rel_err(ga, _fd_grad(lambda Z: distance_terms(Z, V, pairs)[0], U)),
                  _rel_err(gb, _fd_grad(lambda Z: distance_terms(U, Z, pairs)[0], V)))
    else:
        e_d = 0.0
    return max(e_q, e_c, e_d)


def criterion_c5():
    rng = np.random.default_rng(2024)
    errs = [c5_point(rng) for _ in range(100)]
    worst = max(errs)
    return worst <= 1e-4, f"worst relative error {worst:.2e} over 100 points ({kernels.get_backend()} kernels)"


# ---------------------------------------------------------------- C6

def criterion_c6():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(0, 6))
        comms = tuple(frozenset(np.flatnonzero(rng.random(n) < rng.uniform(0.1, 0.7)).tolist()) for _ in range(k))
        c = Cover(n, tuple(x for x in comms if x))
        Y = cover_matrix_of(c).astype(float)
        nuc = float(np.linalg.svd(Y, compute_uv=False).sum())
        size = sum(len(x) for x in c.communities)
        worst = max(worst, abs(nuc - np.trace(Y)), abs(nuc - size), abs(trace_norm_of_cover(c) - size))
    ctx = _quiet()
    try:
        net, _ = scenario_expt1(T=4, seed=1)
        norms_ok = True
        for cfg in (SolverConfig(max_iters=200, r=8, b_mult=1.0, step0=1e-2),
                    SolverConfig(max_iters=200, r=8, b_mult=0.5, step0=1e-2, tie_snapshots=True),
                    SolverConfig(max_iters=200, r=8, b_mult=0.2, step0=1e-2, overlap_allowed=False)):
            _, trace = solve_offline(net, cfg)
            norms_ok &= max(trace.max_norm) <= cfg.budget(net.n) * (1 + 1e-12)
    finally:
        ctx.__exit__(None, None, None)
    ok = worst <= 1e-8 and norms_ok
    return ok, f"max identity error {worst:.1e}; iterates inside the ball: {norms_ok}"


# ---------------------------------------------------------------- C7

def _c7_net(n, T, deg, seed=0):
    truth = Cover(n, tuple(frozenset(range(i, n, 10)) for i in range(10)))
    p = deg / n
    return sample_network([truth] * T, min(1.0, 2 * p), 0.75 * p, seed=seed)


def _c7_measure(net, r=8, iters=30, repeats=3):
    cfg = SolverConfig(r=r, max_iters=iters, tol=0.0, gamma=1.0)
    rng = np.random.default_rng(0)
    init = [0.1 * rng.random((net.n, r)) for _ in range(net.T)]
    solve_offline(net, cfg, init=init)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve_offline(net, cfg, init=init)
        times.append(time.perf_counter() - t0)
    tracemalloc.start()
    try:
        solve_offline(net, cfg, init=init)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return min(times), peak, net.total_edges + net.n * r * net.T


def criterion_c7():
    ctx = _quiet()
    try:
        base = _c7_measure(_c7_net(400, 4, 10))
        t2 = _c7_measure(_c7_net(400, 8, 10))
        e2 = _c7_measure(_c7_net(400, 4, 20))
        e4 = _c7_measure(_c7_net(400, 4, 40))
        n2 = _c7_measure(_c7_net(800, 4, 10))
    finally:
        ctx.__exit__(None, None, None)
    rt, re = t2[0] / base[0], e2[0] / base[0]
    per_unit = [pk / size for _, pk, size in (base, t2, e2, e4, n2)]
    spread = max(per_unit) / min(per_unit)
    ok = rt <= 3 and re <= 3 and spread <= 2
    detail = (f"time x{rt:.2f} for 2T, x{re:.2f} for 2E; memory per (E + nrT) unit spread x{spread:.2f}; "
              f"for information, time x{n2[0] / base[0]:.2f} for 2n")
    return ok, detail


# ---------------------------------------------------------------- C8

C8_SOLVER = SolverConfig(warm_iters=1500, gamma=1.0, b_mult=1.0, r=16, step0=3e-4, step_decay=0.9995,
                         max_iters=6000, tol=0.0)


def c8_timeline(seed=0):
    net, truth = scenario_expt2(seed=seed)
    F, _ = solve_offline(net, C8_SOLVER)
    return extract_timeline(F, NmfConfig(rank_select="objective"), net=net, gamma=C8_SOLVER.gamma), truth


def c8_checks(covers):
    """Phase III largest community, Phase IV split count, Phase II overlap count."""
    largest = max((len(c) for t in range(20, 30) for c in covers[t].communities), default=0)
    s0 = frozenset(range(60))
    split = sum(
        any(a.isdisjoint(b) and a | b == s0 for a in covers[t].communities for b in covers[t].communities)
        for t in range(30, 40)
    )
    overlap = sum(
        all(len(covers[t].memberships().get(i, ())) >= 2 for i in range(30, 40)) for t in range(10, 20)
    )
    return largest, split, overlap


def criterion_c8():
    ctx = _quiet()
    try:
        tl, _ = c8_timeline()
    finally:
        ctx.__exit__(None, None, None)
    largest, split, overlap = c8_checks(tl.covers)
    ok = largest >= 60 and split >= 1 and overlap >= 7
    detail = (f"largest Phase-III community {largest}; split found in {split}/10 Phase-IV snapshots; "
              f"nodes 30-39 doubly assigned in {overlap}/10 Phase-II snapshots")
    return ok, detail


# ---------------------------------------------------------------- runner

CRITERIA = {
    "C1": criterion_c1,
    "C2": criterion_c2,
    "C3": criterion_c3,
    "C4": criterion_c4,
    "C5": criterion_c5,
    "C6": criterion_c6,
    "C7": criterion_c7,
    "C8": criterion_c8,
}


def run_criterion(key):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[key]()
    line = f"{key} {'PASS' if ok else 'FAIL'} [{NAMES[key]}] {detail} ({time.perf_counter() - t0:.0f}s)"
    ACCEPTANCE_LINES[key] = line
    print(line, flush=True)
    return ok, line


SLOW = {"C1", "C3", "C4", "C8"}


@pytest.mark.parametrize(
    "key", [pytest.param(k, marks=pytest.mark.slow) if k in SLOW else k for k in CRITERIA]
)
def test_criterion(key):
    ok, line = run_criterion(key)
    assert ok, line


if __name__ == "__main__":
    keys = sys.argv[1:] or list(CRITERIA)
    results = [run_criterion(k)[0] for k in keys]
    sys.exit(0 if all(results) else 1)
