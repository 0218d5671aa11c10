"""Time the compiled and pure-Python kernels on random snapshots.

    python3 benchmarks/bench_kernels.py --sizes 200,400,800 --rank 16
"""

import argparse
import timeit

import numpy as np
import scipy.sparse as sp

from otcd import kernels
from otcd.objective import modularity_weights, persisting_pairs


def random_snapshot(rng, n, avg_degree):
    M = sp.random(n, n, density=avg_degree / n, random_state=rng, format="csr")
    M = sp.triu(M, k=1)
    A = ((M + M.T) > 0).astype(float).tocsr()
    A.sort_indices()
    return A


def bench(n, r, avg_degree, repeat, rng):
    A, B = random_snapshot(rng, n, avg_degree), random_snapshot(rng, n, avg_degree)
    W = modularity_weights(A)
    pairs = persisting_pairs(A, B)
    U, V = rng.random((n, r)), rng.random((n, r))
    calls = {
        "snapshot": lambda: kernels.snapshot_terms(U, A.indptr, A.indices, W.degrees, W.two_m, False, True, True),
        "persist": lambda: kernels.persist_terms(U, V, *pairs),
    }
    out = {}
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        for name, fn in calls.items():
            fn()
            out[backend, name] = min(timeit.repeat(fn, number=1, repeat=repeat))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,400,800")
    ap.add_argument("--rank", type=int, default=16)
    ap.add_argument("--degree", type=float, default=10.0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    before = kernels.get_backend()
    backends = kernels.available_backends()
    print("n,kernel," + ",".join(f"{b}_ms" for b in backends) + (",speedup" if len(backends) > 1 else ""))
    try:
        for n in (int(s) for s in args.sizes.split(",")):
            res = bench(n, args.rank, args.degree, args.repeat, rng)
            for name in ("snapshot", "persist"):
                ms = [1e3 * res[b, name] for b in backends]
                row = f"{n},{name}," + ",".join(f"{x:.3f}" for x in ms)
                if len(backends) > 1:
                    row += f",{res['python', name] / res['compiled', name]:.1f}"
                print(row)
    finally:
        kernels.set_backend(before)


if __name__ == "__main__":
    main()
