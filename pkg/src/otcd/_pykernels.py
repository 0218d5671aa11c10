"""Pure-numpy fallback for the pairwise kernels in ``_ckernels``.

Rows are processed in blocks so the dense working set stays at
``block x n`` instead of ``n x n``.
"""

import numpy as np
import scipy.sparse as sp

_BLOCK_ELEMS = 1 << 20


def _blocks(n):
    step = max(1, min(n, _BLOCK_ELEMS // max(n, 1)))
    for a in range(0, n, step):
        yield a, min(n, a + step)


def snapshot_terms(U, indptr, indices, deg, two_m, include_diag, want_cap, cap_diag):
    n, r = U.shape
    A = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    gq = np.zeros((n, r))
    gc = np.zeros((n, r))
    quality = 0.0
    cap = 0.0
    for a, b in _blocks(n):
        Y = U[a:b] @ U.T
        Ab = A[a:b].toarray()
        idx = np.arange(a, b)
        C = np.abs(Ab - np.outer(deg[a:b], deg) / two_m)
        Ab[idx - a, idx] = 1.0
        C[idx - a, idx] = np.abs(1.0 - deg[a:b] ** 2 / two_m) if include_diag else 0.0
        diff = Y - Ab
        quality -= np.sum(C * np.abs(diff))
        gq[a:b] = 2.0 * (-C * np.sign(diff)) @ U
        if want_cap:
            over = np.maximum(Y - 1.0, 0.0)
            if not cap_diag:
                over[idx - a, idx] = 0.0
            cap += over.sum()
            gc[a:b] = 2.0 * (over > 0).astype(float) @ U
    return quality, gq, cap, gc


def persist_terms(Ua, Ub, rows, cols, include_diag):
    n = Ua.shape[0]
    ya = np.einsum("ij,ij->i", Ua[rows], Ua[cols])
    yb = np.einsum("ij,ij->i", Ub[rows], Ub[cols])
    sg = np.sign(ya - yb)
    dist = 2.0 * np.abs(ya - yb).sum()
    W = sp.coo_matrix((sg, (rows, cols)), shape=(n, n)).tocsr()
    W = W + W.T
    if include_diag:
        da = np.einsum("ij,ij->i", Ua, Ua)
        db = np.einsum("ij,ij->i", Ub, Ub)
        dist += np.abs(da - db).sum()
        W = W + sp.diags(np.sign(da - db))
    return dist, 2.0 * (W @ Ua), -2.0 * (W @ Ub)
