"""Backend selection for the pairwise objective kernels.

The compiled Cython extension is used when it was built; otherwise the numpy
fallback is selected at import.  Both expose the same two functions:

``snapshot_terms(U, indptr, indices, deg, two_m, include_diag, want_cap, cap_diag)``
    Weighted-l1 quality of ``U U^T`` against one snapshot, its factored
    gradient, and the overlap-cap hinge value with its gradient.
``persist_terms(Ua, Ub, rows, cols, include_diag)``
    Temporal distance between ``Ua Ua^T`` and ``Ub Ub^T`` over persisting
    edges ``(rows[e], cols[e])`` with ``rows < cols``, and gradients for both.
"""

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _BACKENDS.get("compiled", _pykernels)


def available_backends():
    return sorted(_BACKENDS)


def get_backend():
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def set_backend(name):
    """Switch the active backend (``"compiled"`` or ``"python"``)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = _BACKENDS[name]


def snapshot_terms(U, indptr, indices, deg, two_m, include_diag=False, want_cap=False, cap_diag=True):
    U = np.ascontiguousarray(U, dtype=np.float64)
    return _active.snapshot_terms(
        U,
        np.ascontiguousarray(indptr, dtype=np.intc),
        np.ascontiguousarray(indices, dtype=np.intc),
        np.ascontiguousarray(deg, dtype=np.float64),
        float(two_m),
        bool(include_diag),
        bool(want_cap),
        bool(cap_diag),
    )


def persist_terms(Ua, Ub, rows, cols, include_diag=False):
    return _active.persist_terms(
        np.ascontiguousarray(Ua, dtype=np.float64),
        np.ascontiguousarray(Ub, dtype=np.float64),
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        bool(include_diag),
    )
