"""Hot inner loops of the online recursion, with two interchangeable backends.

The per-chunk update is the only compute-bound path in the package: at
the default chunk size of 1 a run performs thousands of small-matrix
updates, and the node-count search multiplies that again. The kernels
here are compiled with numba when available; set

    WRISTFLEX_BACKEND=numpy   # force the pure-numpy twins
    WRISTFLEX_BACKEND=numba   # require numba (ImportError if missing)

before import to override the default (numba if importable). Both
backends implement the identical update:

    M'    = M - M H' (I + H M H')^-1 H M
    beta' = beta + M' H' (T - H beta)

with M re-symmetrized after every step. Chunks of one row take a
rank-one shortcut that avoids the LAPACK solve; it relies on the
maintained symmetry of M. All arrays must be float64 and C-contiguous.

`benchmarks/bench_oselm.py` times the two backends against each other.
"""

from __future__ import annotations

import os

import numpy as np


def _update_chunk(m_inv, beta, h, t):
    nk = h.shape[0]
    if nk == 1:
        hv = h[0]
        u = m_inv @ hv
        denom = 1.0 + hv @ u
        m2 = m_inv - np.outer(u, u) / denom
        m2 = 0.5 * (m2 + m2.T)
        resid = t[0] - hv @ beta
        beta2 = beta + np.outer(m2 @ hv, resid)
        return m2, beta2
    ht = h.T.copy()
    hm = h @ m_inv
    mht = m_inv @ ht
    inner = np.eye(nk) + h @ mht
    gain = np.linalg.solve(inner, hm)
    m2 = m_inv - mht @ gain
    m2 = 0.5 * (m2 + m2.T)
    resid = t - h @ beta
    beta2 = beta + m2 @ (ht @ resid)
    return m2, beta2


def _run_chunks(m_inv, beta, H, T, chunk_size):
    n_rows = H.shape[0]
    i = 0
    while i < n_rows:
        j = min(i + chunk_size, n_rows)
        m_inv, beta = _update_chunk(m_inv, beta, H[i:j], T[i:j])
        i = j
    return m_inv, beta


update_chunk_numpy = _update_chunk
run_chunks_numpy = _run_chunks

_requested = os.environ.get("WRISTFLEX_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"WRISTFLEX_BACKEND={_requested!r}; expected 'numba' or 'numpy'"
    )

update_chunk_numba = None
run_chunks_numba = None
HAS_NUMBA = False

if _requested != "numpy":
    try:
        from numba import njit
    except ImportError:
        if _requested == "numba":
            raise
    else:
        update_chunk_numba = njit(cache=True)(_update_chunk)

        @njit(cache=True)
        def _run_chunks_nb(m_inv, beta, H, T, chunk_size):
            n_rows = H.shape[0]
            i = 0
            while i < n_rows:
                j = min(i + chunk_size, n_rows)
                m_inv, beta = update_chunk_numba(m_inv, beta, H[i:j], T[i:j])
                i = j
            return m_inv, beta

        run_chunks_numba = _run_chunks_nb
        HAS_NUMBA = True

if HAS_NUMBA:
    BACKEND = "numba"
    update_chunk = update_chunk_numba
    run_chunks = run_chunks_numba
else:
    BACKEND = "numpy"
    update_chunk = update_chunk_numpy
    run_chunks = run_chunks_numpy


def warmup() -> None:
    """Trigger JIT compilation once so later timing excludes it. No-op on numpy."""
    m = np.eye(2)
    beta = np.zeros((2, 1))
    h = np.ones((1, 2))
    t = np.zeros((1, 1))
    update_chunk(m, beta, h, t)
    run_chunks(m, beta, np.ones((3, 2)), np.zeros((3, 1)), 2)
