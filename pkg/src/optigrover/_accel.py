"""Hot kernels with a numba path and a pure-numpy fallback.

Set ``OPTIGROVER_DISABLE_NUMBA=1`` before import to force the numpy path.
Both implementations are always importable under explicit names so tests
and the benchmark can compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("OPTIGROVER_DISABLE_NUMBA", "0") not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"


def apply_pair_numpy(state, m, i0, i1):
    """In place: rows (i0[k], i1[k]) of ``state`` <- m @ rows."""
    x0 = state[i0]
    x1 = state[i1]
    state[i0] = m[0, 0] * x0 + m[0, 1] * x1
    state[i1] = m[1, 0] * x0 + m[1, 1] * x1


def apply_phase_numpy(state, idx, factor):
    state[idx] *= factor


def oracle_errors_numpy(psi_pre, blocks, order, deltas, post, target):
    """Error probability per noise sample for a per-path oracle.

    psi_pre: (P, 2) amplitudes entering the oracle.
    blocks: (C, P, 2, 2) component Jones matrices (identity where absent).
    order: (P, C) component indices in traversal order per path, -1 padded.
    deltas: (S, C, P, 2) phase errors in radians.
    post: (2P, 2P) unitary of everything after the oracle.
    """
    n_samples = deltas.shape[0]
    n_paths = psi_pre.shape[0]
    out = np.empty((n_samples, n_paths, 2), dtype=np.complex128)
    for p in range(n_paths):
        vec = np.broadcast_to(psi_pre[p], (n_samples, 2)).copy()
        for c in order[p]:
            if c < 0:
                break
            # noise diag(e^{i d_H}, e^{i d_V}) pre-multiplies the component
            vec = np.einsum("ij,sj->si", blocks[c, p], vec)
            vec = vec * np.exp(1j * deltas[:, c, p, :])
        out[:, p, :] = vec
    final = out.reshape(n_samples, 2 * n_paths) @ post[target]
    return 1.0 - np.abs(final) ** 2


if HAVE_NUMBA:

    @njit(cache=True)
    def apply_pair_numba(state, m, i0, i1):
        m00 = m[0, 0]
        m01 = m[0, 1]
        m10 = m[1, 0]
        m11 = m[1, 1]
        ncol = state.shape[1]
        for k in range(i0.shape[0]):
            a = i0[k]
            b = i1[k]
            for j in range(ncol):
                x0 = state[a, j]
                x1 = state[b, j]
                state[a, j] = m00 * x0 + m01 * x1
                state[b, j] = m10 * x0 + m11 * x1

    @njit(cache=True)
    def apply_phase_numba(state, idx, factor):
        ncol = state.shape[1]
        for k in range(idx.shape[0]):
            a = idx[k]
            for j in range(ncol):
                state[a, j] = state[a, j] * factor

    @njit(cache=True)
    def oracle_errors_numba(psi_pre, blocks, order, deltas, post, target):
        n_samples = deltas.shape[0]
        n_paths = psi_pre.shape[0]
        dim = 2 * n_paths
        errs = np.empty(n_samples)
        vec = np.empty(dim, dtype=np.complex128)
        for s in range(n_samples):
            for p in range(n_paths):
                h = psi_pre[p, 0]
                v = psi_pre[p, 1]
                for k in range(order.shape[1]):
                    c = order[p, k]
                    if c < 0:
                        break
                    b = blocks[c, p]
                    nh = b[0, 0] * h + b[0, 1] * v
                    nv = b[1, 0] * h + b[1, 1] * v
                    h = nh * np.exp(1j * deltas[s, c, p, 0])
                    v = nv * np.exp(1j * deltas[s, c, p, 1])
                vec[2 * p] = h
                vec[2 * p + 1] = v
            amp = 0j
            for j in range(dim):
                amp += post[target, j] * vec[j]
            errs[s] = 1.0 - (amp.real * amp.real + amp.imag * amp.imag)
        return errs

else:  # pragma: no cover
    apply_pair_numba = apply_pair_numpy
    apply_phase_numba = apply_phase_numpy
    oracle_errors_numba = oracle_errors_numpy


if USE_NUMBA:
    apply_pair = apply_pair_numba
    apply_phase = apply_phase_numba
    oracle_errors = oracle_errors_numba
else:
    apply_pair = apply_pair_numpy
    apply_phase = apply_phase_numpy
    oracle_errors = oracle_errors_numpy
