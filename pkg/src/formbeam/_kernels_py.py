"""NumPy implementations of the hot pattern kernels.

Same signatures as the compiled ``_kernels`` extension; used when the
extension is not built or ``FORMBEAM_PURE_PYTHON`` is set.
"""

import numpy as np

# complex entries held in memory per block of directions
_BLOCK = 1 << 21


def array_factor(k, positions, coef):
    """``sum_n coef[n] * exp(1j * k[m] . positions[n])`` for every row of k.

    k: (M, 3) float, positions: (N, 3) float, coef: (N,) complex.
    Returns (M,) complex.
    """
    k = np.ascontiguousarray(k, dtype=np.float64)
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    if k.shape[1] != 3 or positions.shape[1] != 3 or coef.shape[0] != positions.shape[0]:
        raise ValueError("shape mismatch between directions, positions and coefficients")
    m = k.shape[0]
    n = positions.shape[0]
    out = np.empty(m, dtype=np.complex128)
    step = max(1, _BLOCK // max(n, 1))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        phase = k[lo:hi] @ positions.T
        out[lo:hi] = np.exp(1j * phase) @ coef
    return out


def array_factor_power(k, positions, coef):
    s = array_factor(k, positions, coef)
    return s.real * s.real + s.imag * s.imag


def grid_array_factor(k, translations, rotations, x0, dx, y0, dy, coef):
    """Array factor of satellites carrying identical regular planar grids.

    Element (n, i, j) sits at ``t[n] + R[n] @ (x0 + i*dx, y0 + j*dy, 0)``;
    ``coef`` has shape (Ns, Nr, Nc).
    """
    k = np.ascontiguousarray(k, dtype=np.float64)
    t = np.asarray(translations, dtype=np.float64)
    rot = np.asarray(rotations, dtype=np.float64)
    coef = np.asarray(coef, dtype=np.complex128)
    if k.shape[1] != 3 or t.shape[1] != 3 or coef.ndim != 3 or coef.shape[0] != t.shape[0] \
            or rot.shape[0] != t.shape[0]:
        raise ValueError("shape mismatch between directions, poses and coefficients")
    ns, nr, nc = coef.shape
    x = x0 + dx * np.arange(nr)
    y = y0 + dy * np.arange(nc)
    m = k.shape[0]
    out = np.empty(m, dtype=np.complex128)
    step = max(1, _BLOCK // max(ns * (nr + nc + 1), 1))
    for lo in range(0, m, step):
        kb = k[lo:lo + step]
        # q[m, n, :] = R_n^T k_m
        q = np.einsum("mk,nkl->mnl", kb, rot)
        ex = np.exp(1j * q[:, :, 0, None] * x)
        ey = np.exp(1j * q[:, :, 1, None] * y)
        inner = np.einsum("mni,nij,mnj->mn", ex, coef, ey)
        out[lo:lo + step] = np.einsum("mn,mn->m", np.exp(1j * (kb @ t.T)), inner)
    return out
