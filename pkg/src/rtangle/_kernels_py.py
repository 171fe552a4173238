"""Pure-numpy implementation of the convex-roof hot kernels.

Selected automatically when the compiled extension is unavailable; see
``rtangle.kernels``.  The two backends implement the same contract and are
cross-checked in the test suite.
"""
from __future__ import annotations

import numpy as np

# Monomials of the 2x2x2 hyperdeterminant d1 - 2 d2 + 4 d3 over the
# amplitude vector: coefficient and the four (possibly repeated) indices.
_IDX = np.array(
    [
        (0, 0, 7, 7), (1, 1, 6, 6), (2, 2, 5, 5), (4, 4, 3, 3),
        (0, 7, 3, 4), (0, 7, 5, 2), (0, 7, 6, 1),
        (3, 4, 5, 2), (3, 4, 6, 1), (5, 2, 6, 1),
        (0, 6, 5, 3), (7, 1, 2, 4),
    ],
    dtype=np.int64,
).T
_COEF = np.array([1, 1, 1, 1, -2, -2, -2, -2, -2, -2, 4, 4], dtype=np.float64)

_NORM_FLOOR = 1e-30


def hyperdet_rows(W: np.ndarray) -> np.ndarray:
    """Hyperdeterminant of each row of an (m, 8) complex array."""
    W = np.atleast_2d(W)
    return (W[:, _IDX[0]] * W[:, _IDX[1]] * W[:, _IDX[2]] * W[:, _IDX[3]]) @ _COEF.astype(complex)


def _hyperdet_grad_rows(W: np.ndarray) -> np.ndarray:
    G = np.zeros_like(W)
    for coef, idx in zip(_COEF, _IDX.T):
        a, b, c, d = idx
        pa, pb, pc, pd = W[:, a], W[:, b], W[:, c], W[:, d]
        G[:, a] += coef * pb * pc * pd
        G[:, b] += coef * pa * pc * pd
        G[:, c] += coef * pa * pb * pd
        G[:, d] += coef * pa * pb * pc
    return G


def _row_norms_sq(W: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", W.real, W.real) + np.einsum("ij,ij->i", W.imag, W.imag)


def roof_value(W: np.ndarray, use_sqrt: bool, eps: float = 0.0) -> float:
    """Convex-roof objective on sub-normalized member rows.

    ``use_sqrt`` selects sum_i 2 sqrt|D_i| (degree-2 homogeneous, weights
    implicit); otherwise sum_i 4 |D_i| / n_i with n_i the squared row norm.
    ``eps > 0`` smooths the non-differentiable points for annealed descent.
    """
    D = hyperdet_rows(W)
    absD2 = (D * D.conj()).real
    if use_sqrt:
        return float(np.sum(2.0 * (absD2 + eps * eps) ** 0.25))
    n = _row_norms_sq(W)
    alive = n > _NORM_FLOOR
    val = np.zeros_like(n)
    ns = np.where(alive, n, 1.0)
    val = 4.0 * np.sqrt(absD2 + (eps * eps) * ns ** 4) / ns
    return float(np.sum(np.where(alive, val, 0.0)))


def roof_value_grad(W: np.ndarray, use_sqrt: bool, eps: float = 0.0):
    """Objective value and the Wirtinger derivative P = df/dpsi (m, 8).

    The steepest-descent direction in amplitude space is ``-conj(P)``.
    """
    D = hyperdet_rows(W)
    Gd = _hyperdet_grad_rows(W)
    absD2 = (D * D.conj()).real
    if use_sqrt:
        s = absD2 + eps * eps
        f = float(np.sum(2.0 * s ** 0.25))
        # an exactly tangle-free member sits at the cusp; its subgradient is 0
        coef = np.where(s > 0.0, 0.5 * np.maximum(s, 1e-300) ** -0.75, 0.0)
        P = coef[:, None] * D.conj()[:, None] * Gd
        return f, P
    n = _row_norms_sq(W)
    alive = n > _NORM_FLOOR
    ns = np.where(alive, n, 1.0)
    s = absD2 + (eps * eps) * ns ** 4
    sq = np.sqrt(np.maximum(s, 1e-300))
    vals = np.where(alive, 4.0 * sq / ns, 0.0)
    f = float(np.sum(vals))
    # d/dpsi [4 sqrt(|D|^2 + eps^2 n^4) / n]
    #   = (2/(n sqrt(s))) (conj(D) G + 4 eps^2 n^3 conj(psi)) - 4 sqrt(s)/n^2 conj(psi)
    t1 = (2.0 / (ns * sq))[:, None] * (D.conj()[:, None] * Gd + (4.0 * eps * eps * ns ** 3)[:, None] * W.conj())
    t2 = (4.0 * sq / ns ** 2)[:, None] * W.conj()
    P = np.where(alive[:, None], t1 - t2, 0.0)
    return f, P


def polar_retract(A: np.ndarray) -> np.ndarray:
    """Nearest matrix with orthonormal columns (polar factor of A)."""
    u, _, vh = np.linalg.svd(A, full_matrices=False)
    return u @ vh
