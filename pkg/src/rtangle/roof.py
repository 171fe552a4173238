"""Numerical convex-roof minimization over pure-state decompositions.

Every size-m decomposition of a rank-r density matrix arises from its
spectral ensemble through an m x r matrix U with orthonormal columns
(purification freedom): the sub-normalized members are the rows of
W = U B, where B stacks sqrt(eigenvalue)-scaled eigenvectors.  The
objective uses the homogeneity of the invariants, so weights never appear
explicitly:

    sqrt_tau:  sum_i 2 sqrt|Det(W_i)|
    tau:       sum_i 4 |Det(W_i)| / ||W_i||^2

Both functionals are non-smooth exactly where members become tangle-free,
which is where minimizers live, so the search anneals a smoothing
parameter toward zero.  Two local searches are provided:

* ``gradient`` (default): projected Wirtinger-gradient descent on the
  column-orthonormal manifold with polar retraction and backtracking.
* ``simplex``: derivative-free block-coordinate descent, running a small
  2-D Nelder-Mead over each plane-rotation angle pair in turn.

For rank-2 inputs the search is additionally seeded algebraically: the
tangle-free directions inside the range of rho are the roots of a quartic
(the hyperdeterminant restricted to the range), and a non-negative
least-squares fit over the root projectors either certifies a tangle-free
decomposition outright or provides starting points that already sit on the
non-smooth locus.  Random restarts then cover the rest.

The returned value is an upper bound on the true convex roof by
construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import nnls

from . import kernels
from .invariants import invariants
from .states import (
    EIG_CUTOFF,
    DensityMatrix,
    PureState,
    ValidationError,
    WeightedEnsemble,
    ensemble_to_density,
)

FUNCTIONALS = ("sqrt_tau", "tau")

# smoothing ladders: random starts explore through the coarse one; seeded
# starts already sit on the non-smooth locus and only get the fine tail,
# so the early heavy smoothing cannot pull them out of their basin
_COARSE_SCHEDULE = (1e-2, 1e-3, 1e-4, 1e-6, 1e-9, 1e-13, 0.0)
_FINE_SCHEDULE = (1e-5, 1e-7, 1e-9, 1e-13, 0.0)
_WEIGHT_FLOOR = 1e-14
_MIX_TOL = 1e-8


@dataclass(frozen=True)
class RoofOptions:
    """Search-budget knobs for :func:`roof_minimize`.

    ``max_iterations`` is the per-start budget: gradient steps for the
    default method, pairwise 2-D minimizations for ``simplex``.  The
    ``tolerance`` is the objective-stall threshold that ends a start.
    """

    ensemble_size: int = 4
    restarts: int = 50
    max_iterations: int = 2000
    tolerance: float = 1e-9
    seed: int = 0
    method: str = "gradient"

    def __post_init__(self):
        if self.ensemble_size < 1 or self.ensemble_size > 8:
            raise ValidationError("RoofOptions: ensemble_size must be in 1..8")
        if self.restarts < 1:
            raise ValidationError("RoofOptions: restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValidationError("RoofOptions: max_iterations must be >= 1")
        if self.method not in ("gradient", "simplex"):
            raise ValidationError(f"RoofOptions: unknown method {self.method!r}")


@dataclass(frozen=True)
class RoofResult:
    """Best decomposition found; ``value`` upper-bounds the true roof.

    ``best_restart_index`` is the index of the winning random restart, or
    a negative number when one of the deterministic algebraic seed starts
    won (-1 for the first seed, -2 for the second, ...).
    """

    value: float
    ensemble: WeightedEnsemble
    restarts_used: int
    best_restart_index: int
    converged: bool


def _check_functional(functional: str) -> bool:
    if functional not in FUNCTIONALS:
        raise ValidationError(f"functional must be one of {FUNCTIONALS}, got {functional!r}")
    return functional == "sqrt_tau"


def _member_value(psi: PureState, use_sqrt: bool) -> float:
    inv = invariants(psi)
    return inv.sqrt_tau if use_sqrt else inv.tau


def _eigen_factor(rho: DensityMatrix, cutoff: float = EIG_CUTOFF):
    """Rows sqrt(lambda_k) e_k of the spectral factorization, rank x 8."""
    lam, vec = np.linalg.eigh(rho.matrix)
    keep = lam > cutoff
    lam, vec = lam[keep], vec[:, keep]
    return np.ascontiguousarray((vec * np.sqrt(lam)).T.astype(np.complex128))


def _ensemble_from_rows(W: np.ndarray) -> WeightedEnsemble:
    members = []
    for row in W:
        w = float(np.vdot(row, row).real)
        if w > _WEIGHT_FLOOR:
            members.append((w, PureState(row / np.sqrt(w))))
    return WeightedEnsemble(tuple(members))


# --------------------------------------------------------------------------
# algebraic seeding for rank-2 inputs

_QPTS = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 1j))
_QVINV = np.linalg.inv(
    np.array([[x ** k * y ** (4 - k) for k in range(5)] for x, y in _QPTS], dtype=complex)
)


def _pair_quartic(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """Coefficients q_k of Det(x w1 + y w2) = sum_k q_k x^k y^(4-k)."""
    vals = np.array([kernels.hyperdet_rows((x * w1 + y * w2)[None, :])[0] for x, y in _QPTS])
    return _QVINV @ vals


def _zero_direction_rows(B: np.ndarray) -> list:
    """Unit coefficient vectors (on rows of U) of tangle-free range states."""
    q = _pair_quartic(B[0], B[1])
    scale = np.abs(q).max()
    if scale == 0.0:  # entire range is tangle-free
        return [np.array([1.0, 0.0], complex), np.array([0.0, 1.0], complex)]
    q = q / scale
    dirs = []
    poly = q[::-1]  # highest power of t = x/y first
    lead = np.abs(poly[0])
    if lead < 1e-12:  # root at infinity: the pure-b1 direction
        dirs.append(np.array([1.0, 0.0], complex))
        poly = poly[1:]
    while len(poly) > 1 and np.abs(poly[0]) < 1e-14:
        dirs.append(np.array([1.0, 0.0], complex))
        poly = poly[1:]
    if len(poly) > 1:
        for t in np.roots(poly):
            v = np.array([t, 1.0], complex)
            dirs.append(v / np.linalg.norm(v))
    return dirs[:4]


def _seed_starts(B: np.ndarray, m: int):
    """Deterministic starts built from tangle-free directions (rank 2 only).

    Returns (exact, starts): ``exact`` is a U realizing an (up to numerical
    residual) tangle-free decomposition when one exists, else None;
    ``starts`` are retracted U matrices whose rows begin on the tangle-free
    locus.
    """
    dirs = _zero_direction_rows(B)
    if len(dirs) < 2:
        return None, []
    mats = [np.conj(np.outer(d_, d_.conj())) for d_ in dirs]
    A = np.array([[M[0, 0].real, M[1, 1].real, M[0, 1].real, M[0, 1].imag] for M in mats]).T
    target = np.array([1.0, 1.0, 0.0, 0.0])
    exact = None
    u, residual = nnls(A, target)
    if residual < 1e-10 and np.count_nonzero(u > 1e-12) >= 2:
        rows = [np.sqrt(u[n]) * dirs[n] for n in range(len(dirs))]
        rows += [np.zeros(2, complex)] * (m - len(rows))
        exact = np.array(rows[:m])
    starts = []
    for sub in combinations(range(len(dirs)), min(3, len(dirs))):
        usub, _ = nnls(A[:, list(sub)], target)
        if usub.max() <= 0.0:
            continue
        # scale the root weights until the leftover I - sum u_n d_n d_n^dag
        # becomes exactly singular PSD: the seed is then a feasible
        # decomposition whose subset members sit exactly on the
        # tangle-free locus, with one completion member carrying the rest.
        S = sum(usub[i] * mats[n] for i, n in enumerate(sub))
        lam_max = float(np.linalg.eigvalsh(S)[-1])
        if lam_max <= 0.0:
            continue
        usub = usub / lam_max
        left = np.eye(2, dtype=complex) - S / lam_max
        ev, evec = np.linalg.eigh((left + left.conj().T) / 2.0)
        rows = [np.sqrt(usub[i]) * dirs[n] for i, n in enumerate(sub)]
        for k in range(2):
            if ev[k] > 1e-12:
                rows.append(np.sqrt(ev[k]) * np.conj(evec[:, k]))
        rows += [np.zeros(2, complex)] * (m - len(rows))
        starts.append(kernels.polar_retract(np.array(rows[:m])))
    return exact, starts


# --------------------------------------------------------------------------
# projected-gradient local search

def _grad_stage(U, B, use_sqrt, eps, max_steps, tolerance):
    """Backtracking descent at one smoothing level.

    Returns (U, steps_used, stalled): ``stalled`` means the stage ended on
    its own (tiny gradient, tiny improvement, or an exhausted line search)
    rather than by running out of steps.
    """
    eta = 0.2
    steps = 0
    f, P = kernels.roof_value_grad(U @ B, use_sqrt, eps)
    while steps < max_steps:
        E = 2.0 * np.conj(P @ B.T)
        A = U.conj().T @ E
        G = E - U @ ((A + A.conj().T) / 2.0)
        gn2 = float(np.sum(G.real ** 2 + G.imag ** 2))
        if not np.isfinite(gn2):
            return U, steps, True
        if gn2 < 1e-26:
            return U, steps, True
        moved = False
        while eta > 1e-15:
            try:
                U2 = kernels.polar_retract(U - eta * G)
            except np.linalg.LinAlgError:
                eta *= 0.5
                continue
            f2, P2 = kernels.roof_value_grad(U2 @ B, use_sqrt, eps)
            if f2 < f - 1e-4 * eta * gn2:
                improvement = f - f2
                U, f, P = U2, f2, P2
                eta = min(eta * 1.4, 2.0)
                moved = True
                steps += 1
                if improvement < tolerance:
                    return U, steps, True
                break
            eta *= 0.5
        if not moved:
            return U, steps, True
    return U, steps, False


def _gradient_search(U0, B, use_sqrt, opts: RoofOptions, schedule=_COARSE_SCHEDULE):
    """Annealed descent; keeps the best exact-objective point seen at any
    stage boundary, so a smoothing stage can never lose an already-good
    iterate."""
    per_stage = max(opts.max_iterations // len(schedule), 10)
    U = U0
    best_W = U0 @ B
    best_value = kernels.roof_value(best_W, use_sqrt, 0.0)
    stalled = False
    for eps in schedule:
        stage_tol = opts.tolerance if eps == 0.0 else max(opts.tolerance, 1e-10)
        U, _, stalled = _grad_stage(U, B, use_sqrt, eps, per_stage, stage_tol)
        value = kernels.roof_value(U @ B, use_sqrt, 0.0)
        if value < best_value:
            best_value, best_W = value, U @ B
    return best_W, best_value, stalled


# --------------------------------------------------------------------------
# derivative-free local search: block-coordinate 2-D simplex over
# plane-rotation angles

def _assemble_from_angles(theta: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    """The plane-rotation chart: m^2 angles -> W = U(theta) [B; 0]."""
    r = B.shape[0]
    W = np.zeros((m, 8), dtype=np.complex128)
    W[:r] = B
    k = 0
    for i in range(m):
        for j in range(i + 1, m):
            _rotate_rows(W, i, j, theta[k], theta[k + 1])
            k += 2
    W *= np.exp(1j * theta[k:k + m])[:, None]
    return W


def _rotate_rows(W, i, j, th, ph):
    c, s = np.cos(th), np.sin(th)
    e = np.exp(1j * ph)
    wi = W[i].copy()
    W[i] = c * wi + s * np.conj(e) * W[j]
    W[j] = -s * e * wi + c * W[j]


def _pair_value(q, ni2, nj2, th, ph, use_sqrt, eps):
    c, s = np.cos(th), np.sin(th)
    e = np.exp(1j * ph)
    d1 = sum(q[k] * c ** k * (s * np.conj(e)) ** (4 - k) for k in range(5))
    d2 = sum(q[k] * (-s * e) ** k * c ** (4 - k) for k in range(5))
    if use_sqrt:
        return 2.0 * (abs(d1) ** 2 + eps * eps) ** 0.25 + 2.0 * (abs(d2) ** 2 + eps * eps) ** 0.25
    n1 = c * c * ni2 + s * s * nj2
    n2 = s * s * ni2 + c * c * nj2
    v1 = 4.0 * np.sqrt(abs(d1) ** 2 + eps * eps * n1 ** 4) / n1 if n1 > 1e-30 else 0.0
    v2 = 4.0 * np.sqrt(abs(d2) ** 2 + eps * eps * n2 ** 4) / n2 if n2 > 1e-30 else 0.0
    return v1 + v2


def _optimize_pair(W, i, j, use_sqrt, eps, grid_n=20, nm_iters=50):
    """Minimize the two-row objective over one plane rotation, in place."""
    wi, wj = W[i].copy(), W[j].copy()
    ni2 = float(np.vdot(wi, wi).real)
    nj2 = float(np.vdot(wj, wj).real)
    q = _pair_quartic(wi, wj)

    th = np.linspace(0.0, np.pi / 2.0, grid_n, endpoint=False)
    ph = np.linspace(0.0, 2.0 * np.pi, grid_n, endpoint=False)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    c, s = np.cos(TH), np.sin(TH)
    e = np.exp(1j * PH)
    pows = np.arange(5)

    def qeval(x, y):
        return ((x[..., None] ** pows) * (y[..., None] ** (4 - pows))) @ q

    d1 = qeval(c + 0j, s * np.conj(e))
    d2 = qeval(-s * e, c + 0j)
    if use_sqrt:
        vals = 2.0 * (np.abs(d1) ** 2 + eps * eps) ** 0.25 + 2.0 * (np.abs(d2) ** 2 + eps * eps) ** 0.25
    else:
        n1 = c ** 2 * ni2 + s ** 2 * nj2
        n2 = s ** 2 * ni2 + c ** 2 * nj2
        vals = np.where(n1 > 1e-30, 4.0 * np.sqrt(np.abs(d1) ** 2 + eps * eps * n1 ** 4) / np.maximum(n1, 1e-30), 0.0) \
            + np.where(n2 > 1e-30, 4.0 * np.sqrt(np.abs(d2) ** 2 + eps * eps * n2 ** 4) / np.maximum(n2, 1e-30), 0.0)
    k0 = np.unravel_index(int(np.argmin(vals)), vals.shape)
    x0 = np.array([TH[k0], PH[k0]])

    def fun(v):
        return _pair_value(q, ni2, nj2, v[0], v[1], use_sqrt, eps)

    sim = np.array([x0, x0 + [0.06, 0.0], x0 + [0.0, 0.06]])
    fs = np.array([fun(v) for v in sim])
    for _ in range(nm_iters):
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if fs[-1] - fs[0] < 1e-14:
            break
        cen = sim[:2].mean(axis=0)
        xr = cen + (cen - sim[2])
        fr = fun(xr)
        if fr < fs[0]:
            xe = cen + 2.0 * (cen - sim[2])
            fe = fun(xe)
            if fe < fr:
                sim[2], fs[2] = xe, fe
            else:
                sim[2], fs[2] = xr, fr
        elif fr < fs[1]:
            sim[2], fs[2] = xr, fr
        else:
            xc = cen + 0.5 * ((xr if fr < fs[2] else sim[2]) - cen)
            fc = fun(xc)
            if fc < min(fr, fs[2]):
                sim[2], fs[2] = xc, fc
            else:
                sim[1:] = sim[0] + 0.5 * (sim[1:] - sim[0])
                fs[1:] = [fun(v) for v in sim[1:]]
    order = np.argsort(fs, kind="stable")
    best = sim[order][0]
    _rotate_rows(W, i, j, best[0], best[1])


def _simplex_search(W0, B, use_sqrt, opts: RoofOptions, schedule=_COARSE_SCHEDULE):
    m = W0.shape[0]
    W = W0.copy()
    budget = opts.max_iterations
    stalled = False
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    best_W = W0.copy()
    best_value = kernels.roof_value(best_W, use_sqrt, 0.0)
    for eps in schedule:
        stage_tol = opts.tolerance if eps == 0.0 else max(opts.tolerance, 1e-6)
        prev = kernels.roof_value(W, use_sqrt, eps)
        stalled = False
        while budget > 0:
            for i, j in pairs:
                _optimize_pair(W, i, j, use_sqrt, eps)
            budget -= len(pairs)
            cur = kernels.roof_value(W, use_sqrt, eps)
            if prev - cur < stage_tol:
                stalled = True
                break
            prev = cur
        value = kernels.roof_value(W, use_sqrt, 0.0)
        if value < best_value:
            best_value, best_W = value, W.copy()
    return best_W, best_value, stalled


# --------------------------------------------------------------------------

def roof_minimize(rho: DensityMatrix, functional: str = "sqrt_tau",
                  opts: RoofOptions | None = None) -> RoofResult:
    """Minimize the convex-roof objective over size-m decompositions of rho."""
    opts = opts if opts is not None else RoofOptions()
    use_sqrt = _check_functional(functional)
    B = _eigen_factor(rho)
    r = B.shape[0]
    m = opts.ensemble_size
    if m < r:
        raise ValidationError(
            f"roof_minimize: ensemble_size {m} is below the input rank {r}")
    if r == 1:
        ens = _ensemble_from_rows(B)
        w, psi = ens.members[0]
        return RoofResult(value=w * _member_value(psi, use_sqrt), ensemble=ens,
                          restarts_used=0, best_restart_index=-1, converged=True)

    labelled_starts = []
    if r == 2:
        exact, seeds = _seed_starts(B, m)
        if exact is not None:
            labelled_starts.append(("exact", exact))
        for s_ in seeds:
            labelled_starts.append(("seed", s_))

    best_value = np.inf
    best_W = None
    best_label = 0
    best_stalled = False
    seed_counter = 0
    for label, U0 in labelled_starts:
        seed_counter += 1
        if label == "exact":
            W, value, stalled = U0 @ B, kernels.roof_value(U0 @ B, use_sqrt, 0.0), True
        elif opts.method == "gradient":
            W, value, stalled = _gradient_search(U0, B, use_sqrt, opts, _FINE_SCHEDULE)
        else:
            W, value, stalled = _simplex_search(U0 @ B, B, use_sqrt, opts, _FINE_SCHEDULE)
        if value < best_value:
            best_value, best_W, best_label, best_stalled = value, W, -seed_counter, stalled

    for k in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, k])
        if opts.method == "gradient":
            Z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
            U0, _ = np.linalg.qr(Z)
            W, value, stalled = _gradient_search(U0, B, use_sqrt, opts)
        else:
            theta = rng.uniform(0.0, 2.0 * np.pi, m * m)
            W0 = _assemble_from_angles(theta, B, m)
            W, value, stalled = _simplex_search(W0, B, use_sqrt, opts)
        if value < best_value:
            best_value, best_W, best_label, best_stalled = value, W, k, stalled

    ensemble = _ensemble_from_rows(best_W)
    value = sum(w * _member_value(psi, use_sqrt) for w, psi in ensemble.members)
    return RoofResult(value=float(value), ensemble=ensemble,
                      restarts_used=opts.restarts,
                      best_restart_index=best_label, converged=best_stalled)


def objective_at(rho: DensityMatrix, e: WeightedEnsemble, functional: str = "sqrt_tau") -> float:
    """Weighted objective of a given decomposition of rho.

    Any valid decomposition upper-bounds the convex roof, so this is also
    a certificate evaluator.  Raises if ``e`` does not mix back to ``rho``
    within max-entry tolerance 1e-8.
    """
    use_sqrt = _check_functional(functional)
    dev = float(np.abs(ensemble_to_density(e).matrix - rho.matrix).max())
    if dev > _MIX_TOL:
        raise ValidationError(
            f"objective_at: ensemble does not reproduce rho (max deviation {dev:.3e})")
    return float(sum(w * _member_value(psi, use_sqrt) for w, psi in e.members))
