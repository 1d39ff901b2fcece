"""Dense real linear-algebra kernels used by every other module.

Everything here is pure and operates on plain numpy arrays validated at
entry: linear solves with partial pivoting, a cyclic-Jacobi symmetric
eigensolver, generalized symmetric eigenvalues through a Cholesky
reduction, and a golden-section minimizer for convex scalar functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadBracket,
    DimensionMismatch,
    InputError,
    NoConvergence,
    NotPositiveDefinite,
    SingularMatrix,
)


@dataclass(frozen=True)
class Tolerances:
    """Central numeric-tolerance record; defaults serve the desk scale (n <= ~50)."""

    pivot: float = 1e-12            # elimination pivot below this is singular
    jacobi_sweeps: int = 100        # cyclic Jacobi sweep budget
    jacobi_off: float = 1e-12       # off-diagonal convergence, relative to ||M||_F
    cholesky_pivot: float = 1e-10   # Cholesky pivot floor for positive definiteness
    spd_min_eig: float = 1e-10      # minimum eigenvalue accepted as positive definite
    feasibility: float = 1e-9       # LP phase-one / residual acceptance
    boundary_band: float = 1e-8     # set-boundary classification band (relative)
    cone: float = 1e-8              # tangent-cone membership default
    kkt: float = 1e-7               # KKT residual acceptance
    facet_optimum: float = 1e-8     # facet-LP optimum accepted as non-positive
    pencil: float = 1e-9            # eigenvalue-certificate acceptance
    exit_band: float = 1e-6         # falsifier "strictly outside" band
    inward_push: float = 1e-9       # boundary starts get pushed inside by this
    eta_interval: float = 1e-11     # golden-section interval width for eta searches
    divergence: float = 1e12        # state norm treated as divergence


DEFAULT_TOLS = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Validate and return a 1-D float array with finite entries."""
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size and not np.all(np.isfinite(v)):
        raise InputError(f"{name} contains non-finite entries")
    return v


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so its largest-magnitude entry is positive (ties: lowest index)."""
    if v.size == 0:
        return v
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


@dataclass
class EigenResult:
    """Symmetric eigendecomposition, eigenvalues descending, columns aligned."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.eigenvectors @ np.diag(self.eigenvalues) @ self.eigenvectors.T


def _lu_factor(a: np.ndarray, pivot_tol: float):
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < pivot_tol:
            raise SingularMatrix(f"pivot {lu[p, k]:.3e} below {pivot_tol:.1e} at column {k}")
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm


def _lu_solve(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = b[perm].astype(float)
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def solve_linear(a, b, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Solve Ax = b by partial-pivot elimination with one refinement pass.

    Raises SingularMatrix when a pivot falls below the singularity threshold.
    """
    a = as_square(a, "A")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A is {a.shape} but b has dimension {b.shape[0]}")
    if a.shape[0] == 0:
        return np.zeros(0)
    lu, perm = _lu_factor(a, tols.pivot)
    x = _lu_solve(lu, perm, b)
    r = b - a @ x
    if np.any(r):
        x = x + _lu_solve(lu, perm, r)
    return x


def sym_eig(m, tols: Tolerances = DEFAULT_TOLS) -> EigenResult:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    The input is symmetrized as (M + M')/2 after a near-symmetry check.
    Eigenvalues come back sorted descending with orthonormal eigenvector
    columns aligned to them; raises NoConvergence if the sweep budget is
    exhausted before the off-diagonal mass falls under threshold.
    """
    m = as_square(m, "M")
    n = m.shape[0]
    scale = float(np.max(np.abs(m))) if n else 0.0
    if n and float(np.max(np.abs(m - m.T))) > 1e-9 * (1.0 + scale):
        raise InputError("matrix is not symmetric within tolerance")
    a = 0.5 * (m + m.T)
    v = np.eye(n)
    fro = float(np.linalg.norm(a, "fro"))
    if n == 0 or fro == 0.0:
        return EigenResult(np.zeros(n), v)
    thresh = tols.jacobi_off * fro

    def offdiag(mat):
        stripped = mat.copy()
        np.fill_diagonal(stripped, 0.0)
        return float(np.linalg.norm(stripped, "fro"))

    converged = False
    for _ in range(tols.jacobi_sweeps):
        if offdiag(a) <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) > 2.0e150 * abs(apq):
                    # rotation angle ~ apq/diff; avoid overflow in tau*tau
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    if tau >= 0:
                        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        converged = offdiag(a) <= thresh
    if not converged:
        raise NoConvergence(f"Jacobi did not converge within {tols.jacobi_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        v[:, j] = canonical_sign(v[:, j])
    return EigenResult(w, v)


def cholesky_lower(q, pivot_floor: float | None = None,
                   tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix; NotPositiveDefinite on small pivots."""
    q = as_square(q, "Q")
    floor = tols.cholesky_pivot if pivot_floor is None else pivot_floor
    n = q.shape[0]
    low = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            acc = q[i, j] - low[i, :j] @ low[j, :j]
            if i == j:
                if acc < floor:
                    raise NotPositiveDefinite(f"Cholesky pivot {acc:.3e} below {floor:.1e}")
                low[i, j] = math.sqrt(acc)
            else:
                low[i, j] = acc / low[j, j]
    return low


def _forward_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Solves L y = b for lower-triangular L; b may be a matrix of columns.
    n = low.shape[0]
    y = np.array(b, dtype=float)
    for k in range(n):
        if k:
            y[k] -= low[k, :k] @ y[:k]
        y[k] /= low[k, k]
    return y


def _back_solve_t(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Solves L' x = b for lower-triangular L.
    n = low.shape[0]
    x = np.array(b, dtype=float)
    for k in range(n - 1, -1, -1):
        if k < n - 1:
            x[k] -= low[k + 1:, k] @ x[k + 1:]
        x[k] /= low[k, k]
    return x


def gen_eig_max_witness(m, q, tols: Tolerances = DEFAULT_TOLS):
    """Largest lambda with M x = lambda Q x for symmetric M and SPD Q, plus x.

    Reduces to a standard symmetric problem through the Cholesky factor of Q.
    """
    m = as_square(m, "M")
    q = as_square(q, "Q")
    if m.shape != q.shape:
        raise DimensionMismatch("M and Q must have matching shapes")
    eq = sym_eig(q, tols)
    if eq.eigenvalues.size == 0 or eq.eigenvalues[-1] <= tols.spd_min_eig:
        raise NotPositiveDefinite("Q is not positive definite")
    low = cholesky_lower(q, tols=tols)
    y = _forward_solve(low, 0.5 * (m + m.T))
    w = _forward_solve(low, y.T)
    res = sym_eig(0.5 * (w + w.T), tols)
    lam = float(res.eigenvalues[0])
    x = _back_solve_t(low, res.eigenvectors[:, 0])
    return lam, x


def gen_eig_max(m, q, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Largest generalized eigenvalue of the symmetric pencil (M, Q), Q SPD."""
    lam, _ = gen_eig_max_witness(m, q, tols)
    return lam


def gershgorin_radius(m) -> float:
    """Upper bound on the spectral radius from Gershgorin discs."""
    m = as_square(m, "M")
    if m.shape[0] == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(m), axis=1)))


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar_convex(f, bracket, tol: float = 1e-8):
    """Golden-section minimum of a convex scalar function over a finite bracket.

    Returns (argmin, value at argmin); argmin is within tol of a minimizer.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise BadBracket(f"bracket ({lo}, {hi}) is degenerate")
    if not (tol > 0.0):
        raise BadBracket("tol must be positive")
    h = hi - lo
    if h <= tol:
        x = 0.5 * (lo + hi)
        return x, float(f(x))
    c = hi - _INVPHI * h
    d = lo + _INVPHI * h
    yc, yd = float(f(c)), float(f(d))
    while h > tol:
        if yc < yd:
            hi, d, yd = d, c, yc
            h = hi - lo
            c = hi - _INVPHI * h
            yc = float(f(c))
        else:
            lo, c, yc = c, d, yd
            h = hi - lo
            d = lo + _INVPHI * h
            yd = float(f(d))
    x = 0.5 * (lo + hi)
    return x, float(f(x))
