"""Convex set families: construction, membership, and boundary sampling.

Five representations are supported: halfspace polyhedra (covering
polyhedral cones through b = 0), vertex polytopes, ray cones, ellipsoids
x'Qx <= 1 with Q positive definite, and quadratic cones x'Qx <= 0 cut to
one branch by x'Q u_n <= 0 where u_n is the eigenvector of the single
negative eigenvalue. Membership for the vertex/ray forms is decided by
linear programming over the combination coefficients; "inside" for them
means the relative interior (for full-dimensional sets this is the
topological interior).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, EmptyBoundary, InputError
from .numerics import (
    DEFAULT_TOLS,
    Tolerances,
    as_matrix,
    as_vector,
    canonical_sign,
    sym_eig,
)
from .solvers import simplex_standard, solve_inequality_lp

_FACET_BOX = 1e6
_RELINT_TOL = 1e-9


class Membership(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass
class BoundaryPoint:
    """A boundary point with what is active there.

    active is a list of constraint indices for halfspace forms, a list of
    vertex/ray indices for vertex forms, or one of the tags
    "quadratic-surface" / "apex" for the quadratic families.
    """

    point: np.ndarray
    active: object


class HPolyhedron:
    """{x : G x <= b}; with b = 0 this is a polyhedral cone."""

    def __init__(self, g, b):
        self.G = as_matrix(g, "G")
        self.b = as_vector(b, "b")
        if self.G.shape[0] != self.b.shape[0]:
            raise DimensionMismatch("G rows and b length differ")

    @property
    def dim(self):
        return self.G.shape[1]


class VPolytope:
    """Convex hull of finitely many pairwise-distinct vertices."""

    def __init__(self, vertices):
        vs = as_matrix(np.atleast_2d(vertices), "vertices")
        if vs.shape[0] < 1:
            raise InputError("a polytope needs at least one vertex")
        for i in range(vs.shape[0]):
            for j in range(i + 1, vs.shape[0]):
                if np.max(np.abs(vs[i] - vs[j])) <= 1e-9:
                    raise InputError(f"vertices {i} and {j} coincide")
        self.vertices = vs
        self._bary = None  # lazy simplicial barycentric factorization

    @property
    def dim(self):
        return self.vertices.shape[1]

    def _barycentric(self):
        """(v0, inv(T)) when the polytope is a nondegenerate simplex, else None."""
        if self._bary is None:
            l1, n = self.vertices.shape
            if l1 == n + 1:
                t = (self.vertices[1:] - self.vertices[0]).T
                try:
                    self._bary = (self.vertices[0].copy(), np.linalg.inv(t))
                except np.linalg.LinAlgError:
                    self._bary = False
            else:
                self._bary = False
        return None if self._bary is False else self._bary


class VCone:
    """Conic hull of finitely many nonzero generator rays."""

    def __init__(self, rays):
        rs = as_matrix(np.atleast_2d(rays), "rays")
        if rs.shape[0] < 1:
            raise InputError("a cone needs at least one ray")
        for i, row in enumerate(rs):
            if np.linalg.norm(row) < 1e-9:
                raise InputError(f"ray {i} is numerically zero")
        self.rays = rs
        self._coords = None  # lazy simplicial inverse

    @property
    def dim(self):
        return self.rays.shape[1]

    def _ray_inverse(self):
        if self._coords is None:
            l, n = self.rays.shape
            if l == n:
                try:
                    self._coords = np.linalg.inv(self.rays.T)
                except np.linalg.LinAlgError:
                    self._coords = False
            else:
                self._coords = False
        return None if self._coords is False else self._coords


class Ellipsoid:
    """{x : x'Qx <= 1} with Q symmetric positive definite."""

    def __init__(self, q, tols: Tolerances = DEFAULT_TOLS):
        q = as_matrix(q, "Q")
        if q.shape[0] != q.shape[1]:
            raise DimensionMismatch("Q must be square")
        eig = sym_eig(q, tols)
        if eig.eigenvalues.size == 0 or eig.eigenvalues[-1] <= tols.spd_min_eig:
            raise InputError("ellipsoid matrix is not positive definite")
        self.Q = 0.5 * (q + q.T)
        self.eigenvalues = eig.eigenvalues
        self.eigenvectors = eig.eigenvectors

    @property
    def dim(self):
        return self.Q.shape[0]


class LorenzCone:
    """One branch of {x : x'Qx <= 0} for Q with a single negative eigenvalue.

    The branch is the side where x'Q u_n <= 0 (equivalently u_n'x >= 0). If
    u_n is not supplied, the negative-eigenvalue eigenvector with its
    largest-magnitude entry positive is used; the stored sign is part of the
    serialized form.
    """

    def __init__(self, q, u_n=None, tols: Tolerances = DEFAULT_TOLS):
        q = as_matrix(q, "Q")
        if q.shape[0] != q.shape[1]:
            raise DimensionMismatch("Q must be square")
        eig = sym_eig(q, tols)
        w = eig.eigenvalues
        negatives = int(np.sum(w < -1e-10))
        near_zero = int(np.sum(np.abs(w) <= 1e-10))
        if negatives != 1 or near_zero != 0:
            raise InputError(
                f"cone matrix needs exactly one negative eigenvalue and none "
                f"near zero (got {negatives} negative, {near_zero} near zero)")
        self.Q = 0.5 * (q + q.T)
        self.eigenvalues = w
        self.eigenvectors = eig.eigenvectors
        axis = eig.eigenvectors[:, -1]  # eigenvalues sorted descending
        if u_n is None:
            self.u_n = canonical_sign(axis)
        else:
            u = as_vector(u_n, "u_n")
            if u.shape[0] != q.shape[0]:
                raise DimensionMismatch("u_n dimension does not match Q")
            nrm = np.linalg.norm(u)
            if nrm < 1e-12:
                raise InputError("u_n is numerically zero")
            u = u / nrm
            if abs(float(u @ axis)) < 1.0 - 1e-6:
                raise InputError("u_n is not the negative-eigenvalue eigenvector")
            self.u_n = u

    @property
    def dim(self):
        return self.Q.shape[0]


ConvexSet = HPolyhedron | VPolytope | VCone | Ellipsoid | LorenzCone


def orthant_h(n: int) -> HPolyhedron:
    """Nonnegative orthant of R^n as -x <= 0."""
    if n < 1:
        raise InputError("orthant dimension must be positive")
    return HPolyhedron(-np.eye(n), np.zeros(n))


def orthant_v(n: int) -> VCone:
    """Nonnegative orthant of R^n generated by the standard basis rays."""
    if n < 1:
        raise InputError("orthant dimension must be positive")
    return VCone(np.eye(n))


def ambient_dim(s: ConvexSet) -> int:
    return s.dim


def _check_dim(s, x):
    x = as_vector(x, "x")
    if x.shape[0] != s.dim:
        raise DimensionMismatch(f"point has dimension {x.shape[0]}, set has {s.dim}")
    return x


def _vform_lp(columns, rhs, cap_delta, tols):
    """Feasibility plus relative-interior margin of  columns @ theta = rhs,
    theta >= 0, via  theta = delta*1 + sigma  and maximizing delta.

    cap_delta bounds the margin for conic systems, where it would otherwise
    be unbounded whenever the generators admit a positive circuit. Returns
    (feasible, delta, infeasibility, theta).
    """
    n_rows, k = columns.shape
    extra = 1 if cap_delta is not None else 0
    a_std = np.zeros((n_rows + extra, 1 + k + extra))
    a_std[:n_rows, 0] = columns @ np.ones(k)
    a_std[:n_rows, 1:1 + k] = columns
    rhs_full = np.asarray(rhs, dtype=float)
    if cap_delta is not None:
        a_std[n_rows, 0] = 1.0
        a_std[n_rows, 1 + k] = 1.0
        rhs_full = np.concatenate([rhs_full, [float(cap_delta)]])
    c = np.zeros(1 + k + extra)
    c[0] = -1.0
    status, z, obj = simplex_standard(c, a_std, rhs_full, tols)
    if status == "infeasible":
        return False, 0.0, obj, None
    delta = float(z[0])
    theta = delta + z[1:1 + k]
    return True, delta, 0.0, theta


def membership(s: ConvexSet, x, tols: Tolerances = DEFAULT_TOLS) -> Membership:
    """Classify a point as inside, boundary, or outside of the set.

    Each defining inequality carries a boundary band of tols.boundary_band
    relative to its right-hand side; vertex and ray forms are decided by the
    LP feasibility of the combination coefficients, with "inside" meaning
    the relative interior.
    """
    x = _check_dim(s, x)
    band = tols.boundary_band

    if isinstance(s, HPolyhedron):
        if s.G.shape[0] == 0:
            return Membership.INSIDE
        slack = s.G @ x - s.b
        bands = band * (1.0 + np.abs(s.b))
        if np.any(slack > bands):
            return Membership.OUTSIDE
        if np.any(slack >= -bands):
            return Membership.BOUNDARY
        return Membership.INSIDE

    if isinstance(s, Ellipsoid):
        v = float(x @ s.Q @ x)
        b = band * 2.0
        if v - 1.0 > b:
            return Membership.OUTSIDE
        if abs(v - 1.0) <= b:
            return Membership.BOUNDARY
        return Membership.INSIDE

    if isinstance(s, LorenzCone):
        nx = float(np.linalg.norm(x))
        qv = float(x @ s.Q @ x)
        lv = float(x @ s.Q @ s.u_n)
        band_q = band * (1.0 + nx * nx)
        band_l = band * (1.0 + nx)
        if qv > band_q or lv > band_l:
            return Membership.OUTSIDE
        if abs(qv) <= band_q:
            return Membership.BOUNDARY
        return Membership.INSIDE

    if isinstance(s, VPolytope):
        columns = np.vstack([s.vertices.T, np.ones((1, s.vertices.shape[0]))])
        rhs = np.concatenate([x, [1.0]])
        feasible, delta, _, _ = _vform_lp(columns, rhs, cap_delta=None, tols=tols)
        if not feasible:
            return Membership.OUTSIDE
        return Membership.INSIDE if delta > _RELINT_TOL else Membership.BOUNDARY

    if isinstance(s, VCone):
        cap = 1.0 + float(np.linalg.norm(x))
        feasible, delta, _, _ = _vform_lp(s.rays.T, x, cap_delta=cap, tols=tols)
        if not feasible:
            return Membership.OUTSIDE
        thresh = _RELINT_TOL * (1.0 + float(np.linalg.norm(x)))
        return Membership.INSIDE if delta > thresh else Membership.BOUNDARY

    raise InputError(f"unsupported set type {type(s).__name__}")


def active_constraints(p: HPolyhedron, x, tols: Tolerances = DEFAULT_TOLS) -> list[int]:
    """Indices of rows holding with equality at x (empty for interior points)."""
    x = _check_dim(p, x)
    out = []
    for i in range(p.G.shape[0]):
        if abs(float(p.G[i] @ x) - p.b[i]) <= tols.boundary_band * (1.0 + abs(p.b[i])):
            out.append(i)
    return out


def outside_violation(s: ConvexSet, x, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Scale-adjusted amount by which x violates the set's description (0 if none)."""
    x = _check_dim(s, x)
    return float(outside_violation_batch(s, x.reshape(-1, 1), tols)[0])


def outside_violation_batch(s: ConvexSet, states, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Vectorized outside_violation over the columns of states (shape n x N).

    For vertex/ray forms with a simplicial description the combination
    coefficients come from a direct linear solve; otherwise each column
    falls back to the LP used by membership.
    """
    states = np.asarray(states, dtype=float)
    if isinstance(s, HPolyhedron):
        if s.G.shape[0] == 0:
            return np.zeros(states.shape[1])
        slack = (s.G @ states - s.b[:, None]) / (1.0 + np.abs(s.b))[:, None]
        return np.maximum(slack.max(axis=0), 0.0)
    if isinstance(s, Ellipsoid):
        quad = np.sum(states * (s.Q @ states), axis=0)
        return np.maximum(quad - 1.0, 0.0)
    if isinstance(s, LorenzCone):
        quad = np.sum(states * (s.Q @ states), axis=0)
        lin = (s.Q @ s.u_n) @ states
        nrm2 = np.sum(states * states, axis=0)
        v_q = quad / (1.0 + nrm2)
        v_l = lin / (1.0 + np.sqrt(nrm2))
        return np.maximum(np.maximum(v_q, v_l), 0.0)
    if isinstance(s, VPolytope):
        bary = s._barycentric()
        if bary is not None:
            v0, t_inv = bary
            lam = t_inv @ (states - v0[:, None])
            first = 1.0 - lam.sum(axis=0)
            coords = np.vstack([first, lam])
            return np.maximum(-coords.min(axis=0), 0.0)
        columns = np.vstack([s.vertices.T, np.ones((1, s.vertices.shape[0]))])
        out = np.zeros(states.shape[1])
        for k in range(states.shape[1]):
            rhs = np.concatenate([states[:, k], [1.0]])
            feasible, _, infeas, _ = _vform_lp(columns, rhs, cap_delta=None, tols=tols)
            out[k] = 0.0 if feasible else infeas
        return out
    if isinstance(s, VCone):
        inv = s._ray_inverse()
        if inv is not None:
            coords = inv @ states
            return np.maximum(-coords.min(axis=0), 0.0)
        out = np.zeros(states.shape[1])
        for k in range(states.shape[1]):
            cap = 1.0 + float(np.linalg.norm(states[:, k]))
            feasible, _, infeas, _ = _vform_lp(s.rays.T, states[:, k], cap_delta=cap, tols=tols)
            out[k] = 0.0 if feasible else infeas
        return out
    raise InputError(f"unsupported set type {type(s).__name__}")


def _facet_anchor(p: HPolyhedron, i: int, tols: Tolerances):
    """A point in the relative interior of facet i, or None if unattained."""
    m, n = p.G.shape
    g_rows = []
    h_vals = []
    for j in range(m):
        if j != i:
            g_rows.append(np.concatenate([p.G[j], [1.0]]))
            h_vals.append(p.b[j])
    g_rows.append(np.concatenate([np.zeros(n), [1.0]]))
    h_vals.append(1.0)
    g_rows.append(np.concatenate([np.zeros(n), [-1.0]]))
    h_vals.append(0.0)
    c = np.concatenate([np.zeros(n), [1.0]])
    status, z, _ = solve_inequality_lp(
        c, g_ub=np.array(g_rows), h_ub=np.array(h_vals),
        a_eq=np.concatenate([p.G[i], [0.0]]).reshape(1, -1), b_eq=[p.b[i]],
        box=_FACET_BOX, maximize=True, tols=tols)
    if status != "optimal":
        return None
    return z[:n]


def _unit_rows(rng, rows, cols):
    u = rng.normal(size=(rows, cols))
    norms = np.linalg.norm(u, axis=1)
    for k in np.nonzero(norms < 1e-12)[0]:
        u[k] = 0.0
        u[k, 0] = 1.0
        norms[k] = 1.0
    return u / norms[:, None]


def sample_boundary(s: ConvexSet, count: int, seed: int,
                    tols: Tolerances = DEFAULT_TOLS) -> list[BoundaryPoint]:
    """Deterministic boundary samples driven entirely by the seed.

    Ellipsoid: random directions mapped through the inverse square root of Q
    and rescaled onto the unit quadric. Quadratic cone: the apex first, then
    unit-norm points of the surface built from its spectral factorization.
    Halfspace form: per-facet anchors found by LP with rejection-sampled
    tangential offsets. Vertex forms: vertices (rays) first, then random
    two-point combinations re-validated as boundary.
    """
    if count < 1:
        raise InputError("count must be at least 1")
    rng = np.random.default_rng(seed)

    if isinstance(s, Ellipsoid):
        inv_half = s.eigenvectors @ np.diag(1.0 / np.sqrt(s.eigenvalues)) @ s.eigenvectors.T
        u = _unit_rows(rng, count, s.dim)
        y = u @ inv_half.T
        scale = np.sqrt(np.sum(y * (y @ s.Q.T), axis=1))
        pts = y / scale[:, None]
        return [BoundaryPoint(pts[k], "quadratic-surface") for k in range(count)]

    if isinstance(s, LorenzCone):
        n = s.dim
        out = [BoundaryPoint(np.zeros(n), "apex")]
        extra = count - 1
        if extra > 0:
            v = _unit_rows(rng, extra, n - 1)
            pos = s.eigenvectors[:, :n - 1] / np.sqrt(s.eigenvalues[:n - 1])
            axis_part = s.u_n / np.sqrt(-s.eigenvalues[-1])
            pts = v @ pos.T + axis_part
            pts /= np.linalg.norm(pts, axis=1)[:, None]
            out.extend(BoundaryPoint(pts[k], "quadratic-surface") for k in range(extra))
        return out

    if isinstance(s, HPolyhedron):
        m = s.G.shape[0]
        anchors = [(i, _facet_anchor(s, i, tols)) for i in range(m)]
        anchors = [(i, a) for i, a in anchors if a is not None]
        if not anchors:
            raise EmptyBoundary("no facet of the polyhedron is attained")
        bands = tols.boundary_band * (1.0 + np.abs(s.b))
        out = []
        for k in range(count):
            i, anchor = anchors[k % len(anchors)]
            g = s.G[i]
            gg = float(g @ g)
            point = anchor
            radius = 1.0 + float(np.linalg.norm(anchor))
            for attempt in range(50):
                y = rng.normal(size=s.dim)
                y -= g * (float(g @ y) / gg)
                ny = float(np.linalg.norm(y))
                if ny < 1e-12:
                    continue
                cand = anchor + (radius * 0.5 ** (attempt // 2)) * y / ny
                if np.all(s.G @ cand - s.b <= bands):
                    point = cand
                    break
            out.append(BoundaryPoint(point, active_constraints(s, point, tols)))
        return out

    if isinstance(s, VPolytope):
        l1 = s.vertices.shape[0]
        out = []
        for k in range(count):
            if k < l1:
                out.append(BoundaryPoint(s.vertices[k].copy(), [k]))
                continue
            placed = False
            if l1 >= 2:
                for _ in range(30):
                    i, j = rng.choice(l1, size=2, replace=False)
                    lam = rng.uniform(0.1, 0.9)
                    cand = lam * s.vertices[i] + (1.0 - lam) * s.vertices[j]
                    if membership(s, cand, tols) is Membership.BOUNDARY:
                        out.append(BoundaryPoint(cand, sorted([int(i), int(j)])))
                        placed = True
                        break
            if not placed:
                out.append(BoundaryPoint(s.vertices[k % l1].copy(), [k % l1]))
        return out

    if isinstance(s, VCone):
        l = s.rays.shape[0]
        unit = s.rays / np.linalg.norm(s.rays, axis=1)[:, None]
        out = []
        for k in range(count):
            if k < l:
                out.append(BoundaryPoint(unit[k].copy(), [k]))
                continue
            placed = False
            if l >= 2:
                for _ in range(30):
                    i, j = rng.choice(l, size=2, replace=False)
                    w = rng.uniform(0.2, 1.0, size=2)
                    cand = w[0] * unit[i] + w[1] * unit[j]
                    nrm = float(np.linalg.norm(cand))
                    if nrm < 1e-9:
                        continue
                    cand /= nrm
                    if membership(s, cand, tols) is Membership.BOUNDARY:
                        out.append(BoundaryPoint(cand, sorted([int(i), int(j)])))
                        placed = True
                        break
            if not placed:
                out.append(BoundaryPoint(unit[k % l].copy(), [k % l]))
        return out

    raise InputError(f"unsupported set type {type(s).__name__}")


def inward_direction(s: ConvexSet, bp: BoundaryPoint) -> np.ndarray | None:
    """A unit direction from the boundary point toward the set, if one is clear."""
    x = bp.point
    if isinstance(s, HPolyhedron):
        rows = bp.active if isinstance(bp.active, list) else []
        d = np.zeros(s.dim)
        for i in rows:
            g = s.G[i]
            d -= g / (np.linalg.norm(g) + 1e-300)
    elif isinstance(s, Ellipsoid):
        d = -(s.Q @ x)
    elif isinstance(s, LorenzCone):
        d = s.u_n.copy() if bp.active == "apex" else -(s.Q @ x)
    elif isinstance(s, VPolytope):
        d = np.mean(s.vertices, axis=0) - x
    elif isinstance(s, VCone):
        unit = s.rays / np.linalg.norm(s.rays, axis=1)[:, None]
        d = np.mean(unit, axis=0) * (1.0 + float(np.linalg.norm(x))) - x
    else:
        return None
    nrm = float(np.linalg.norm(d))
    return None if nrm < 1e-12 else d / nrm
