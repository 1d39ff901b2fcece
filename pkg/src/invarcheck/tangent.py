"""Tangent cones at boundary points and membership of directions in them.

At an interior point the tangent cone is the whole space. On a facet of a
halfspace form it is the set of directions with nonpositive inner product
against every active row. At a vertex of a polytope it is generated by the
differences to the other vertices with nonnegative coefficients; at an
extreme ray of a cone the ray itself enters with a sign-free coefficient.
On the smooth part of a quadratic surface it is the halfspace under the
outward normal Qx. The apex of a quadratic cone is special: the tangent
cone there is the cone itself, represented by a membership-backed kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ApexPoint, IndexOutOfRange, InputError, NotMember
from .numerics import DEFAULT_TOLS, Tolerances, as_vector
from .sets import (
    BoundaryPoint,
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    Membership,
    VCone,
    VPolytope,
    active_constraints,
    membership,
    outside_violation,
)
from .solvers import phase_one_feasibility

FULLSPACE = "fullspace"
HALFSPACES = "halfspaces"
GENERATED = "generated"
QUADRATIC = "quadratic-halfspace"
SELF_CONE = "cone-itself"


@dataclass
class TangentCone:
    """Local cone of admissible directions at a boundary point.

    kind selects the payload: "halfspaces" uses normals (rows g, cone is
    g'y <= 0 for all of them); "generated" uses generators rows with
    nonnegative coefficients plus an optional sign-free generator;
    "quadratic-halfspace" uses the single normal q_normal; "fullspace" has
    no payload; "cone-itself" defers to membership in set_ref (apex case).
    """

    kind: str
    normals: np.ndarray | None = None
    generators: np.ndarray | None = None
    free_generator: np.ndarray | None = None
    q_normal: np.ndarray | None = None
    set_ref: object = None

    @property
    def dim(self) -> int:
        if self.kind == HALFSPACES:
            return self.normals.shape[1]
        if self.kind == GENERATED:
            if self.free_generator is not None:
                return self.free_generator.shape[0]
            return self.generators.shape[1]
        if self.kind == QUADRATIC:
            return self.q_normal.shape[0]
        if self.kind == SELF_CONE:
            return self.set_ref.dim
        return -1  # fullspace: any dimension


def _resolve_point(x) -> np.ndarray:
    if isinstance(x, BoundaryPoint):
        return as_vector(x.point, "point")
    return as_vector(x, "point")


def tangent_h(p: HPolyhedron, x, tols: Tolerances = DEFAULT_TOLS) -> TangentCone:
    """Tangent cone of a halfspace-form polyhedron at a member point."""
    pt = _resolve_point(x)
    if membership(p, pt, tols) is Membership.OUTSIDE:
        raise NotMember("point is outside the polyhedron")
    active = active_constraints(p, pt, tols)
    if not active:
        return TangentCone(FULLSPACE)
    return TangentCone(HALFSPACES, normals=p.G[active].copy())


def tangent_polytope(p: VPolytope, i: int) -> TangentCone:
    """Tangent cone at vertex i: nonnegative combinations of the edges out of it."""
    l1 = p.vertices.shape[0]
    if not 0 <= i < l1:
        raise IndexOutOfRange(f"vertex index {i} outside 0..{l1 - 1}")
    gens = np.array([p.vertices[j] - p.vertices[i] for j in range(l1) if j != i])
    if gens.size == 0:
        gens = np.zeros((0, p.dim))
    return TangentCone(GENERATED, generators=gens)


def tangent_vcone(c: VCone, i: int) -> TangentCone:
    """Tangent cone at extreme ray i: that ray sign-free plus the others."""
    l = c.rays.shape[0]
    if not 0 <= i < l:
        raise IndexOutOfRange(f"ray index {i} outside 0..{l - 1}")
    gens = np.array([c.rays[j] for j in range(l) if j != i])
    if gens.size == 0:
        gens = np.zeros((0, c.dim))
    return TangentCone(GENERATED, generators=gens, free_generator=c.rays[i].copy())


def tangent_quadratic(s: Ellipsoid | LorenzCone, x) -> TangentCone:
    """Halfspace under the outward normal Qx on the smooth quadratic surface."""
    if isinstance(x, BoundaryPoint) and x.active == "apex":
        raise ApexPoint("tangent cone at the apex is the cone itself")
    pt = _resolve_point(x)
    if isinstance(s, LorenzCone) and float(np.linalg.norm(pt)) <= 1e-12:
        raise ApexPoint("tangent cone at the apex is the cone itself")
    return TangentCone(QUADRATIC, q_normal=s.Q @ pt)


def tangent_cone_at(s, bp: BoundaryPoint, tols: Tolerances = DEFAULT_TOLS) -> TangentCone:
    """Tangent cone at a sampled boundary point of any supported set.

    Vertex-form points that are not vertices/rays get the general
    finitely-generated cone (differences to all vertices; all rays plus the
    point itself sign-free), which reduces to the vertex/ray formulas there.
    """
    if isinstance(s, HPolyhedron):
        return tangent_h(s, bp, tols)
    if isinstance(s, VPolytope):
        if isinstance(bp.active, list) and len(bp.active) == 1:
            return tangent_polytope(s, bp.active[0])
        pt = _resolve_point(bp)
        gens = [v - pt for v in s.vertices if np.max(np.abs(v - pt)) > 1e-12]
        gens = np.array(gens) if gens else np.zeros((0, s.dim))
        return TangentCone(GENERATED, generators=gens)
    if isinstance(s, VCone):
        if isinstance(bp.active, list) and len(bp.active) == 1:
            return tangent_vcone(s, bp.active[0])
        pt = _resolve_point(bp)
        return TangentCone(GENERATED, generators=s.rays.copy(), free_generator=pt)
    if isinstance(s, Ellipsoid):
        return tangent_quadratic(s, bp)
    if isinstance(s, LorenzCone):
        pt = _resolve_point(bp)
        if bp.active == "apex" or float(np.linalg.norm(pt)) <= 1e-12:
            return TangentCone(SELF_CONE, set_ref=s)
        return tangent_quadratic(s, bp)
    raise InputError(f"unsupported set type {type(s).__name__}")


def cone_contains(t: TangentCone, y, tol: float | None = None,
                  tols: Tolerances = DEFAULT_TOLS) -> bool:
    """Whether direction y lies in the tangent cone, within tolerance.

    Halfspace kinds test every normal against tol scaled by the norms;
    generated kinds solve the coefficient feasibility LP and accept an L1
    residual up to tol*(1 + ||y||).
    """
    tol = tols.cone if tol is None else float(tol)
    y = as_vector(y, "y")
    if t.kind == FULLSPACE:
        return True
    if t.kind == HALFSPACES or t.kind == QUADRATIC:
        rows = t.normals if t.kind == HALFSPACES else t.q_normal.reshape(1, -1)
        ny = float(np.linalg.norm(y))
        for g in rows:
            if float(g @ y) > tol * (1.0 + float(np.linalg.norm(g)) * ny):
                return False
        return True
    if t.kind == GENERATED:
        cols = [t.generators.T]
        free: tuple[int, ...] = ()
        if t.free_generator is not None:
            cols.append(t.free_generator.reshape(-1, 1))
            free = (t.generators.shape[0],)
        matrix = np.hstack(cols)
        opt, _ = phase_one_feasibility(matrix, y, free, tols)
        return opt <= tol * (1.0 + float(np.linalg.norm(y)))
    if t.kind == SELF_CONE:
        return outside_violation(t.set_ref, y, tols) <= tol
    raise InputError(f"unknown tangent cone kind {t.kind!r}")
