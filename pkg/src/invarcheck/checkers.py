"""Invariance deciders for each (set family, system kind) pairing.

Linear systems get exact verdicts: facet LPs for halfspace forms, the
off-diagonal sign test for the orthant, per-vertex/per-ray decomposition
feasibility for vertex forms, and eigenvalue criteria for the quadratic
families. The quadratic-cone decision is sound but incomplete: it returns a
semidefiniteness certificate, a sampled counterexample, or Unknown. General
(nonlinear) systems are checked by sampling boundary points and testing the
field against the local tangent cone, which can refute but never certify,
so those verdicts cap at Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EmptySet, InputError
from .numerics import (
    DEFAULT_TOLS,
    Tolerances,
    as_square,
    gen_eig_max_witness,
    gershgorin_radius,
    minimize_scalar_convex,
    sym_eig,
)
from .sets import (
    ConvexSet,
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    VCone,
    VPolytope,
    outside_violation,
    sample_boundary,
)
from .solvers import (
    LPFeasibilityProblem,
    QPProblem,
    lp_feasible,
    qp_nearest,
    solve_inequality_lp,
)
from .systems import DynamicalSystem, LinearSystem
from .tangent import GENERATED, SELF_CONE, TangentCone, cone_contains, tangent_cone_at

_UNBOUNDED_BOX = 1e6


class Decision(Enum):
    INVARIANT = "invariant"
    NOT_INVARIANT = "not_invariant"
    UNKNOWN = "unknown"


@dataclass
class Certificate:
    """Machine-checkable evidence for an Invariant verdict; data is plain JSON."""

    kind: str
    data: dict


@dataclass
class Counterexample:
    point: np.ndarray
    violation: float


@dataclass
class Verdict:
    decision: Decision
    certificate: Certificate | None = None
    counterexample: Counterexample | None = None
    notes: dict = field(default_factory=dict)


def check_hpoly_linear(p: HPolyhedron, a, tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Decide invariance of a halfspace-form polyhedron under x' = A x.

    The pointwise facet condition is reduced to one LP per facet: maximize
    the outward flux g_i'Ax over the facet. Unbounded facets are re-solved
    inside an artificial box and flagged when the maximizer touches it,
    since the true supremum may be infinite.
    """
    a = as_square(a, "A")
    if a.shape[0] != p.dim:
        raise InputError("system dimension does not match the set")
    m = p.G.shape[0]
    facets = []
    nonempty_checked = False
    worst = None  # (optimum, index, point)
    for i in range(m):
        c = a.T @ p.G[i]
        status, x, val = solve_inequality_lp(
            c, g_ub=p.G, h_ub=p.b, a_eq=p.G[i].reshape(1, -1), b_eq=[p.b[i]],
            maximize=True, tols=tols)
        boxed = False
        on_box = False
        if status == "infeasible":
            if not nonempty_checked:
                st_all, _, _ = solve_inequality_lp(
                    np.zeros(p.dim), g_ub=p.G, h_ub=p.b, tols=tols)
                if st_all != "optimal":
                    raise EmptySet("the polyhedron has no points")
                nonempty_checked = True
            facets.append({"index": i, "vacuous": True})
            continue
        if status == "unbounded":
            boxed = True
            status, x, val = solve_inequality_lp(
                c, g_ub=p.G, h_ub=p.b, a_eq=p.G[i].reshape(1, -1), b_eq=[p.b[i]],
                box=_UNBOUNDED_BOX, maximize=True, tols=tols)
            on_box = bool(np.any(np.abs(x) >= _UNBOUNDED_BOX * (1.0 - 1e-9)))
        facets.append({
            "index": i,
            "optimum": float(val),
            "argmax": [float(v) for v in x],
            "boxed": boxed,
            "on_box": on_box,
        })
        if val > tols.facet_optimum and (worst is None):
            worst = (float(val), i, x)
    if worst is not None:
        val, i, x = worst
        return Verdict(Decision.NOT_INVARIANT,
                       counterexample=Counterexample(np.asarray(x), val),
                       notes={"facet": i})
    return Verdict(Decision.INVARIANT,
                   certificate=Certificate("facet-lp", {"facets": facets}))


def check_orthant_linear(a, tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """The nonnegative orthant is invariant exactly when every off-diagonal
    entry of A is nonnegative; a violating entry A[j, i] yields the basis
    ray e_i as counterexample with (A e_i)_j as the violation."""
    a = as_square(a, "A")
    n = a.shape[0]
    min_off = np.inf if n > 1 else 0.0
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            min_off = min(min_off, float(a[j, i]))
    for i in range(n):  # columns are rays; report the lowest ray index
        for j in range(n):
            if j != i and a[j, i] < -1e-10:
                e_i = np.zeros(n)
                e_i[i] = 1.0
                return Verdict(Decision.NOT_INVARIANT,
                               counterexample=Counterexample(e_i, float(a[j, i])),
                               notes={"entry": [j, i]})
    return Verdict(Decision.INVARIANT,
                   certificate=Certificate("metzler", {"min_offdiagonal": float(min_off)}))


def check_vpolytope(p: VPolytope, sys: DynamicalSystem, t0: float = 0.0,
                    tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Vertex decomposition test: at every vertex the field must be a
    nonnegative combination of the edges toward the other vertices.

    Exact for linear systems. For general systems a failing vertex still
    refutes invariance, but an all-pass cannot certify the faces between
    vertices, so the verdict caps at Unknown.
    """
    x_cols = p.vertices.T
    l1 = x_cols.shape[1]
    records = []
    for i in range(l1):
        f = np.asarray(sys.field(t0, p.vertices[i]), dtype=float)
        res = lp_feasible(LPFeasibilityProblem.for_vertex(x_cols, f, i), tols)
        if res.status != "feasible":
            qp = qp_nearest(QPProblem(x_cols, f, i), tols)
            return Verdict(Decision.NOT_INVARIANT,
                           counterexample=Counterexample(p.vertices[i].copy(),
                                                         float(qp.objective)),
                           notes={"vertex": i})
        records.append({"index": i, "alpha": [float(v) for v in res.alpha]})
    cert = Certificate("vertex-decomposition", {"vertices": records})
    if isinstance(sys, LinearSystem):
        return Verdict(Decision.INVARIANT, certificate=cert)
    return Verdict(Decision.UNKNOWN,
                   notes={"vertex_conditions": "passed", "payload": cert.data})


def check_vcone(c: VCone, sys: DynamicalSystem, t0: float = 0.0,
                tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Ray decomposition test: at every extreme ray the field must combine
    the other rays nonnegatively with a sign-free coefficient on the ray
    itself. Exact for linear systems; Unknown-capped otherwise."""
    r_cols = c.rays.T
    l = r_cols.shape[1]
    records = []
    for i in range(l):
        f = np.asarray(sys.field(t0, c.rays[i]), dtype=float)
        res = lp_feasible(LPFeasibilityProblem.for_ray(r_cols, f, i), tols)
        if res.status != "feasible":
            return Verdict(Decision.NOT_INVARIANT,
                           counterexample=Counterexample(c.rays[i].copy(),
                                                         float(res.objective)),
                           notes={"ray": i})
        records.append({"index": i, "alpha": [float(v) for v in res.alpha]})
    cert = Certificate("ray-decomposition", {"rays": records})
    if isinstance(sys, LinearSystem):
        return Verdict(Decision.INVARIANT, certificate=cert)
    return Verdict(Decision.UNKNOWN,
                   notes={"ray_conditions": "passed", "payload": cert.data})


def check_ellipsoid_linear(e: Ellipsoid, a, tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Eigenvalue criterion for the ellipsoid x'Qx <= 1 under x' = A x.

    Invariant exactly when the largest generalized eigenvalue of
    (A'Q + QA, Q) is nonpositive; otherwise the maximizing eigenvector,
    scaled onto the unit quadric, witnesses outward flux of half that
    eigenvalue.
    """
    a = as_square(a, "A")
    if a.shape[0] != e.dim:
        raise InputError("system dimension does not match the set")
    m = a.T @ e.Q + e.Q @ a
    m = 0.5 * (m + m.T)
    lam, x = gen_eig_max_witness(m, e.Q, tols)
    if lam <= tols.pencil:
        witness = float(sym_eig(m - lam * e.Q, tols).eigenvalues[0])
        return Verdict(Decision.INVARIANT, certificate=Certificate(
            "lyapunov-pencil",
            {"eta": lam, "witness_max_eig": witness,
             "eigenvector": [float(v) for v in x]}))
    scale = float(x @ e.Q @ x)
    x_unit = x / np.sqrt(scale)
    violation = float(x_unit @ e.Q @ (a @ x_unit))
    return Verdict(Decision.NOT_INVARIANT,
                   counterexample=Counterexample(x_unit, violation),
                   notes={"pencil_max_eig": lam})


def check_lorenz_linear(c: LorenzCone, a, n_samples: int = 10000, seed: int = 0,
                        tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Two-stage quadratic-cone decision under x' = A x.

    Stage one searches a shifted semidefiniteness certificate: if some eta
    makes A'Q + QA - eta*Q negative semidefinite, every boundary point
    (where x'Qx = 0) has nonpositive outward flux and the cone is invariant.
    Stage two, when no certificate exists, samples the boundary (apex
    included) for a direct violation x'QAx > 0. Neither finding anything
    returns Unknown: the certificate is sufficient, not known necessary.
    """
    a = as_square(a, "A")
    if a.shape[0] != c.dim:
        raise InputError("system dimension does not match the set")
    m = a.T @ c.Q + c.Q @ a
    m = 0.5 * (m + m.T)
    min_abs_eig_q = float(np.min(np.abs(c.eigenvalues)))
    beta = 10.0 * (1.0 + gershgorin_radius(m)) / max(1e-6, min_abs_eig_q)

    def pencil_max(eta):
        return float(sym_eig(m - eta * c.Q, tols).eigenvalues[0])

    tau = max(1e-12, min(1e-10, 1e-10 / (1.0 + gershgorin_radius(c.Q))))
    eta_star, phi_star = minimize_scalar_convex(pencil_max, (-beta, beta), tau)
    if phi_star <= tols.pencil:
        return Verdict(Decision.INVARIANT, certificate=Certificate(
            "cone-pencil", {"eta": eta_star, "witness_max_eig": phi_star}))

    qa = c.Q @ a
    samples = sample_boundary(c, n_samples, seed, tols)
    pts = np.array([bp.point for bp in samples])
    flux = np.sum(pts * (pts @ qa.T), axis=1)
    threshold = 1e-8 * (1.0 + float(np.linalg.norm(qa)))
    for k in range(len(samples)):
        if flux[k] > threshold:
            return Verdict(Decision.NOT_INVARIANT,
                           counterexample=Counterexample(pts[k], float(flux[k])),
                           notes={"certificate_gap": phi_star})
    return Verdict(Decision.UNKNOWN,
                   notes={"certificate_gap": phi_star, "samples_checked": len(samples)})


def _cone_violation(t_cone: TangentCone, y: np.ndarray,
                    tols: Tolerances = DEFAULT_TOLS) -> float:
    if t_cone.kind == GENERATED:
        cols = [t_cone.generators.T]
        free: tuple[int, ...] = ()
        if t_cone.free_generator is not None:
            cols.append(t_cone.free_generator.reshape(-1, 1))
            free = (t_cone.generators.shape[0],)
        from .solvers import phase_one_feasibility

        opt, _ = phase_one_feasibility(np.hstack(cols), y, free, tols)
        return float(opt)
    if t_cone.kind == SELF_CONE:
        return outside_violation(t_cone.set_ref, y, tols)
    rows = t_cone.normals if t_cone.normals is not None else t_cone.q_normal.reshape(1, -1)
    ny = float(np.linalg.norm(y))
    worst = 0.0
    for g in rows:
        worst = max(worst, float(g @ y) / (1.0 + float(np.linalg.norm(g)) * ny))
    return worst


def check_nonlinear_sampled(s: ConvexSet, sys: DynamicalSystem, t0: float,
                            n_samples: int, seed: int,
                            tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Sampled Nagumo test: the field must lie in the tangent cone at every
    sampled boundary point. A violation refutes invariance; a clean pass
    cannot certify the full boundary, so the verdict is Unknown."""
    samples = sample_boundary(s, n_samples, seed, tols)
    for bp in samples:
        t_cone = tangent_cone_at(s, bp, tols)
        y = np.asarray(sys.field(t0, bp.point), dtype=float)
        if not cone_contains(t_cone, y, tols.cone, tols):
            return Verdict(Decision.NOT_INVARIANT,
                           counterexample=Counterexample(bp.point.copy(),
                                                         _cone_violation(t_cone, y, tols)),
                           notes={"active": bp.active if isinstance(bp.active, str)
                                  else list(map(int, bp.active or []))})
    return Verdict(Decision.UNKNOWN, notes={"samples_checked": len(samples)})


def check(s: ConvexSet, sys: DynamicalSystem, t0: float = 0.0,
          n_samples: int = 10000, seed: int = 0, orthant: bool = False,
          tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Dispatch to the right decider for the (set family, system kind) pair.

    With orthant=True and a linear system the exact off-diagonal sign test
    runs regardless of which orthant representation was built. General
    systems on vertex forms run the vertex/ray refutation first and then the
    sampled check, reporting both phases in the verdict notes.
    """
    if isinstance(sys, LinearSystem):
        if orthant:
            return check_orthant_linear(sys.a, tols)
        if isinstance(s, HPolyhedron):
            return check_hpoly_linear(s, sys.a, tols)
        if isinstance(s, VPolytope):
            return check_vpolytope(s, sys, t0, tols)
        if isinstance(s, VCone):
            return check_vcone(s, sys, t0, tols)
        if isinstance(s, Ellipsoid):
            return check_ellipsoid_linear(s, sys.a, tols)
        if isinstance(s, LorenzCone):
            return check_lorenz_linear(s, sys.a, n_samples, seed, tols)
        raise InputError(f"unsupported set type {type(s).__name__}")
    if isinstance(s, VPolytope):
        first = check_vpolytope(s, sys, t0, tols)
        if first.decision is Decision.NOT_INVARIANT:
            return first
        sampled = check_nonlinear_sampled(s, sys, t0, n_samples, seed, tols)
        sampled.notes.update(first.notes)
        return sampled
    if isinstance(s, VCone):
        first = check_vcone(s, sys, t0, tols)
        if first.decision is Decision.NOT_INVARIANT:
            return first
        sampled = check_nonlinear_sampled(s, sys, t0, n_samples, seed, tols)
        sampled.notes.update(first.notes)
        return sampled
    return check_nonlinear_sampled(s, sys, t0, n_samples, seed, tols)
