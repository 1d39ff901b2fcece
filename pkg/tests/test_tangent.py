import numpy as np
import pytest

from invarcheck.errors import ApexPoint, IndexOutOfRange, NotMember
from invarcheck.sets import (
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    VCone,
    VPolytope,
    orthant_h,
    orthant_v,
    sample_boundary,
)
from invarcheck.solvers import nnls
from invarcheck.tangent import (
    FULLSPACE,
    GENERATED,
    HALFSPACES,
    QUADRATIC,
    SELF_CONE,
    cone_contains,
    tangent_cone_at,
    tangent_h,
    tangent_polytope,
    tangent_quadratic,
    tangent_vcone,
)

from oracles import dist_to_polytope_bruteforce, dist_to_quadric_sublevel, project_box

UNIT_BOX = HPolyhedron(
    [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
    [1.0, 1.0, 0.0, 0.0],
)
TRIANGLE = VPolytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
ICE3 = LorenzCone(np.diag([1.0, 1.0, -1.0]), u_n=[0.0, 0.0, 1.0])


def test_box_single_facet():
    t = tangent_h(UNIT_BOX, [1.0, 0.5])
    assert t.kind == HALFSPACES
    assert np.allclose(t.normals, [[1.0, 0.0]])
    assert cone_contains(t, [-1.0, 7.0])
    assert not cone_contains(t, [0.5, 0.0])


def test_box_corner_two_facets():
    t = tangent_h(UNIT_BOX, [1.0, 1.0])
    assert t.normals.shape == (2, 2)
    assert cone_contains(t, [-0.3, -0.4])
    assert not cone_contains(t, [0.1, -1.0])


def test_box_interior_fullspace():
    t = tangent_h(UNIT_BOX, [0.5, 0.5])
    assert t.kind == FULLSPACE
    assert cone_contains(t, [100.0, -100.0])


def test_orthant_h_face():
    t = tangent_h(orthant_h(2), [0.0, 3.0])
    # the active row is -x1 <= 0, so the cone is y1 >= 0
    assert cone_contains(t, [1.0, -5.0])
    assert not cone_contains(t, [-1.0, 0.0])


def test_tangent_h_rejects_outside_point():
    with pytest.raises(NotMember):
        tangent_h(UNIT_BOX, [2.0, 0.0])


def test_polytope_simplex_corner():
    t = tangent_polytope(TRIANGLE, 0)
    assert t.kind == GENERATED
    assert np.allclose(t.generators, [[1.0, 0.0], [0.0, 1.0]])
    assert cone_contains(t, [2.0, 3.0])
    assert not cone_contains(t, [-1.0, 0.0])


def test_polytope_segment_endpoint():
    seg = VPolytope([[0.0, 0.0], [2.0, 0.0]])
    t = tangent_polytope(seg, 1)
    assert np.allclose(t.generators, [[-2.0, 0.0]])
    assert cone_contains(t, [-1.0, 0.0])
    assert not cone_contains(t, [1.0, 0.0])
    assert not cone_contains(t, [-1.0, 0.5])


def test_polytope_square_corner_generators():
    square = VPolytope([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    t = tangent_polytope(square, 2)
    assert sorted(map(tuple, t.generators.tolist())) == [
        (-1.0, -1.0), (-1.0, 0.0), (0.0, -1.0)]


def test_polytope_index_error():
    with pytest.raises(IndexOutOfRange):
        tangent_polytope(TRIANGLE, 3)


def test_vcone_orthant_edge():
    t = tangent_vcone(orthant_v(2), 0)
    # free coefficient on e1, nonnegative on e2: the upper halfplane
    assert cone_contains(t, [-3.0, 0.5])
    assert cone_contains(t, [5.0, 0.0])
    assert not cone_contains(t, [0.0, -0.1])


def test_vcone_orthant_general_n():
    cone = orthant_v(3)
    t = tangent_vcone(cone, 1)
    assert cone_contains(t, [0.2, -9.0, 0.0])
    assert not cone_contains(t, [-0.2, 1.0, 0.0])


def test_vcone_single_ray_line():
    t = tangent_vcone(VCone([[1.0, 1.0]]), 0)
    assert cone_contains(t, [-2.0, -2.0])
    assert cone_contains(t, [3.0, 3.0])
    assert not cone_contains(t, [1.0, 0.0])


def test_quadratic_circle_point():
    t = tangent_quadratic(Ellipsoid(np.eye(2)), [1.0, 0.0])
    assert t.kind == QUADRATIC
    assert np.allclose(t.q_normal, [1.0, 0.0])
    assert cone_contains(t, [-1.0, 4.0])
    assert not cone_contains(t, [1.0, 0.0])


def test_quadratic_scaled_ellipse():
    t = tangent_quadratic(Ellipsoid(np.diag([1.0, 4.0])), [0.0, 0.5])
    assert np.allclose(t.q_normal, [0.0, 2.0])


def test_quadratic_lorenz_345():
    t = tangent_quadratic(ICE3, [3.0, 4.0, 5.0])
    assert np.allclose(t.q_normal, [3.0, 4.0, -5.0])
    assert cone_contains(t, [0.0, 0.0, 1.0])
    assert not cone_contains(t, [1.0, 0.0, 0.0])


def test_apex_raises():
    with pytest.raises(ApexPoint):
        tangent_quadratic(ICE3, [0.0, 0.0, 0.0])


def test_apex_dispatch_is_cone_itself():
    bp = sample_boundary(ICE3, 1, seed=0)[0]
    assert bp.active == "apex"
    t = tangent_cone_at(ICE3, bp)
    assert t.kind == SELF_CONE
    assert cone_contains(t, [0.0, 0.0, 2.0])
    assert not cone_contains(t, [1.0, 0.0, 0.0])


def test_positive_homogeneity():
    rng = np.random.default_rng(51)
    cones = [
        tangent_h(UNIT_BOX, [1.0, 1.0]),
        tangent_polytope(TRIANGLE, 0),
        tangent_vcone(orthant_v(2), 1),
        tangent_quadratic(Ellipsoid(np.eye(2)), [1.0, 0.0]),
    ]
    for t in cones:
        for _ in range(40):
            y = rng.normal(size=2)
            base = cone_contains(t, y, 1e-8)
            for lam in (0.5, 2.0, 10.0):
                assert cone_contains(t, lam * y, 1e-8) == base


def test_square_corner_h_equals_v():
    square_v = VPolytope([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    th = tangent_h(UNIT_BOX, [1.0, 1.0])
    tv = tangent_polytope(square_v, 2)
    rng = np.random.default_rng(61)
    for _ in range(1000):
        y = rng.normal(size=2)
        a = cone_contains(th, y, 1e-8)
        b = cone_contains(tv, y, 1e-8)
        if a != b:
            # disagreements may only happen within the tolerance band
            margin = max(abs(y[0]), abs(y[1])) * 1e-7
            assert min(abs(y[0]), abs(y[1])) <= margin, y
            continue
        assert a == b


def _dist_oracle(s, p):
    if isinstance(s, HPolyhedron):  # the unit box in these tests
        return float(np.linalg.norm(project_box(0.0, 1.0, p) - p))
    if isinstance(s, VPolytope):
        return dist_to_polytope_bruteforce(s.vertices, p)
    if isinstance(s, VCone):
        beta = nnls(s.rays.T, p)
        return float(np.linalg.norm(s.rays.T @ beta - p))
    if isinstance(s, Ellipsoid):
        return dist_to_quadric_sublevel(s.Q, 1.0, p)
    if isinstance(s, LorenzCone):
        return dist_to_quadric_sublevel(s.Q, 0.0, p, branch_vec=s.u_n)
    raise AssertionError


def test_limit_definition_consistency():
    # cone membership must match the finite-t distance-quotient behaviour of
    # the underlying set, outside the indeterminate band
    sets = [
        UNIT_BOX,
        TRIANGLE,
        orthant_v(2),
        Ellipsoid(np.diag([1.0, 4.0])),
        ICE3,
    ]
    rng = np.random.default_rng(71)
    checked = 0
    for s in sets:
        pts = sample_boundary(s, 4, seed=17)
        for bp in pts:
            if bp.active == "apex":
                continue
            t_cone = tangent_cone_at(s, bp)
            for _ in range(4):
                y = rng.normal(size=s.dim)
                y /= np.linalg.norm(y)
                quotients = [
                    _dist_oracle(s, bp.point + step * y) / step
                    for step in (1e-2, 1e-3, 1e-4)
                ]
                m_max, m_min = max(quotients), min(quotients)
                if m_max <= 1e-4:
                    assert cone_contains(t_cone, y, 1e-7), (type(s).__name__, bp.point, y)
                    checked += 1
                elif m_min >= 1e-2:
                    assert not cone_contains(t_cone, y, 1e-7), (type(s).__name__, bp.point, y)
                    checked += 1
    assert checked >= 40
