import numpy as np
import pytest

from invarcheck.checkers import (
    Decision,
    check,
    check_ellipsoid_linear,
    check_hpoly_linear,
    check_lorenz_linear,
    check_nonlinear_sampled,
    check_orthant_linear,
    check_vcone,
    check_vpolytope,
)
from invarcheck.dynamics import falsify
from invarcheck.errors import EmptySet
from invarcheck.sets import (
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    VCone,
    VPolytope,
    orthant_h,
    orthant_v,
)
from invarcheck.systems import GeneralSystem, LinearSystem

from oracles import metzler_violation

UNIT_BOX = HPolyhedron(
    [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
    [1.0, 1.0, 0.0, 0.0],
)
TRIANGLE = VPolytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
ICE3 = LorenzCone(np.diag([1.0, 1.0, -1.0]), u_n=[0.0, 0.0, 1.0])


def test_box_contraction_invariant():
    v = check_hpoly_linear(UNIT_BOX, -np.eye(2))
    assert v.decision is Decision.INVARIANT
    facets = {f["index"]: f for f in v.certificate.data["facets"]}
    # on the facet x1 = 1 the outward flux -x1 peaks at -1; the facets
    # through the origin peak at exactly 0
    assert facets[0]["optimum"] == pytest.approx(-1.0, abs=1e-9)
    assert facets[2]["optimum"] == pytest.approx(0.0, abs=1e-9)
    assert max(f["optimum"] for f in facets.values()) <= 1e-8


def test_box_expansion_not_invariant():
    v = check_hpoly_linear(UNIT_BOX, np.eye(2))
    assert v.decision is Decision.NOT_INVARIANT
    assert v.counterexample.violation == pytest.approx(1.0, abs=1e-9)
    assert v.counterexample.point[0] == pytest.approx(1.0, abs=1e-9)
    assert v.notes["facet"] == 0


def test_orthant_h_equals_metzler_test():
    rng = np.random.default_rng(101)
    orth = orthant_h(3)
    for _ in range(25):
        a = rng.uniform(-1.0, 1.0, size=(3, 3))
        via_h = check_hpoly_linear(orth, a).decision
        via_scan = check_orthant_linear(a).decision
        assert via_h is via_scan


def test_empty_polyhedron_raises():
    empty = HPolyhedron([[1.0], [-1.0]], [-1.0, -2.0])
    with pytest.raises(EmptySet):
        check_hpoly_linear(empty, np.eye(1))


def test_orthant_metzler_example():
    v = check_orthant_linear([[-1.0, 2.0], [0.0, -3.0]])
    assert v.decision is Decision.INVARIANT
    assert v.certificate.data["min_offdiagonal"] == pytest.approx(0.0)


def test_orthant_counterexample_second_ray():
    v = check_orthant_linear([[-1.0, -0.5], [1.0, -1.0]])
    assert v.decision is Decision.NOT_INVARIANT
    assert np.allclose(v.counterexample.point, [0.0, 1.0])
    assert v.counterexample.violation == pytest.approx(-0.5)


def test_orthant_diagonal_always_invariant():
    assert check_orthant_linear(np.diag([5.0, -7.0, 0.0])).decision is Decision.INVARIANT


def test_metzler_equivalence_scan():
    rng = np.random.default_rng(211)
    for _ in range(100):
        a = rng.uniform(-1.0, 1.0, size=(5, 5))
        verdict = check_orthant_linear(a).decision
        expect = Decision.INVARIANT if metzler_violation(a) is None else Decision.NOT_INVARIANT
        assert verdict is expect


def test_triangle_contraction_invariant():
    v = check_vpolytope(TRIANGLE, LinearSystem(-np.eye(2)))
    assert v.decision is Decision.INVARIANT
    assert len(v.certificate.data["vertices"]) == 3


def test_triangle_constant_field_not_invariant():
    sys = GeneralSystem(lambda t, x: np.array([-1.0, 0.0]))
    v = check_vpolytope(TRIANGLE, sys)
    assert v.decision is Decision.NOT_INVARIANT
    assert np.allclose(v.counterexample.point, [0.0, 0.0])
    assert v.counterexample.violation > 1e-9


def test_single_point_equilibrium_invariant():
    point = VPolytope([[0.0, 0.0]])
    v = check_vpolytope(point, LinearSystem(np.zeros((2, 2))))
    assert v.decision is Decision.INVARIANT


def test_vcone_swap_field_invariant():
    v = check_vcone(orthant_v(2), LinearSystem([[0.0, 1.0], [1.0, 0.0]]))
    assert v.decision is Decision.INVARIANT


def test_vcone_negative_swap_not_invariant():
    v = check_vcone(orthant_v(2), LinearSystem([[0.0, -1.0], [-1.0, 0.0]]))
    assert v.decision is Decision.NOT_INVARIANT
    assert np.allclose(v.counterexample.point, [1.0, 0.0])


def test_vcone_scaling_field_invariant():
    rays = VCone([[1.0, 2.0], [2.0, 1.0]])
    v = check_vcone(rays, LinearSystem(-3.0 * np.eye(2)))
    assert v.decision is Decision.INVARIANT


def test_ellipsoid_rotation_invariant():
    v = check_ellipsoid_linear(Ellipsoid(np.eye(2)), [[0.0, 1.0], [-1.0, 0.0]])
    assert v.decision is Decision.INVARIANT
    assert v.certificate.data["eta"] == pytest.approx(0.0, abs=1e-9)


def test_ellipsoid_contraction_eta():
    v = check_ellipsoid_linear(Ellipsoid(np.diag([1.0, 4.0])), -np.eye(2))
    assert v.decision is Decision.INVARIANT
    assert v.certificate.data["eta"] == pytest.approx(-2.0, abs=1e-9)


def test_ellipsoid_saddle_not_invariant():
    v = check_ellipsoid_linear(Ellipsoid(np.eye(2)), np.diag([1.0, -1.0]))
    assert v.decision is Decision.NOT_INVARIANT
    assert abs(v.counterexample.point[0]) == pytest.approx(1.0, abs=1e-8)
    assert v.counterexample.violation == pytest.approx(1.0, abs=1e-8)


def test_ellipsoid_scale_invariance():
    a = np.array([[0.3, 1.2], [-0.7, -0.9]])
    base = check_ellipsoid_linear(Ellipsoid(np.diag([1.0, 2.0])), a).decision
    for c in (0.1, 10.0):
        scaled = check_ellipsoid_linear(Ellipsoid(c * np.diag([1.0, 2.0])), a).decision
        assert scaled is base


def test_lorenz_identity_field_invariant():
    v = check_lorenz_linear(ICE3, np.eye(3))
    assert v.decision is Decision.INVARIANT
    assert v.certificate.data["eta"] == pytest.approx(2.0, abs=1e-6)
    assert v.certificate.data["witness_max_eig"] <= 1e-9


def test_lorenz_axis_weighted_invariant():
    v = check_lorenz_linear(ICE3, np.diag([1.0, 1.0, 3.0]))
    assert v.decision is Decision.INVARIANT
    assert v.certificate.data["witness_max_eig"] <= 1e-9


def test_lorenz_flank_weighted_not_invariant():
    v = check_lorenz_linear(ICE3, np.diag([3.0, 3.0, 1.0]), n_samples=500, seed=1)
    assert v.decision is Decision.NOT_INVARIANT
    x = v.counterexample.point
    assert v.counterexample.violation > 0.0
    assert x @ np.diag([1.0, 1.0, -1.0]) @ np.diag([3.0, 3.0, 1.0]) @ x > 0.0


def test_sampled_quartic_contraction_unknown():
    disk = Ellipsoid(np.eye(2))
    sys = GeneralSystem(lambda t, x: -x ** 3, vectorized=True)
    v = check_nonlinear_sampled(disk, sys, 0.0, 10000, seed=4)
    assert v.decision is Decision.UNKNOWN
    assert v.notes["samples_checked"] == 10000


def test_sampled_radial_growth_refuted():
    disk = Ellipsoid(np.eye(2))
    sys = GeneralSystem(lambda t, x: x.copy())
    v = check_nonlinear_sampled(disk, sys, 0.0, 100, seed=4)
    assert v.decision is Decision.NOT_INVARIANT


def test_sampled_orthant_swap_unknown():
    sys = GeneralSystem(lambda t, x: np.array([x[1], x[0]]))
    v = check_nonlinear_sampled(orthant_h(2), sys, 0.0, 300, seed=6)
    assert v.decision is Decision.UNKNOWN


def test_dispatch_general_vpolytope_reports_both():
    sys = GeneralSystem(lambda t, x: -x)
    v = check(TRIANGLE, sys, n_samples=100, seed=8)
    assert v.decision is Decision.UNKNOWN
    assert v.notes.get("vertex_conditions") == "passed"


def test_dispatch_orthant_flag():
    v = check(orthant_h(2), LinearSystem([[-1.0, 2.0], [0.0, -3.0]]), orthant=True)
    assert v.decision is Decision.INVARIANT
    assert v.certificate.kind == "metzler"


def test_cube_h_v_checker_agreement():
    cube_h = HPolyhedron(np.vstack([np.eye(3), -np.eye(3)]),
                         np.concatenate([np.ones(3), np.zeros(3)]))
    cube_v = VPolytope([[i, j, k] for i in (0.0, 1.0) for j in (0.0, 1.0) for k in (0.0, 1.0)])
    rng = np.random.default_rng(301)
    for _ in range(20):
        a = rng.normal(size=(3, 3))
        dh = check_hpoly_linear(cube_h, a).decision
        dv = check_vpolytope(cube_v, LinearSystem(a)).decision
        assert dh is dv


def test_vertex_certificate_resubstitutes():
    v = check_vpolytope(TRIANGLE, LinearSystem(-np.eye(2)))
    x_cols = TRIANGLE.vertices.T
    for rec in v.certificate.data["vertices"]:
        i = rec["index"]
        alpha = np.array(rec["alpha"])
        f = -TRIANGLE.vertices[i]
        assert np.max(np.abs(x_cols @ alpha - f)) <= 1e-8
        assert abs(np.sum(alpha)) <= 1e-8
        assert min(alpha[j] for j in range(3) if j != i) >= -1e-10


def test_ray_certificate_resubstitutes():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    v = check_vcone(orthant_v(2), LinearSystem(a))
    r_cols = np.eye(2)
    for rec in v.certificate.data["rays"]:
        i = rec["index"]
        alpha = np.array(rec["alpha"])
        f = a @ r_cols[:, i]
        assert np.max(np.abs(r_cols @ alpha - f)) <= 1e-8
        assert min(alpha[j] for j in range(2) if j != i) >= -1e-10


def test_ellipsoid_certificate_rayleigh_revalidation():
    q = np.diag([1.0, 4.0])
    a = np.array([[-1.0, 0.5], [-0.5, -2.0]])
    v = check_ellipsoid_linear(Ellipsoid(q), a)
    assert v.decision is Decision.INVARIANT
    eta = v.certificate.data["eta"]
    m = a.T @ q + q @ a - eta * q
    rng = np.random.default_rng(401)
    for _ in range(1000):
        x = rng.normal(size=2)
        x /= np.linalg.norm(x)
        assert x @ m @ x <= 1e-8


def test_lorenz_verdicts_sound_against_dense_boundary_scan():
    # any certificate must dominate a dense flux scan of the surface, and
    # any counterexample must be confirmed by it
    rng = np.random.default_rng(501)
    from invarcheck.sets import sample_boundary

    for trial in range(12):
        n = int(rng.choice([3, 4]))
        basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
        w = np.concatenate([rng.uniform(0.5, 3.0, n - 1), [-rng.uniform(0.5, 3.0)]])
        cone = LorenzCone(basis @ np.diag(w) @ basis.T)
        a = rng.normal(size=(n, n))
        if trial % 3 == 0:
            a = a - (1.0 + np.max(np.abs(np.linalg.eigvals(a)))) * np.eye(n)
        v = check_lorenz_linear(cone, a, n_samples=400, seed=trial)
        pts = np.array([bp.point for bp in sample_boundary(cone, 5000, seed=900 + trial)[1:]])
        max_flux = float(np.max(np.einsum("ij,jk,ik->i", pts, cone.Q @ a, pts)))
        if v.decision is Decision.INVARIANT:
            assert max_flux <= 1e-7, (trial, max_flux)
        elif v.decision is Decision.NOT_INVARIANT:
            assert max_flux >= -1e-7, (trial, max_flux)


def test_invariant_verdicts_survive_falsification():
    cases = [
        (UNIT_BOX, -np.eye(2)),
        (Ellipsoid(np.diag([1.0, 4.0])), np.array([[0.0, 2.0], [-0.5, 0.0]])),
        (orthant_h(2), np.array([[-1.0, 2.0], [0.0, -3.0]])),
    ]
    for s, a in cases:
        sys = LinearSystem(a)
        verdict = check(s, sys)
        if verdict.decision is Decision.INVARIANT:
            assert falsify(s, sys, 100, horizon=3.0, step=1e-3, seed=13) is None


def test_counterexamples_produce_exits():
    cases = [
        (UNIT_BOX, np.eye(2)),
        (Ellipsoid(np.eye(2)), np.diag([1.0, -1.0])),
    ]
    for s, a in cases:
        sys = LinearSystem(a)
        verdict = check(s, sys)
        assert verdict.decision is Decision.NOT_INVARIANT
        hit = falsify(s, sys, 4, horizon=1.0, step=1e-3, seed=17,
                      extra_starts=[verdict.counterexample.point])
        assert hit is not None and hit[1] <= 1.0
