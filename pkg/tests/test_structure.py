import numpy as np
import pytest

from dynamics.iteration import harvest_fixed_points
from maps.families import Affine, Iterate, scaled_identity, signed_permutation
from numerics.errors import ContainmentViolationError, DimensionMismatchError, StructureMismatchError
from numerics.linalg import Subspace
from polynorm.duality import DualFace
from polynorm.norms import make_l1, make_linf
from structure import (
    affine_fix_audit,
    analyze_structure,
    derivative_of_retract,
    extend_linearization,
    find_locked_sets,
    linear_order,
    linearize_on_fix,
    minimal_locked,
    partition_support,
    projection_l1,
    projection_linf,
    reduce_to_linear,
    s_e_member,
    support_of_v,
    v_of_f,
)
from structure.derivative import image_of, projection_defect, verify_isometry, verify_projection
from structure.locked import (
    LockedSet,
    discovery_coverage,
    locked_affine_check,
    oracle_minimal_locked_faces,
    s_e_equality_check,
    separation_check,
    union_of_faces,
)

E1, E2, MINUS_E1 = DualFace((0,)), DualFace((1,)), DualFace((2,))


def faces(sets):
    return {s.face for s in sets}


def test_s_e_member_on_sin_curve(sin_curve, linf2):
    # f preserves the first coordinate everywhere, the second only on the curve
    assert s_e_member(sin_curve, linf2, E1, [0.3, 7.0])
    assert s_e_member(sin_curve, linf2, MINUS_E1, [-2.0, 1.0])
    assert not s_e_member(sin_curve, linf2, E2, [0.3, 7.0])
    assert s_e_member(sin_curve, linf2, E2, [0.3, np.sin(0.3)])


def test_locked_sets_of_sin_curve(sin_curve, linf2):
    points = [np.zeros(2), np.array([np.pi, np.sin(np.pi)])]
    locked = find_locked_sets(sin_curve, linf2, points)
    assert faces(locked) == {E1, MINUS_E1, DualFace.full(linf2)}
    assert faces(minimal_locked(locked)) == {E1, MINUS_E1}
    assert union_of_faces(minimal_locked(locked)) == DualFace((0, 2))


def test_single_point_gives_only_the_full_face(rotation, linf2):
    locked = find_locked_sets(rotation, linf2, [np.zeros(2)])
    assert faces(locked) == {DualFace.full(linf2)}
    assert locked[0].diagonal
    assert find_locked_sets(rotation, linf2, []) == []


def test_locked_sets_of_identity(linf2):
    identity = scaled_identity(2, 1.0)
    points = [np.zeros(2), np.array([1.0, 0.0]), np.array([1.0, 1.0])]
    found = faces(find_locked_sets(identity, linf2, points))
    assert {E1, E2, MINUS_E1, DualFace((3,)), DualFace((0, 1)), DualFace((2, 3))} <= found
    assert faces(minimal_locked(find_locked_sets(identity, linf2, points))) == {
        E1,
        E2,
        MINUS_E1,
        DualFace((3,)),
    }


def test_minimal_locked_is_an_inclusion_filter():
    zero = np.zeros(2)
    sets = [LockedSet(DualFace(ix), zero, zero) for ix in [(0,), (0, 1), (1, 2), (0, 1, 2, 3)]]
    assert [s.face for s in minimal_locked(sets)] == [DualFace((0,)), DualFace((1, 2))]


def test_v_of_f(linf2):
    zero = np.zeros(2)
    singles = [LockedSet(E1, zero, zero), LockedSet(E2, zero, zero)]
    assert v_of_f(linf2, singles).dim == 2
    diagonal = [LockedSet(DualFace.full(linf2), zero, zero)]
    assert v_of_f(linf2, diagonal).dim == 0
    with pytest.raises(ContainmentViolationError):
        v_of_f(linf2, diagonal, fixed_points=[np.array([1.0, 0.0])])
    with pytest.raises(ValueError):
        v_of_f(linf2, [])


def test_discovery_coverage():
    zero = np.zeros(2)
    early = [LockedSet(E1, zero, zero, 1), LockedSet(E2, zero, zero, 3)]
    assert discovery_coverage(early, 16, 10).stabilized
    late = early + [LockedSet(MINUS_E1, zero, zero, 8)]
    assert not discovery_coverage(late, 16, 10).stabilized


def test_separation_check(linf2):
    points = [np.zeros(2), np.array([0.0, 1.0])]
    assert separation_check(linf2, points, DualFace((0, 2))) == 1
    assert separation_check(linf2, points, DualFace((1,))) == 0


def test_locked_affine_check_on_sin_curve(sin_curve, linf2):
    points = [np.zeros(2), np.array([1.0, np.sin(1.0)])]
    minimal = minimal_locked(find_locked_sets(sin_curve, linf2, points))
    assert locked_affine_check(sin_curve, linf2, minimal) == 0.0


def test_derivative_of_identity():
    identity = scaled_identity(2, 1.0)
    d = derivative_of_retract(identity, Subspace.full(2), u=np.array([0.3, -0.2]))
    np.testing.assert_allclose(d.matrix, np.eye(2), atol=1e-9)
    assert d.attempts == 1


def test_derivative_on_sin_curve(sin_curve):
    u = np.array([0.3, -0.5])
    d = derivative_of_retract(sin_curve, Subspace.full(2), u=u)
    np.testing.assert_allclose(d.matrix, [[1.0, 0.0], [np.cos(0.3), 0.0]], atol=1e-6)
    assert d.defect <= 1e-7


def test_derivative_on_zero_subspace(rotation):
    d = derivative_of_retract(rotation, Subspace.zero(2))
    np.testing.assert_array_equal(d.matrix, np.zeros((2, 2)))


def test_derivative_rejects_u_outside_v(sin_curve):
    with pytest.raises(ValueError):
        derivative_of_retract(sin_curve, Subspace.span([[1.0, 0.0]], 2), u=np.array([0.0, 1.0]))


def test_image_of_derivative(sin_curve):
    a = np.array([[1.0, 0.0], [np.cos(0.3), 0.0]])
    w = image_of(a, Subspace.full(2))
    assert w.dim == 1
    assert w.contains([1.0, np.cos(0.3)])


def test_verify_projection(linf2):
    good = verify_projection(np.eye(2), linf2)
    assert good.a2_defect == 0.0 and good.nonexpansive
    assert good.method == "exact-operator-norm"
    bad = verify_projection(2.0 * np.eye(2), linf2)
    assert bad.a2_defect == 2.0
    assert not bad.nonexpansive
    assert projection_defect(np.eye(3)) == 0.0


def test_verify_projection_on_subspace(linf2):
    check = verify_projection(np.eye(2), linf2, v=Subspace.span([[1.0, 1.0]], 2))
    assert check.method == "sampled-on-V"
    assert check.opnorm_estimate == pytest.approx(1.0)
    assert verify_projection(np.eye(2), linf2, v=Subspace.zero(2)).method == "vacuous"


def test_isometry_on_sin_curve(sin_curve, linf2):
    c = np.cos(0.3)
    a = np.array([[1.0, 0.0], [c, 0.0]])
    w = Subspace.span([[1.0, c]], 2)
    check = verify_isometry(sin_curve, a, w, linf2, samples=200)
    assert check.pairs == 200
    assert check.max_defect <= 1e-8


def test_partition_support():
    assert partition_support(Subspace.span([[1, -1, 0]], 3)) == [(0, 1), (2,)]
    assert partition_support(Subspace.full(3)) == [(0,), (1,), (2,)]
    assert partition_support(Subspace.zero(3)) == [(0, 1, 2)]


def test_projection_linf_on_diagonal():
    p = projection_linf(Subspace.span([[1.0, 1.0]], 2))
    np.testing.assert_allclose(p, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)


def test_projection_linf_on_antidiagonal_with_free_coordinate():
    v = Subspace.span([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]], 3)
    p = projection_linf(v)
    np.testing.assert_allclose(p, [[0.5, -0.5, 0.0], [-0.5, 0.5, 0.0], [0.0, 0.0, 1.0]], atol=1e-12)
    assert np.abs(p).sum(axis=1).max() <= 1.0 + 1e-12


def test_projection_linf_of_full_and_zero_space():
    np.testing.assert_allclose(projection_linf(Subspace.full(3)), np.eye(3), atol=1e-12)
    np.testing.assert_array_equal(projection_linf(Subspace.zero(2)), np.zeros((2, 2)))


def test_projection_linf_structure_mismatch():
    with pytest.raises(StructureMismatchError):
        projection_linf(Subspace.span([[1.0, 2.0]], 2))


def test_projection_l1():
    np.testing.assert_array_equal(projection_l1({0, 2}, 3), np.diag([1.0, 0.0, 1.0]))
    np.testing.assert_array_equal(projection_l1(set(), 2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        projection_l1({3}, 3)


def test_support_of_v():
    norm = make_l1(3)
    assert support_of_v(Subspace.span([[1, 0, 0], [0, 0, 1]], 3), norm) == {0, 2}
    assert support_of_v(Subspace.zero(3), norm) == set()
    with pytest.raises(StructureMismatchError):
        support_of_v(Subspace.span([[1, 1, 0]], 3), norm)
    with pytest.raises(DimensionMismatchError):
        support_of_v(Subspace.full(2), norm)


def test_linearize_rotation(rotation, linf2):
    w = Subspace.full(2)
    lin = linearize_on_fix(rotation, np.eye(2), w, retract_map=Iterate(rotation, 4), norm=linf2)
    np.testing.assert_allclose(lin.matrix, rotation.matrix, atol=1e-12)
    assert lin.superposition_residual <= 1e-12
    assert linear_order(lin.on_w) == 4
    ext = extend_linearization(lin, np.eye(2), np.eye(2), linf2, w)
    assert ext.opnorm == pytest.approx(1.0)
    assert ext.agreement_on_w <= 1e-12


def test_linearize_on_zero_subspace(rotation):
    lin = linearize_on_fix(rotation, np.zeros((2, 2)), Subspace.zero(2))
    assert lin.on_w.shape == (0, 0)
    assert linear_order(lin.on_w) == 1


def test_linear_order():
    assert linear_order(np.eye(3)) == 1
    assert linear_order(-np.eye(2)) == 2
    assert linear_order(signed_permutation([1, 2, 0], [1, 1, -1]).matrix) == 6
    assert linear_order([[2.0]], max_order=10) is None


def test_affine_fix_audit_for_orthogonal_projection():
    f = Affine(np.array([[1.0, 0.0], [0.0, 0.0]]))
    audit = affine_fix_audit(f, True, [np.array([1.0, 0.0]), np.array([2.0, 0.0])])
    assert audit.pairs == 1
    assert audit.max_defect <= 1e-12
    with pytest.raises(ValueError):
        affine_fix_audit(f, False, [])


def test_oracle_on_sin_curve(sin_curve, linf2):
    points = [np.array([t, np.sin(t)]) for t in np.linspace(-3.0, 3.0, 7)]
    assert oracle_minimal_locked_faces(sin_curve, linf2, points) == [E1, MINUS_E1]


def test_analyze_sin_curve(sin_curve, linf2):
    results = harvest_fixed_points(sin_curve, linf2, 16, seed=0)
    report = analyze_structure(sin_curve, linf2, [r.point for r in results], oracle=True, oracle_box=3.0)
    assert not report.failures
    assert {s.face for s in report.minimal_locked} == {E1, MINUS_E1}
    assert report.V.dim == 2
    assert report.W.dim == 1
    defects = report.defects()
    assert defects["A2_defect"] <= 1e-8
    assert defects["isometry_defect"] <= 1e-7
    assert report.isometry_check.pairs >= 200
    assert defects["inverse_defect"] <= 1e-7
    assert defects["value_preservation_defect"] <= 1e-7
    assert report.order == 1
    assert report.oracle["match"]
    assert report.alarms(1e-7) == []
    assert report.to_dict(linf2)["minimality"] == "upper-approximation"


def test_analyze_unique_fixed_point(rotation, linf2):
    report = analyze_structure(rotation, linf2, [np.zeros(2), np.array([1e-12, 0.0])])
    assert len(report.fixed_points) == 1
    assert report.V.dim == 0
    assert report.W.dim == 0
    np.testing.assert_array_equal(report.linear_projection, np.zeros((2, 2)))
    assert report.alarms(1e-7) == []


def test_analyze_needs_a_point(rotation, linf2):
    with pytest.raises(ValueError):
        analyze_structure(rotation, linf2, [])


def test_analyze_identity_from_two_points(linf2):
    identity = scaled_identity(2, 1.0)
    report = analyze_structure(identity, linf2, [np.zeros(2), np.array([0.0, 1.0])])
    assert report.V.dim == 2
    assert report.alarms(1e-7) == []


@pytest.mark.parametrize(
    "f,norm,order",
    [
        (Affine(np.array([[0.0, -1.0], [1.0, 0.0]])), make_linf(2), 4),
        (signed_permutation([1, 2, 0], [1, 1, -1]), make_l1(3), 6),
    ],
)
def test_reduce_to_linear(f, norm, order):
    rng = np.random.default_rng(1)
    points = []
    for x in rng.uniform(-2.0, 2.0, size=(6, f.dim)):
        for _ in range(order):
            points.append(x)
            x = f(x)
    report = reduce_to_linear(f, norm, order, np.zeros(f.dim), points)
    assert not report.failures
    assert report.V.dim == f.dim
    assert report.order == order
    assert report.extension.opnorm <= 1.0 + 1e-9


def test_s_e_equals_affine_set_for_minimal_locked_sets(sin_curve, linf2):
    points = [np.zeros(2), np.array([np.pi, np.sin(np.pi)])]
    for locked in minimal_locked(find_locked_sets(sin_curve, linf2, points)):
        check = s_e_equality_check(sin_curve, linf2, locked, samples=100, seed=2)
        assert check.superset_defect == 0.0
        assert check.members_sampled == 100
        assert check.outside_affine == 0


def test_s_e_equality_counts_members_off_a_non_minimal_face(linf2):
    # identity keeps every functional, but L_E of {e1, e2} is only the diagonal
    pair = LockedSet(DualFace((0, 1)), np.zeros(2), np.zeros(2))
    check = s_e_equality_check(scaled_identity(2, 1.0), linf2, pair, samples=50, seed=0)
    assert check.superset_defect == 0.0
    assert check.members_sampled == 50
    assert check.outside_affine == 50
    assert check.to_dict()["face"] == [0, 1]


def test_report_places_derivative_point_in_map_coordinates(sin_curve, linf2):
    center = np.array([3.0, -1.0])
    quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
    shifted = Affine(quarter, center - quarter @ center)
    report = analyze_structure(shifted, linf2, [center])
    derivative = report.to_dict(linf2)["derivative"]
    assert derivative["u_local"] == [0.0, 0.0]
    assert derivative["u"] == center.tolist()

    points = [np.array([x, np.sin(x)]) for x in (0.5, 1.0, -2.0)]
    report = analyze_structure(sin_curve, linf2, points)
    derivative = report.to_dict(linf2)["derivative"]
    np.testing.assert_allclose(derivative["u"], np.add(derivative["u_local"], points[0]))
