from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynamics.bounds import audit_period, normalize_p_norm
from dynamics.iteration import (
    averaged_iterates,
    distinct_points,
    harvest_fixed_points,
    krasnoselskii,
    retract,
    sample_starts,
)
from dynamics.orbits import default_p_max, find_orbit, find_orbits, lcm_of_observed_periods, minimal_period
from maps.families import Affine, AnalyticLayers, Layer, scaled_identity, signed_permutation
from numerics.errors import AmbiguousPeriodError, NoOrbitFoundError, NotConvergedError
from polynorm.norms import make_l1, make_linf, norm_eval
from runner.config import ExperimentConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

translation = Affine(np.eye(2), [1.0, 0.0])


def test_krasnoselskii_lands_on_the_curve(sin_curve, linf2):
    result = krasnoselskii(sin_curve, [0.4, -2.0], norm=linf2)
    assert result.converged
    assert result.point[0] == 0.4
    assert abs(result.point[1] - np.sin(0.4)) <= 1e-10
    history = result.residual_history
    assert all(b <= a + 1e-14 for a, b in zip(history, history[1:]))


def test_krasnoselskii_rotation_goes_to_origin(rotation, linf2):
    result = krasnoselskii(rotation, [3.0, -1.0], norm=linf2)
    assert result.converged
    assert np.abs(result.point).max() <= 1e-10


def test_translation_does_not_converge(linf2):
    result = krasnoselskii(translation, [0.0, 0.0], max_iter=50, norm=linf2)
    assert not result.converged
    assert result.status == "NOT-CONVERGED"
    assert result.residual == pytest.approx(1.0)
    with pytest.raises(NotConvergedError):
        retract(translation, [0.0, 0.0], max_iter=50, norm=linf2, strict=True)


def test_retract_fixes_fixed_points(sin_curve, linf2):
    x = np.array([1.2, np.sin(1.2)])
    np.testing.assert_array_equal(retract(sin_curve, x, norm=linf2), x)


def test_bad_tolerance(rotation):
    with pytest.raises(ValueError):
        krasnoselskii(rotation, [1.0, 0.0], fp_tol=0.0)


def test_averaged_iterates_use_a_common_step_count(sin_curve):
    points = averaged_iterates(sin_curve, [[0.0, 1.0], [0.0, 0.5]], fp_tol=1e-12)
    # both start on the same vertical line, so equal step counts keep the
    # ratio of their distances to the curve
    assert points[0][1] == pytest.approx(2.0 * points[1][1], rel=1e-9, abs=1e-15)


RETRACT_CASES = {
    "sin_curve_linf": (
        AnalyticLayers([Layer([[1.0, 0.0], [1.0, 0.0]], activation=("identity", "sin"))]),
        make_linf(2),
    ),
    "rotation_linf": (Affine(np.array([[0.0, -1.0], [1.0, 0.0]])), make_linf(2)),
    "swap_l1": (signed_permutation([1, 0]), make_l1(2)),
    "swap_linf": (signed_permutation([1, 0]), make_linf(2)),
}

planar_points = st.lists(st.floats(-4, 4, allow_nan=False), min_size=2, max_size=2).map(np.array)


@given(st.sampled_from(sorted(RETRACT_CASES)), planar_points, planar_points)
def test_retract_is_nonexpansive(case, x, y):
    f, norm = RETRACT_CASES[case]
    fp_tol = 1e-10
    rx = retract(f, x, fp_tol, norm=norm)
    ry = retract(f, y, fp_tol, norm=norm)
    assert norm_eval(norm, rx - ry) <= norm_eval(norm, x - y) + 4 * fp_tol


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.yaml")))
def test_krasnoselskii_residuals_never_increase_on_shipped_maps(name):
    config = ExperimentConfig.from_yaml(str(CONFIGS / name))
    norm = config.build_norm()
    f = config.build_map(norm)
    for x0 in sample_starts(f.dim, 100, seed=11, box=config.box):
        history = krasnoselskii(f, x0, config.tolerances.fp_tol, 1000, norm).residual_history
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:])), name


def test_harvest_is_reproducible(sin_curve, linf2):
    first = harvest_fixed_points(sin_curve, linf2, 6, seed=5, workers=1)
    second = harvest_fixed_points(sin_curve, linf2, 6, seed=5, workers=3)
    assert [r.point.tolist() for r in first] == [r.point.tolist() for r in second]
    assert all(r.converged for r in first)


def test_distinct_points(linf2):
    points = [np.zeros(2), np.array([1e-9, 0.0]), np.ones(2)]
    kept = distinct_points(points, linf2, 1e-6)
    assert len(kept) == 2


@pytest.mark.parametrize(
    "f,period",
    [
        (Affine(np.array([[0.0, -1.0], [1.0, 0.0]])), 4),
        (scaled_identity(2, -1.0), 2),
        (scaled_identity(2, 1.0), 1),
    ],
)
def test_find_orbit_periods(f, period):
    orbit = find_orbit(f, [1.0, 0.3], make_linf(2))
    assert orbit.minimal_period == period
    assert len(orbit.points) == period


def test_signed_cycle_has_period_six():
    f = signed_permutation([1, 2, 0], [1, 1, -1])
    orbit = find_orbit(f, [0.5, -1.0, 2.0], make_l1(3))
    assert orbit.minimal_period == 6


def test_orbit_converging_to_fixed_point(sin_curve, linf2):
    orbit = find_orbit(sin_curve, [2.0, 0.0], linf2)
    assert orbit.minimal_period == 1
    np.testing.assert_allclose(orbit.representative, [2.0, np.sin(2.0)], atol=1e-10)


def test_no_orbit_for_translation(linf2):
    with pytest.raises(NoOrbitFoundError):
        find_orbit(translation, [0.0, 0.0], linf2, max_iter=100)


@pytest.mark.parametrize("n,bound", [(2, 8), (3, 24), (4, 96), (5, 320)])
def test_default_p_max_is_the_period_bound(n, bound):
    assert default_p_max(n, "inf") == bound
    assert default_p_max(n, 1) == bound


def test_default_p_max_truncates_at_cap():
    assert default_p_max(5, "inf", cap=100) == 100
    assert default_p_max(12, 1) == 4096
    # custom norms have no bound to fall back on
    assert default_p_max(2, None, cap=50) == 50
    with pytest.raises(ValueError):
        default_p_max(2, "inf", cap=0)


def test_find_orbit_scans_up_to_the_bound(linf2):
    with pytest.raises(NoOrbitFoundError, match="period <= 8 "):
        find_orbit(translation, [0.0, 0.0], linf2, max_iter=20)


def test_find_orbit_misses_periods_beyond_p_max():
    cycle = signed_permutation([1, 2, 0], [1, 1, -1])
    with pytest.raises(NoOrbitFoundError):
        find_orbit(cycle, [1.0, 2.0, 3.0], make_l1(3), max_iter=200, p_max=5)
    assert find_orbit(cycle, [1.0, 2.0, 3.0], make_l1(3), p_max=6).minimal_period == 6


def test_minimal_period_reduces_multiples(rotation, linf2):
    assert minimal_period(rotation, [1.0, 0.0], 8, linf2) == 4


def test_minimal_period_rejects_non_periodic_point(rotation, linf2):
    with pytest.raises(ValueError):
        minimal_period(rotation, [1.0, 0.0], 3, linf2)


def test_minimal_period_ambiguity(rotation, linf2):
    # every gap of the quarter turn is 1, inside [0.5, 5)
    with pytest.raises(AmbiguousPeriodError):
        minimal_period(rotation, [1.0, 0.0], 4, linf2, orbit_tol=0.5)


def test_find_orbits_reports_failures_in_place(linf2):
    found = find_orbits(translation, linf2, 3, seed=0, max_iter=50)
    assert len(found) == 3
    assert all(isinstance(e, NoOrbitFoundError) for e in found)


def test_lcm_of_observed_periods(rotation, linf2):
    orbit = find_orbit(rotation, [1.0, 2.0], linf2)
    assert lcm_of_observed_periods([orbit, 3]) == 12
    assert lcm_of_observed_periods([1, 2, 4]) == 4
    with pytest.raises(ValueError):
        lcm_of_observed_periods([])


def test_audit_accepts_permutation_orders():
    audit = audit_period(4, 2, "inf", [1, 4])
    assert all(audit.verdicts.values())
    assert not audit.alarm
    assert audit.landau == 2
    assert audit.permutation_orders == (1, 2)


def test_audit_flags_period_five_in_three_dimensions():
    audit = audit_period(5, 3, "inf")
    assert not audit.verdicts["permutation_order_form"]
    assert audit.verdicts["below_2n"]
    assert audit.alarm


def test_audit_twice_an_order():
    audit = audit_period(6, 3, 1)
    assert audit.verdicts["permutation_order_form"]
    assert "below_best_known" not in audit.guaranteed


def test_audit_checks_divisibility():
    audit = audit_period(4, 2, "inf", [3])
    assert not audit.verdicts["divides_q"]
    assert audit.alarm


def test_audit_custom_norm_guarantees_nothing():
    audit = audit_period(5, 3, None)
    assert audit.guaranteed == {}
    assert not audit.alarm


def test_audit_rejects_bad_q():
    with pytest.raises(ValueError):
        audit_period(0, 2)


def test_normalize_p_norm():
    assert normalize_p_norm("linf") == "inf"
    assert normalize_p_norm(np.inf) == "inf"
    assert normalize_p_norm("1") == 1
    assert normalize_p_norm("custom") is None
    with pytest.raises(ValueError):
        normalize_p_norm(2)
