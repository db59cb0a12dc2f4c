from pathlib import Path

import numpy as np
import pytest

from maps.certify import EXACT, FAIL, PASS, SAMPLED, certify_nonexpansive, operator_norm, sampled_lipschitz
from maps.families import (
    Affine,
    AnalyticLayers,
    Averaged,
    Composite,
    Iterate,
    Layer,
    TensorH,
    h_eigenpair,
    scaled_identity,
    signed_permutation,
)
from maps.loader import map_from_dict
from numerics.errors import ConfigError, DimensionMismatchError, SingularNormalizationError
from polynorm.norms import make_custom, make_l1, make_linf
from runner.config import ExperimentConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

HEXAGON = [[1, 0], [0, 1], [1, -1], [-1, 0], [0, -1], [-1, 1]]


def test_rotation_certifies_exactly(rotation, linf2):
    cert = certify_nonexpansive(rotation, linf2)
    assert cert.method == EXACT
    assert cert.bound == 1.0
    assert cert.verdict == PASS


def test_doubling_fails(linf2):
    cert = certify_nonexpansive(scaled_identity(2, 2.0), linf2)
    assert cert.verdict == FAIL
    assert cert.bound == 2.0
    assert not cert.passed


def test_operator_norm_row_and_column_sums():
    m = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert operator_norm(m, make_linf(2)) == 2.0
    assert operator_norm(m, make_l1(2)) == 1.0


def test_sampled_certificate_for_custom_norm():
    f = AnalyticLayers([Layer(np.eye(2), activation="tanh")])
    cert = certify_nonexpansive(f, make_custom(HEXAGON), trials=500, seed=3)
    assert cert.method == SAMPLED
    assert cert.trials == 500
    assert cert.verdict == PASS
    assert cert.worst_pair is not None


def test_sampled_certificate_catches_expansion():
    f = Affine(np.array([[1.0, 0.5], [0.0, 1.0]]))
    cert = certify_nonexpansive(f, make_custom(HEXAGON), trials=500, seed=3)
    assert cert.method == SAMPLED
    assert cert.verdict == FAIL


def test_sampled_certificate_is_deterministic():
    f = AnalyticLayers([Layer(np.eye(2), activation="sin")])
    norm = make_custom(HEXAGON)
    first = certify_nonexpansive(f, norm, trials=700, seed=11)
    second = certify_nonexpansive(f, norm, trials=700, seed=11, workers=4)
    assert first.bound == second.bound


def test_signed_permutation_matrix():
    f = signed_permutation([1, 2, 0], [1, 1, -1])
    np.testing.assert_array_equal(f([1.0, 2.0, 3.0]), [3.0, 1.0, -2.0])
    with pytest.raises(ConfigError):
        signed_permutation([0, 0, 1])
    with pytest.raises(ConfigError):
        signed_permutation([1, 0], [1, 2])


def test_layer_activations(sin_curve):
    x = np.array([0.7, 5.0])
    np.testing.assert_allclose(sin_curve(x), [0.7, np.sin(0.7)])
    assert sin_curve.exact_lipschitz(make_linf(2)) == 1.0
    assert sin_curve.exact_lipschitz(make_custom(HEXAGON)) is None


def test_layers_must_return_to_input_space():
    with pytest.raises(DimensionMismatchError):
        AnalyticLayers([Layer(np.ones((3, 2)))])
    with pytest.raises(ConfigError):
        Layer(np.eye(2), activation="relu")


def test_combinators(rotation):
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(Iterate(rotation, 4)(x), x)
    np.testing.assert_allclose(Composite([rotation, rotation])(x), -x)
    averaged = Averaged(rotation)
    np.testing.assert_allclose(averaged(x), 0.5 * (x + rotation(x)))
    assert averaged.exact_lipschitz(make_linf(2)) == 1.0
    with pytest.raises(ConfigError):
        Averaged(rotation, weight=0.0)


def test_h_eigenpair_of_matrix():
    mu, x = h_eigenpair([[2.0, 1.0], [1.0, 2.0]])
    assert mu == pytest.approx(3.0, rel=1e-12)
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-10)


def test_tensor_map_fixes_log_eigenvector():
    tensor = np.array([[[1.0, 2.0], [0.5, 1.0]], [[3.0, 1.0], [1.0, 0.5]]])
    f = TensorH.normalized(tensor)
    _, x = h_eigenpair(tensor)
    y = np.log(x)
    np.testing.assert_allclose(f(y), y, atol=1e-9)
    # additively homogeneous
    np.testing.assert_allclose(f(y + 2.0), y + 2.0, atol=1e-9)


def test_tensor_map_needs_positive_mass():
    with pytest.raises(SingularNormalizationError):
        TensorH(np.array([[1.0, 1.0], [0.0, 0.0]]))(np.zeros(2))
    with pytest.raises(ConfigError):
        TensorH(np.array([[1.0, -1.0], [1.0, 1.0]]))


def test_loader_builds_variants():
    f = map_from_dict({"kind": "signed_permutation", "permutation": [1, 0]}, 2)
    np.testing.assert_array_equal(f([1.0, 2.0]), [2.0, 1.0])
    g = map_from_dict({"kind": "averaged", "map": {"kind": "scaled_identity", "scale": -1.0}}, 2)
    np.testing.assert_allclose(g([1.0, 2.0]), [0.0, 0.0])
    h = map_from_dict({"kind": "tensor_h", "coefficients": [[2, 1], [1, 2]], "shift": "auto"}, 2)
    assert h.shift == pytest.approx(np.log(3.0))


@pytest.mark.parametrize(
    "record,n",
    [
        ({"kind": "rotation"}, 2),
        ({"kind": "affine"}, 2),
        ({"kind": "affine", "matrix": [[1, 0, 0], [0, 1, 0]]}, 2),
        ({"kind": "scaled_identity", "scale": 1.0, "n": 3}, 2),
        ("affine", 2),
    ],
)
def test_loader_rejects(record, n):
    with pytest.raises(ConfigError):
        map_from_dict(record, n)


def test_composite_certificate_multiplies_exact_bounds(rotation, linf2):
    shear = Affine(np.array([[1.0, 0.5], [0.0, 1.0]]))
    halving = scaled_identity(2, 0.5)
    assert certify_nonexpansive(shear, linf2).bound == 1.5

    cert = certify_nonexpansive(Composite([halving, shear, rotation]), linf2)
    assert cert.method == EXACT
    assert cert.bound == pytest.approx(0.75)
    assert cert.verdict == PASS

    cert = certify_nonexpansive(Iterate(shear, 3), linf2)
    assert cert.bound == pytest.approx(1.5**3)
    assert cert.verdict == FAIL

    # one component without an exact bound turns the whole product into sampling
    tanh = AnalyticLayers([Layer(np.eye(2), activation="tanh")])
    hexagon = make_custom(HEXAGON)
    assert certify_nonexpansive(Composite([tanh, halving]), hexagon, trials=200).method == SAMPLED


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.yaml")))
def test_exactly_certified_maps_never_sample_above_one(name):
    config = ExperimentConfig.from_yaml(str(CONFIGS / name))
    norm = config.build_norm()
    f = config.build_map(norm)
    cert = certify_nonexpansive(f, norm)
    if cert.method != EXACT or cert.verdict != PASS:
        pytest.skip(f"{name} has no exact passing certificate")
    ratio, _ = sampled_lipschitz(f, norm, trials=2000, seed=0)
    assert ratio <= 1.0 + 1e-9
