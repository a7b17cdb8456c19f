"""Model containers and assumption validation."""

import numpy as np
import pytest

from mcckf.bench import build_example1
from mcckf.linalg import cholesky_lower
from mcckf.model import (
    InitialCondition,
    Measurement,
    StateSpaceModel,
    TimeVaryingModel,
    validate_model,
)


def tiny_model(q_var=1.0, r_var=1.0):
    return StateSpaceModel(
        F=[[1.0]], G=[[1.0]], H=[[1.0]], Q=[[q_var]], R=[[r_var]]
    )


def test_radar_model_validates_clean():
    model, init, _ = build_example1()
    assert validate_model(model, init, require_spd_init=True) == []


def test_radar_init_blocks_positive_determinants():
    _, init, _ = build_example1()
    pi0 = np.asarray(init.covariance)
    assert np.linalg.det(pi0[:2, :2]) > 0
    assert np.linalg.det(pi0[3:5, 3:5]) > 0


def test_spd_inputs_factor_after_validation():
    model, init, _ = build_example1()
    assert validate_model(model, init, require_spd_init=True) == []
    cholesky_lower(np.asarray(init.covariance))
    cholesky_lower(np.asarray(model.Q))
    cholesky_lower(np.asarray(model.R))


def test_zero_q_reported():
    model = tiny_model(q_var=0.0)
    init = InitialCondition(np.zeros(1), np.eye(1))
    report = validate_model(model, init)
    assert any("Q not positive definite" in v for v in report)


def test_wrong_h_shape_rejected_at_construction():
    with pytest.raises(ValueError):
        StateSpaceModel(F=np.eye(2), G=np.eye(2), H=np.ones((2, 3)), Q=np.eye(2), R=np.eye(2))


def test_dimension_violation_reported_for_provider():
    provider = lambda k: (np.eye(2), np.eye(2), np.ones((3, 2)), np.eye(2), np.eye(2))
    model = TimeVaryingModel(provider, state_dim=2, noise_dim=2, obs_dim=2)
    init = InitialCondition(np.zeros(2), np.eye(2))
    report = validate_model(model, init)
    assert report and "shape" in report[0]


def test_init_dimension_mismatch_reported():
    model = tiny_model()
    report = validate_model(model, InitialCondition(np.zeros(2), np.eye(2)))
    assert any("does not match state dim" in v for v in report)


def test_non_spd_init_only_flagged_when_required():
    model = tiny_model()
    init = InitialCondition(np.zeros(1), np.zeros((1, 1)))
    assert validate_model(model, init) == []
    assert validate_model(model, init, require_spd_init=True) != []


def test_validation_is_pure():
    model = tiny_model(q_var=0.0)
    init = InitialCondition(np.zeros(1), np.eye(1))
    assert validate_model(model, init) == validate_model(model, init)


def test_matrices_are_frozen():
    model = tiny_model()
    with pytest.raises(ValueError):
        model.F[0, 0] = 2.0


def test_cached_factors_match_direct_factorization():
    model, _, _ = build_example1()
    q_sqrt, r_sqrt = model.noise_factors(1)
    np.testing.assert_array_equal(q_sqrt, cholesky_lower(np.asarray(model.Q)))
    np.testing.assert_array_equal(r_sqrt, cholesky_lower(np.asarray(model.R)))
    assert model.noise_factors(5) is model.noise_factors(9)
    r_inv = model.r_inverse(1)
    np.testing.assert_allclose(r_inv @ np.asarray(model.R), np.eye(2), atol=1e-12)


def test_time_varying_provider_deterministic_shapes():
    base, _, _ = build_example1()
    provider = lambda k: (base.F, base.G, base.H, base.Q, base.R)
    tv = TimeVaryingModel(provider, 6, 2, 2)
    f, g, h, q, r = tv.matrices(3)
    np.testing.assert_array_equal(f, base.F)
    q_sqrt, r_sqrt = tv.noise_factors(3)
    np.testing.assert_allclose(q_sqrt @ q_sqrt.T, base.Q, rtol=1e-14)
    np.testing.assert_allclose(tv.r_inverse(1) @ base.R, np.eye(2), atol=1e-12)


def test_measurement_finite_and_positive_step():
    Measurement(1, [1.0, 2.0])
    with pytest.raises(ValueError):
        Measurement(0, [1.0])
    with pytest.raises(ValueError):
        Measurement(1, [np.nan])
