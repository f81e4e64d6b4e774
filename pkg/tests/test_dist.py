import json

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import bsc, independent, joints
from pipriv.dist import (
    FiniteJoint,
    Pmf,
    conditional_y_given_s,
    disparity,
    disparity_matrix,
    joint_from_json,
    joint_from_matrix,
    joint_to_json,
    marginals,
    product_of_marginals,
    random_joint,
)
from pipriv.errors import NegativeMass, NotNormalized, UnknownLabel, ZeroColumn, ZeroPriorRow


def test_marginals_of_bsc():
    ps, py = marginals(bsc())
    np.testing.assert_allclose(ps.probs, [0.5, 0.5])
    np.testing.assert_allclose(py.probs, [0.5, 0.5])


def test_conditional_and_disparity_values():
    j = bsc()
    np.testing.assert_allclose(conditional_y_given_s(j, 0).probs, [0.8, 0.2])
    assert disparity(j, 0, 0) == pytest.approx(1.6)
    assert disparity(j, 0, 1) == pytest.approx(0.4)


def test_validation_errors():
    with pytest.raises(NotNormalized):
        joint_from_matrix([0, 1], [0, 1], [[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(NegativeMass):
        joint_from_matrix([0, 1], [0], [[1.1], [-0.1]])
    with pytest.raises(ZeroPriorRow):
        joint_from_matrix([0, 1], [0, 1], [[0.5, 0.5], [0.0, 0.0]])
    with pytest.raises(ValueError):
        joint_from_matrix([0, 0], [0, 1], [[0.25, 0.25], [0.25, 0.25]])
    with pytest.raises(ValueError):
        joint_from_matrix([0, 1], [0, 1], [[0.5, 0.5]])


def test_tiny_normalisation_error_is_renormalised():
    j = joint_from_matrix([0, 1], [0], [[0.5 + 1e-12], [0.5]])
    assert j.matrix.sum() == pytest.approx(1.0, abs=1e-15)


def test_unknown_label_and_zero_column():
    j = joint_from_matrix(["a", "b"], ["x", "y"], [[0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(UnknownLabel):
        disparity(j, "c", "x")
    with pytest.raises(UnknownLabel):
        j.y_index("z")
    with pytest.raises(ZeroColumn):
        disparity(j, "a", "y")
    assert np.isnan(disparity_matrix(j)[:, 1]).all()


def test_matrix_is_read_only():
    j = bsc()
    with pytest.raises(ValueError):
        j.matrix[0, 0] = 1.0


def test_pmf_rejects_bad_mass():
    with pytest.raises(NotNormalized):
        Pmf.of([0.3, 0.3])
    with pytest.raises(NegativeMass):
        Pmf.of([1.5, -0.5])


def test_json_round_trip():
    j = joint_from_matrix(["lo", "hi"], [0, 1, 2], [[0.1, 0.2, 0.2], [0.3, 0.1, 0.1]])
    back = joint_from_json(joint_to_json(j))
    assert back.s_labels == j.s_labels and back.y_labels == j.y_labels
    np.testing.assert_array_equal(back.matrix, j.matrix)


def test_json_default_labels_and_errors():
    j = joint_from_json(json.dumps({"p": [[0.25, 0.25], [0.25, 0.25]]}))
    assert j.s_labels == (0, 1)
    with pytest.raises(ValueError):
        joint_from_json('{"p": [[0.5], [0.25, 0.25]]}')
    with pytest.raises(ValueError):
        joint_from_json("[1, 2]")


def test_random_joint_is_seeded_and_positive():
    a, b = random_joint(7, 3, 5), random_joint(7, 3, 5)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert a.shape == (3, 5) and np.all(a.matrix > 0)
    assert a.matrix.sum() == pytest.approx(1.0)


def test_product_of_independent_joint_is_itself():
    j = independent()
    np.testing.assert_allclose(product_of_marginals(j).matrix, j.matrix, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(joints())
def test_disparity_weighted_by_product_sums_to_one(j: FiniteJoint):
    d = disparity_matrix(j)
    q = np.outer(j.p_s, j.p_y)
    ok = ~np.isnan(d)
    assert np.sum(d[ok] * q[ok]) == pytest.approx(1.0, abs=1e-9)
    # posterior averages back to the prior: sum_y p(y) d(s, y) = 1 for every s
    np.testing.assert_allclose(np.nansum(d * j.p_y[None, :], axis=1), 1.0, atol=1e-9)
