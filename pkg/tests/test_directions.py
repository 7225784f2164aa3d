"""Unit tests for direction sets and spherical angle helpers."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subindex.directions import (
    DirectionSet,
    angle,
    angles_to_set,
    min_angle_to_set,
    theta_neighborhood_contains,
)


def test_angle_orthogonal_pair():
    assert angle(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(math.pi / 2)


def test_angle_clamps_rounding_noise():
    # nearly parallel unit vectors can push the inner product past 1.0
    v = np.array([0.6, 0.8])
    w = v / np.linalg.norm(v)
    assert angle(v, w) == 0.0


def test_angle_rejects_non_unit():
    with pytest.raises(ValueError):
        angle(np.array([2.0, 0.0]), np.array([1.0, 0.0]))


def test_angle_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        angle(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))


def test_direction_set_dedups_near_duplicates():
    base = np.array([1.0, 0.0, 0.0])
    wiggle = np.array([1.0, 1e-10, 0.0])
    wiggle = wiggle / np.linalg.norm(wiggle)
    ds = DirectionSet.from_vectors(np.array([base, wiggle, [0.0, 1.0, 0.0]]))
    assert len(ds) == 2


def test_direction_set_keeps_first_occurrence():
    u = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    ds = DirectionSet.from_vectors(u)
    np.testing.assert_array_equal(ds.directions[0], [0.0, 1.0])
    assert len(ds) == 2


def test_direction_set_renormalizes_within_slack():
    ds = DirectionSet.from_vectors(np.array([[1.0 + 1e-10, 0.0]]))
    assert np.linalg.norm(ds.directions[0]) == pytest.approx(1.0, abs=1e-15)
    # a looser tolerance admits sloppier input, still renormalized
    loose = DirectionSet(dim=2, directions=np.array([[1.0 + 1e-7, 0.0]]), tolerance=1e-6)
    assert np.linalg.norm(loose.directions[0]) == pytest.approx(1.0, abs=1e-15)


def test_direction_set_rejects_far_from_unit():
    with pytest.raises(ValueError):
        DirectionSet.from_vectors(np.array([[0.5, 0.0]]))
    with pytest.raises(ValueError):
        DirectionSet.from_vectors(np.array([[1.0 + 1e-7, 0.0]]))


def test_direction_set_rejects_bad_shape():
    with pytest.raises(ValueError):
        DirectionSet(dim=2, directions=np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        DirectionSet(dim=3, directions=np.eye(2))


def test_direction_set_is_read_only():
    ds = DirectionSet.from_vectors(np.eye(2))
    with pytest.raises(ValueError):
        ds.directions[0, 0] = 5.0


def test_json_roundtrip_is_exact():
    ds = DirectionSet.from_vectors(np.array([[1.0, 0.0], [0.0, -1.0]]))
    payload = json.loads(json.dumps(ds.to_json()))
    back = DirectionSet.from_json(payload)
    assert back.dim == ds.dim
    np.testing.assert_array_equal(back.directions, ds.directions)


def test_min_angle_to_set_basic():
    ds = DirectionSet.from_vectors(np.eye(3))
    v = np.array([0.0, 0.0, -1.0])
    assert min_angle_to_set(v, ds) == pytest.approx(math.pi / 2)
    assert angles_to_set(v, ds.directions).shape == (3,)


def test_theta_neighborhood_is_strict():
    ds = DirectionSet.from_vectors(np.array([[1.0, 0.0]]))
    v = np.array([0.0, 1.0])
    assert not theta_neighborhood_contains(v, ds, math.pi / 2)
    assert theta_neighborhood_contains(v, ds, math.pi / 2 + 1e-6)


def _random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 5), m=st.integers(1, 6))
def test_transformed_preserves_pairwise_angles(seed: int, n: int, m: int):
    """Orthogonal transforms leave the angle structure untouched."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((m, n))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    ds = DirectionSet.from_vectors(raw)
    q = _random_rotation(rng, n)
    moved = ds.transformed(q)
    assert len(moved) == len(ds)
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            before = angle(ds.directions[i], ds.directions[j])
            after = angle(moved.directions[i], moved.directions[j])
            assert after == pytest.approx(before, abs=1e-9)


def test_transformed_rejects_non_orthogonal():
    ds = DirectionSet.from_vectors(np.eye(2))
    with pytest.raises(ValueError):
        ds.transformed(np.array([[1.0, 1.0], [0.0, 1.0]]))
