"""Criticality, polar-region classification, and the sub-index.

The LP route is cross-examined against a sampling oracle throughout; the two
must only be allowed to part ways inside the sampling resolution band.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subindex.convexity import (
    PolarVariant,
    classification_report,
    classify_polar_region,
    criticality_margin,
    is_critical,
    sampling_oracle_classify,
    sub_index,
)
from subindex.directions import DirectionSet
from subindex.errors import AmbiguousClassificationError, NotCriticalError
from subindex.sampling import covering_bound


def _dirs(vectors) -> DirectionSet:
    arr = np.asarray(vectors, dtype=float)
    return DirectionSet.from_vectors(arr / np.linalg.norm(arr, axis=1, keepdims=True))


def test_single_direction_is_regular():
    ds = _dirs([[1.0, 0.0, 0.0]])
    assert not is_critical(ds)
    assert criticality_margin(ds) > 0.9


def test_antipodal_pair_r3_is_great_subsphere():
    ds = _dirs([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    assert is_critical(ds)
    region = classify_polar_region(ds)
    assert region.variant is PolarVariant.GREAT_SUBSPHERE
    assert region.span_dim == 2
    assert sub_index(ds) == 1


def test_antipodal_pair_plus_orthogonal_has_boundary():
    ds = _dirs([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    region = classify_polar_region(ds)
    assert region.variant is PolarVariant.WITH_BOUNDARY
    np.testing.assert_allclose(region.soul, [0.0, -1.0, 0.0], atol=1e-9)
    assert sub_index(ds) == math.inf


def test_soul_makes_right_or_obtuse_angles():
    ds = _dirs([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    region = classify_polar_region(ds)
    assert np.linalg.norm(region.soul) == pytest.approx(1.0, abs=1e-12)
    assert np.all(ds.directions @ region.soul <= 1e-9)


def test_four_diagonals_fill_the_plane():
    ds = _dirs([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    region = classify_polar_region(ds)
    assert region.variant is PolarVariant.EMPTY
    assert sub_index(ds) == 2


def test_dimension_one_antipodal_pair():
    # S^0 has no room for a great subsphere; the polar region is empty
    ds = _dirs([[1.0], [-1.0]])
    assert is_critical(ds)
    region = classify_polar_region(ds)
    assert region.variant is PolarVariant.EMPTY
    assert sub_index(ds) == 1


def test_dimension_one_single_direction_regular():
    ds = _dirs([[1.0]])
    assert not is_critical(ds)


def test_classify_regular_raises():
    with pytest.raises(NotCriticalError):
        classify_polar_region(_dirs([[1.0, 0.0]]))


def test_near_critical_band_raises_ambiguous():
    # hull of the two directions passes within ~5e-9 of the origin: inside
    # the declared (1e-9, 1e-7) band where neither verdict is trustworthy
    tilt = 1e-8
    second = np.array([-1.0, tilt]) / math.hypot(1.0, tilt)
    ds = DirectionSet.from_vectors(np.array([[1.0, 0.0], second]))
    with pytest.raises(AmbiguousClassificationError) as err:
        is_critical(ds)
    assert 1e-9 < err.value.margin < 1e-7


def test_classification_report_regular_fields():
    report = classification_report(_dirs([[1.0, 0.0]]))
    assert report == {
        "critical": False,
        "variant": None,
        "span_dim": None,
        "soul": None,
        "sub_index": None,
    }


def test_classification_report_serializes_infinity():
    report = classification_report(_dirs([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    assert report["sub_index"] == "inf"
    assert report["variant"] == "with_boundary"


def test_sampling_oracle_on_known_sets():
    critical, near = sampling_oracle_classify(_dirs([[1.0, 0.0], [-1.0, 0.0]]))
    assert critical
    regular, _ = sampling_oracle_classify(_dirs([[1.0, 0.0]]))
    assert not regular
    # the near-polar samples of the antipodal pair hug the orthogonal axis
    assert near.shape[0] > 0
    assert np.all(np.abs(near[:, 0]) < math.sin(1e-2) + 1e-12)


def _random_direction_set(rng: np.random.Generator, n: int, m: int) -> DirectionSet:
    if n == 1:
        raw = rng.choice([-1.0, 1.0], size=(m, 1))
    else:
        raw = rng.standard_normal((m, n))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return DirectionSet.from_vectors(raw)


@settings(deadline=None, max_examples=120)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 3), m=st.integers(1, 8))
def test_lp_agrees_with_sampling_oracle(seed: int, n: int, m: int):
    """LP criticality and the spherical scan only disagree inside the band.

    The scan can miss a separating direction whose witness margin is below
    its resolution, so LP-regular versus oracle-critical is excused exactly
    when the separation is that small; nothing else is.
    """
    rng = np.random.default_rng(seed)
    ds = _random_direction_set(rng, n, m)
    try:
        lp_says = is_critical(ds)
    except AmbiguousClassificationError:
        return
    oracle_says, _ = sampling_oracle_classify(ds, samples=4000, margin=1e-2, seed=1)
    if lp_says == oracle_says:
        return
    assert not lp_says and oracle_says, "oracle found a witness the LP ruled out"
    band = 1e-2 + covering_bound(n, 4000)
    assert math.asin(min(1.0, criticality_margin(ds))) <= band


@settings(deadline=None, max_examples=60)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 3), m=st.integers(2, 8))
def test_classification_is_isometry_invariant(seed: int, n: int, m: int):
    rng = np.random.default_rng(seed)
    ds = _random_direction_set(rng, n, m)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    moved = ds.transformed(q)
    try:
        before = classification_report(ds)
    except AmbiguousClassificationError:
        return
    try:
        after = classification_report(moved)
    except AmbiguousClassificationError:
        return
    assert before["critical"] == after["critical"]
    assert before["variant"] == after["variant"]
    assert before["span_dim"] == after["span_dim"]
    assert before["sub_index"] == after["sub_index"]


@settings(deadline=None, max_examples=60)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 3), m=st.integers(1, 6))
def test_adding_a_direction_shrinks_the_polar_samples(seed: int, n: int, m: int):
    """A(U + w) is contained in A(U): more constraints, fewer polar points."""
    rng = np.random.default_rng(seed)
    ds = _random_direction_set(rng, n, m)
    extra = rng.standard_normal(n)
    extra /= np.linalg.norm(extra)
    bigger = DirectionSet.from_vectors(np.vstack([ds.directions, extra]))
    _, near_small = sampling_oracle_classify(bigger, samples=3000, seed=2)
    _, near_big = sampling_oracle_classify(ds, samples=3000, seed=2)
    # every sampled near-polar point of the larger set appears for the smaller
    small_rows = {tuple(np.round(row, 12)) for row in near_small}
    big_rows = {tuple(np.round(row, 12)) for row in near_big}
    assert small_rows <= big_rows


def test_soul_vector_is_unit_and_polar_under_rotation():
    rng = np.random.default_rng(11)
    base = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    for _ in range(10):
        q, r = np.linalg.qr(rng.standard_normal((3, 3)))
        q = q * np.sign(np.diag(r))
        ds = DirectionSet.from_vectors(base @ q.T)
        region = classify_polar_region(ds)
        assert region.variant is PolarVariant.WITH_BOUNDARY
        assert np.linalg.norm(region.soul) == pytest.approx(1.0, abs=1e-12)
        assert np.all(ds.directions @ region.soul <= 1e-9)
