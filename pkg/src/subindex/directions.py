"""Finite sets of unit directions and angle utilities on the sphere."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

# Two directions closer than this angle are treated as the same direction.
DEDUP_ANGLE = 1e-8

# How far a vector handed to angle() may be from unit length.
UNIT_SLACK = 1e-6


def _check_unit(v: np.ndarray, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise ValueError(f"{name} is numerically zero")
    if abs(norm - 1.0) > UNIT_SLACK:
        raise ValueError(f"{name} is not unit length (|v| = {norm})")
    return v


def angle(v, w) -> float:
    """Angle in [0, pi] between two unit vectors.

    The dot product is clamped to [-1, 1] before arccos so that roundoff
    never produces a NaN at nearly parallel or antipodal inputs.
    """
    v = _check_unit(v, "v")
    w = _check_unit(w, "w")
    if v.shape != w.shape:
        raise ValueError("v and w have different dimensions")
    return float(np.arccos(np.clip(np.dot(v, w), -1.0, 1.0)))


def angles_to_set(v, directions: np.ndarray) -> np.ndarray:
    """Angles from one unit vector to each row of a direction array."""
    v = _check_unit(v, "v")
    dots = np.clip(np.asarray(directions, dtype=float) @ v, -1.0, 1.0)
    return np.arccos(dots)


def min_angle_to_set(v, dirset) -> float:
    """Smallest angle from v to a nonempty direction set."""
    directions = dirset.directions if isinstance(dirset, DirectionSet) else np.asarray(dirset, float)
    if directions.size == 0:
        raise ValueError("direction set is empty")
    return float(angles_to_set(v, directions).min())


def theta_neighborhood_contains(v, dirset, theta: float) -> bool:
    """Whether v lies strictly within angle theta of the set."""
    if not 0.0 < theta <= np.pi:
        raise ValueError(f"theta must lie in (0, pi], got {theta}")
    return min_angle_to_set(v, dirset) < theta


@dataclass(frozen=True)
class DirectionSet:
    """A nonempty finite set of unit vectors in R^dim.

    Rows of ``directions`` are the unit vectors; near-duplicates (angle below
    ``DEDUP_ANGLE``) are removed on construction, keeping first occurrences.
    ``tolerance`` is the accepted slack on unit length of the input rows.
    """

    dim: int
    directions: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        arr = np.asarray(self.directions, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("directions must be a nonempty 2d array")
        if arr.shape[1] != self.dim:
            raise ValueError(
                f"directions have dimension {arr.shape[1]}, expected {self.dim}"
            )
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > max(self.tolerance, 1e-12)):
            worst = float(np.abs(norms - 1.0).max())
            raise ValueError(f"directions must be unit vectors (worst slack {worst:.3e})")
        # renormalize exactly, then deduplicate
        arr = arr / norms[:, None]
        keep = []
        for i in range(arr.shape[0]):
            dup = False
            for j in keep:
                c = float(np.clip(arr[i] @ arr[j], -1.0, 1.0))
                if np.arccos(c) < DEDUP_ANGLE:
                    dup = True
                    break
            if not dup:
                keep.append(i)
        arr = np.ascontiguousarray(arr[keep])
        arr.setflags(write=False)
        object.__setattr__(self, "directions", arr)

    def __len__(self) -> int:
        return self.directions.shape[0]

    def __iter__(self):
        return iter(self.directions)

    @classmethod
    def from_vectors(cls, vectors, tolerance: float = 1e-9) -> "DirectionSet":
        arr = np.asarray(vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        return cls(dim=arr.shape[1], directions=arr, tolerance=tolerance)

    def transformed(self, q: np.ndarray) -> "DirectionSet":
        """Apply an orthogonal matrix to every direction."""
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim, self.dim):
            raise ValueError("matrix shape does not match dimension")
        if not np.allclose(q @ q.T, np.eye(self.dim), atol=1e-10):
            raise ValueError("matrix is not orthogonal")
        return DirectionSet(self.dim, self.directions @ q.T, self.tolerance)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "directions": [[float(x) for x in row] for row in self.directions],
                "tol": self.tolerance,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DirectionSet":
        data = json.loads(text)
        try:
            dim = int(data["dim"])
            directions = data["directions"]
            tol = float(data.get("tol", 1e-9))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed direction-set JSON: {exc}") from exc
        return cls(dim=dim, directions=np.asarray(directions, dtype=float), tolerance=tol)
