"""Keypoint and match containers shared across detection, description and
evaluation.

Keypoint coordinates are continuous and corner-origin, so the center of
pixel index (ix, iy) is (ix + 0.5, iy + 0.5).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class KeypointSet:
    xy: np.ndarray  # (n, 2) float64
    scores: np.ndarray  # (n,) float64 in [0, 1]

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=np.float64).reshape(-1, 2)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if xy.shape[0] != scores.shape[0]:
            raise ValueError("xy and scores must have matching lengths")
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.xy.shape[0]

    @classmethod
    def empty(cls) -> "KeypointSet":
        return cls(np.zeros((0, 2)), np.zeros(0))

    @classmethod
    def from_points(cls, points, scores=None) -> "KeypointSet":
        xy = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if scores is None:
            scores = np.ones(xy.shape[0])
        return cls(xy, scores)

    def in_bounds(self, w: int, h: int) -> np.ndarray:
        return (
            (self.xy[:, 0] >= 0.0)
            & (self.xy[:, 0] < w)
            & (self.xy[:, 1] >= 0.0)
            & (self.xy[:, 1] < h)
        )

    def select(self, mask_or_idx) -> "KeypointSet":
        return KeypointSet(self.xy[mask_or_idx], self.scores[mask_or_idx])

    def top_k(self, k: int) -> "KeypointSet":
        if len(self) <= k:
            return self
        order = np.argsort(-self.scores, kind="stable")[:k]
        return self.select(np.sort(order))

    def to_dict(self) -> dict:
        return {"points": self.xy.tolist(), "scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KeypointSet":
        pts = np.asarray(d["points"], dtype=np.float64).reshape(-1, 2)
        scores = d.get("scores")
        return cls.from_points(pts, None if scores is None else np.asarray(scores))


def save_keypoints(path, kps: KeypointSet) -> None:
    Path(path).write_text(json.dumps(kps.to_dict(), sort_keys=True), encoding="utf-8")


def load_keypoints(path) -> KeypointSet:
    return KeypointSet.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True, eq=False)
class MatchSet:
    """Proposed correspondences; each index_a appears at most once."""

    idx_a: np.ndarray
    idx_b: np.ndarray
    similarity: np.ndarray

    def __post_init__(self):
        ia = np.asarray(self.idx_a, dtype=np.int64).reshape(-1)
        ib = np.asarray(self.idx_b, dtype=np.int64).reshape(-1)
        sim = np.asarray(self.similarity, dtype=np.float64).reshape(-1)
        if not (ia.shape == ib.shape == sim.shape):
            raise ValueError("match arrays must have matching lengths")
        if ia.size and np.unique(ia).size != ia.size:
            raise ValueError("each index_a may appear only once")
        object.__setattr__(self, "idx_a", ia)
        object.__setattr__(self, "idx_b", ib)
        object.__setattr__(self, "similarity", sim)

    def __len__(self) -> int:
        return self.idx_a.shape[0]

    @classmethod
    def empty(cls) -> "MatchSet":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))
