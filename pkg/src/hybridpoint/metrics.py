"""Evaluation metrics: repeatability, mean matching score, and the
benchmark report container.

Repeatability is symmetric: points of each set are transferred into the
other view, points leaving the shared view are dropped, and the score is
(matched A + matched B) / (kept A + kept B) at threshold eps.
A proposed match (a, b) is correct when the forward-mapped a lands
within eps of b; the mean matching score is correct / proposed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .homography import Homography, HybridMap, hybrid_forward_many, hybrid_inverse_many
from .keypoints import KeypointSet, MatchSet

REPEATABILITY_FORMULA = (
    "symmetric two-way count: (|A within eps of B| + |B within eps of A|) / (kept|A| + kept|B|)"
)


def _resolve_transform(transform, dims_a, dims_b):
    """Return (fwd, inv, dims_a, dims_b) point maps for a transform."""
    if isinstance(transform, HybridMap):
        fwd = lambda xy: hybrid_forward_many(transform, xy)  # noqa: E731
        inv = lambda xy: hybrid_inverse_many(transform, xy)  # noqa: E731
        if dims_a is None:
            dims_a = (transform.fisheye.width, transform.fisheye.height)
        if dims_b is None:
            dims_b = (transform.pinhole.width, transform.pinhole.height)
        return fwd, inv, dims_a, dims_b
    hom = transform if isinstance(transform, Homography) else Homography(np.asarray(transform))
    hinv = hom.inverse()
    return hom.apply_points, hinv.apply_points, dims_a, dims_b


def _inside(xy, dims):
    if dims is None:
        return np.ones(xy.shape[0], dtype=bool)
    w, h = dims
    return (xy[:, 0] >= 0.0) & (xy[:, 0] < w) & (xy[:, 1] >= 0.0) & (xy[:, 1] < h)


def _count_within(src: np.ndarray, dst: np.ndarray, eps: float) -> int:
    if src.shape[0] == 0 or dst.shape[0] == 0:
        return 0
    d = np.linalg.norm(src[:, None, :] - dst[None, :, :], axis=-1)
    return int(np.sum(d.min(axis=1) <= eps))


def repeatability(
    kps_a: KeypointSet,
    kps_b: KeypointSet,
    transform,
    eps: float,
    dims_a=None,
    dims_b=None,
) -> float:
    """Fraction of points with a counterpart within eps after transfer.

    `transform` maps A's frame onto B's (a HybridMap, Homography or 3x3
    array); `dims_*` give (w, h) of each frame when the transform does
    not carry them. Empty input yields 0.
    """
    if len(kps_a) == 0 or len(kps_b) == 0:
        return 0.0
    fwd, inv, dims_a, dims_b = _resolve_transform(transform, dims_a, dims_b)
    a2b, va = fwd(kps_a.xy)
    keep_a = va & _inside(a2b, dims_b)
    b2a, vb = inv(kps_b.xy)
    keep_b = vb & _inside(b2a, dims_a)
    n_kept = int(keep_a.sum() + keep_b.sum())
    if n_kept == 0:
        return 0.0
    matched_a = _count_within(a2b[keep_a], kps_b.xy[keep_b], eps)
    matched_b = _count_within(b2a[keep_b], kps_a.xy[keep_a], eps)
    return (matched_a + matched_b) / n_kept


def mean_matching_score(
    matches: MatchSet,
    kps_a: KeypointSet,
    kps_b: KeypointSet,
    transform,
    eps: float,
) -> float:
    """Fraction of proposed matches that are geometrically correct."""
    if len(matches) == 0:
        return 0.0
    fwd, _, _, _ = _resolve_transform(transform, None, None)
    mapped, valid = fwd(kps_a.xy[matches.idx_a])
    target = kps_b.xy[matches.idx_b]
    dist = np.linalg.norm(mapped - target, axis=1)
    correct = valid & (dist <= eps)
    return float(correct.sum() / len(matches))


@dataclass(frozen=True)
class EvalConfig:
    epsilons: tuple = (3.0, 5.0)
    resize_to: tuple = (320, 320)
    top_k_perspective: int = 300
    top_k_fisheye: int = 1000
    seed: int = 0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0.0 for e in eps) or list(eps) != sorted(eps):
            raise ValueError("epsilons must be positive and sorted ascending")
        object.__setattr__(self, "epsilons", eps)
        w, h = self.resize_to
        if w % 8 or h % 8:
            raise ValueError("resize_to must be divisible by the 8-px cell size")
        object.__setattr__(self, "resize_to", (int(w), int(h)))

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "resize_to": list(self.resize_to),
            "top_k_perspective": self.top_k_perspective,
            "top_k_fisheye": self.top_k_fisheye,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MetricsReport:
    repeatability: dict
    matching_score: dict
    avg_matches: float
    pair_count: int
    config: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for scores in (self.repeatability, self.matching_score):
            for v in scores.values():
                if not (0.0 <= v <= 1.0):
                    raise ValueError("scores must lie in [0, 1]")
        if self.avg_matches < 0.0:
            raise ValueError("avg_matches must be non-negative")

    def to_dict(self) -> dict:
        return {
            "repeatability": {f"{k:g}": v for k, v in sorted(self.repeatability.items())},
            "mean_matching_score": {f"{k:g}": v for k, v in sorted(self.matching_score.items())},
            "average_matches": self.avg_matches,
            "pair_count": self.pair_count,
            "config": self.config,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            repeatability={float(k): v for k, v in d["repeatability"].items()},
            matching_score={float(k): v for k, v in d["mean_matching_score"].items()},
            avg_matches=d["average_matches"],
            pair_count=d["pair_count"],
            config=d.get("config", {}),
            metadata=d.get("metadata", {}),
        )

    def render_table(self) -> str:
        eps = sorted(self.matching_score)
        header_mms = " | ".join(f"MMS e={e:g}" for e in eps)
        header_rep = " | ".join(f"Rep e={e:g}" for e in eps)
        header = f"{header_mms} | Avg matches | {header_rep}"
        cells = [f"{self.matching_score[e]:9.3f}" for e in eps]
        cells.append(f"{self.avg_matches:11.2f}")
        cells += [f"{self.repeatability[e]:9.3f}" for e in eps]
        row = " | ".join(cells)
        rule = "-" * max(len(header), len(row))
        return "\n".join([header, rule, row])
