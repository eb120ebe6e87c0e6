"""Planar human-arm model: kinematics, regressed configurations, collision.

The arm is anchored below the table front edge and modeled as neck-shoulder,
upper-arm and forearm links in the table plane. Two angles describe a
configuration: the shoulder angle (upper arm vs. the neck-shoulder link,
which points along +x) and the elbow angle (forearm vs. upper arm,
counter-clockwise, no hyperextension). Expected collision of a motion is the
summed sampled overlap between the swept upper-arm/forearm quadrilaterals
and the occupied rects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ArityError, JointLimitError
from .features import ArmFeatures, NormalizationContext, arm_features
from .geometry import LineSeg, Point2, Rect, swept_chain_overlap, swept_segment_overlap
from .scene import quantize_direction

if TYPE_CHECKING:  # pragma: no cover
    from .learners import KernelRidgeRegressor

SHOULDER_LIMITS = (-math.pi / 2.0, math.pi / 2.0)
ELBOW_LIMITS = (0.0, math.pi)

DEFAULT_NECK_SHOULDER = 0.18
DEFAULT_UPPER_ARM = 0.30
DEFAULT_FOREARM = 0.28
DEFAULT_NECK_SETBACK = 0.12  # anchor distance below the table front edge


@dataclass(frozen=True)
class ArmConfig:
    theta_sh: float
    theta_el: float

    def within_limits(self, eps: float = 1e-9) -> bool:
        return (SHOULDER_LIMITS[0] - eps <= self.theta_sh <= SHOULDER_LIMITS[1] + eps
                and ELBOW_LIMITS[0] - eps <= self.theta_el <= ELBOW_LIMITS[1] + eps)

    def clamped(self) -> tuple["ArmConfig", bool]:
        sh = min(max(self.theta_sh, SHOULDER_LIMITS[0]), SHOULDER_LIMITS[1])
        el = min(max(self.theta_el, ELBOW_LIMITS[0]), ELBOW_LIMITS[1])
        return ArmConfig(sh, el), (sh != self.theta_sh or el != self.theta_el)


@dataclass(frozen=True)
class ArmModel:
    neck: Point2
    neck_shoulder: float = DEFAULT_NECK_SHOULDER
    upper_arm: float = DEFAULT_UPPER_ARM
    forearm: float = DEFAULT_FOREARM

    def __post_init__(self):
        if min(self.neck_shoulder, self.upper_arm, self.forearm) <= 0:
            raise ValueError("arm link lengths must be positive")

    @property
    def reach(self) -> float:
        return self.upper_arm + self.forearm

    @property
    def shoulder(self) -> Point2:
        return Point2(self.neck.x + self.neck_shoulder, self.neck.y)

    @staticmethod
    def for_start(start: Point2, setback: float = DEFAULT_NECK_SETBACK, **lengths) -> "ArmModel":
        """Anchor at the start position's table-edge projection, set back below the edge."""
        return ArmModel(Point2(start.x, -setback), **lengths)


@dataclass(frozen=True)
class ArmPose:
    shoulder: Point2
    elbow: Point2
    hand: Point2


def forward_kinematics(model: ArmModel, config: ArmConfig) -> ArmPose:
    """Joint positions by chained planar rotations; raises outside joint limits."""
    if not config.within_limits():
        raise JointLimitError(
            f"configuration ({config.theta_sh:.3f}, {config.theta_el:.3f}) outside joint limits")
    s = model.shoulder
    upper = config.theta_sh
    elbow = Point2(s.x + model.upper_arm * math.cos(upper),
                   s.y + model.upper_arm * math.sin(upper))
    fore = config.theta_sh + config.theta_el
    hand = Point2(elbow.x + model.forearm * math.cos(fore),
                  elbow.y + model.forearm * math.sin(fore))
    return ArmPose(s, elbow, hand)


def inverse_kinematics(model: ArmModel, hand: Point2) -> tuple[ArmConfig, bool]:
    """Two-link planar IK with the counter-clockwise elbow branch.

    Out-of-reach targets and out-of-limit shoulder angles are clamped; the
    returned flag reports whether any clamping happened.
    """
    s = model.shoulder
    px, py = hand.x - s.x, hand.y - s.y
    r = math.hypot(px, py)
    l1, l2 = model.upper_arm, model.forearm
    eps = 1e-9
    clamped = False
    r_min, r_max = abs(l1 - l2) + eps, l1 + l2 - eps
    if r < r_min or r > r_max:
        clamped = True
        r = min(max(r, r_min), r_max)
    cos_el = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    cos_el = min(1.0, max(-1.0, cos_el))
    theta_el = math.acos(cos_el)
    if r == 0.0:
        phi = 0.0
    else:
        phi = math.atan2(py, px) - math.atan2(l2 * math.sin(theta_el), l1 + l2 * cos_el)
    config, limit_clamped = ArmConfig(phi, theta_el).clamped()
    return config, clamped or limit_clamped


def estimate_configuration(regressor: "KernelRidgeRegressor",
                           features: ArmFeatures) -> tuple[ArmConfig, bool]:
    """Regress the configuration at a keypoint; clamp to joint limits.

    Returns (config, clamped) so callers can count clamping events.
    """
    vec = np.asarray(features.vector(), dtype=float)
    if vec.shape != (12,):
        raise ArityError(f"arm feature vector must have 12 components, got {vec.shape}")
    pred = regressor.predict(vec[None, :])[0]
    return ArmConfig(float(pred[0]), float(pred[1])).clamped()


def link_collision(link_start: LineSeg, link_end: LineSeg, occupied: Sequence[Rect],
                   n_lines: int = 64) -> float:
    """Sampled overlap between one link's swept quadrilateral and occupied rects."""
    return swept_segment_overlap(link_start, link_end, occupied, n_lines)


def sweep_collision(pose_a: ArmPose, pose_b: ArmPose, occupied: Sequence[Rect],
                    n_lines: int = 64) -> float:
    """Collision of the upper-arm and forearm links moving between two poses."""
    return swept_chain_overlap([pose_a.shoulder, pose_a.elbow, pose_a.hand],
                               [pose_b.shoulder, pose_b.elbow, pose_b.hand],
                               occupied, n_lines)


@dataclass
class PathCollision:
    total: float
    per_segment: list[float]
    configs: list[ArmConfig]
    poses: list[ArmPose]
    clamp_events: int


def path_collision_detail(model: ArmModel, regressor: "KernelRidgeRegressor",
                          keypoints: Sequence[Point2], occupied: Sequence[Rect],
                          n_lines: int = 64, ctx=None,
                          start_config: ArmConfig | None = None) -> PathCollision:
    """Expected full-arm collision along an ordered keypoint path.

    Configurations are estimated sequentially with the regressor (the first
    keypoint's configuration comes from IK unless given); each consecutive
    keypoint pair contributes the swept collision of both links.
    """
    if len(keypoints) < 2:
        raise ValueError("path needs at least 2 keypoints")
    if ctx is None:
        ctx = NormalizationContext(table_diag=1.0, table_area=1.0, n_objects=1,
                                   arm_reach=model.reach)
    clamp_events = 0
    if start_config is None:
        start_config, clamped = inverse_kinematics(model, keypoints[0])
        clamp_events += int(clamped)
    configs = [start_config]
    for prev, nxt in zip(keypoints[:-1], keypoints[1:]):
        dx, dy = nxt.x - prev.x, nxt.y - prev.y
        h_d = quantize_direction(dx, dy)
        feats = arm_features(h_d, configs[-1], prev, nxt, ctx)
        config, clamped = estimate_configuration(regressor, feats)
        clamp_events += int(clamped)
        configs.append(config)
    poses = [forward_kinematics(model, c) for c in configs]
    per_segment = [sweep_collision(pa, pb, occupied, n_lines)
                   for pa, pb in zip(poses[:-1], poses[1:])]
    return PathCollision(sum(per_segment), per_segment, configs, poses, clamp_events)


def path_collision(model: ArmModel, regressor: "KernelRidgeRegressor",
                   keypoints: Sequence[Point2], occupied: Sequence[Rect],
                   n_lines: int = 64, ctx=None,
                   start_config: ArmConfig | None = None) -> float:
    """Total expected path collision (see path_collision_detail)."""
    return path_collision_detail(model, regressor, keypoints, occupied,
                                 n_lines, ctx, start_config).total
