"""Normalized feature vectors for the decision models.

Normalization contract: distances and lengths are divided by the table
diagonal, areas by the table area (or by the summed block areas for
free-space fractions), angles by pi, and keypoint deltas by the arm reach.
Angles are measured from the +y axis of the canonical frame except the
segment orientation, which is taken relative to the start-target line.

The segment target-overlap term is the overlap of the segment endpoints'
x-span with the target's x-extent (the corridor-polygon reading was
considered and rejected as underdetermined).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import RowOrderError
from .geometry import Point2, dist, orientation, overlap_1d, swept_chain_overlap, wrap_angle
from .scene import (
    DIRECTIONS,
    DirectionBlocks,
    Gap,
    RowElement,
    Scene,
    SceneObject,
    collision_space,
    direction_blocks,
)

if TYPE_CHECKING:  # pragma: no cover
    from .arm import ArmConfig, ArmPose

GAP_ARITY = 5
OBJECT_ARITY = 7
DIRECTION_ARITY = 17
SEGMENT_ARITY = 5
ARM_ARITY = 12


@dataclass(frozen=True)
class NormalizationContext:
    """Scene-level scales the feature vectors are normalized by."""

    table_diag: float
    table_area: float
    n_objects: int
    arm_reach: float

    def __post_init__(self):
        if min(self.table_diag, self.table_area, self.arm_reach) <= 0 or self.n_objects < 1:
            raise ValueError("normalization factors must be strictly positive")

    @staticmethod
    def for_scene(scene: Scene, arm_reach: float) -> "NormalizationContext":
        return NormalizationContext(
            table_diag=scene.table.diagonal,
            table_area=scene.table.area,
            n_objects=max(1, len(scene.objects)),
            arm_reach=arm_reach,
        )


def direction_one_hot(direction: str) -> list[float]:
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    return [1.0 if d == direction else 0.0 for d in DIRECTIONS]


@dataclass(frozen=True)
class GapFeatures:
    d_gs: float
    d_gt: float
    l_g: float
    theta_gs: float
    theta_gt: float

    ARITY = GAP_ARITY

    def vector(self) -> np.ndarray:
        return np.array([self.d_gs, self.d_gt, self.l_g, self.theta_gs, self.theta_gt])


@dataclass(frozen=True)
class ObjectFeatures:
    d_os: float
    d_ot: float
    l_o: float
    theta_os: float
    theta_ot: float
    l_ot: float
    a_ofs: float

    ARITY = OBJECT_ARITY

    def vector(self) -> np.ndarray:
        return np.array([self.d_os, self.d_ot, self.l_o, self.theta_os, self.theta_ot,
                         self.l_ot, self.a_ofs])


@dataclass(frozen=True)
class DirectionFeatures:
    h_d: tuple[float, ...]  # one-hot, canonical direction order
    theta_ot: float
    a_fs: tuple[float, ...]  # free fraction per direction, canonical order

    ARITY = DIRECTION_ARITY

    def __post_init__(self):
        if len(self.h_d) != 8 or len(self.a_fs) != 8:
            raise ValueError("direction features need 8 one-hot and 8 free-fraction entries")

    def vector(self) -> np.ndarray:
        return np.array(list(self.h_d) + [self.theta_ot] + list(self.a_fs))


@dataclass(frozen=True)
class SegmentFeatures:
    dx: float
    dy: float
    l_ct: float
    theta_c: float
    c_zeta: float

    ARITY = SEGMENT_ARITY

    def vector(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.l_ct, self.theta_c, self.c_zeta])


@dataclass(frozen=True)
class ArmFeatures:
    h_d: tuple[float, ...]
    theta_sh_prev: float
    theta_el_prev: float
    dx: float
    dy: float

    ARITY = ARM_ARITY

    def __post_init__(self):
        if len(self.h_d) != 8:
            raise ValueError("arm features need an 8-entry one-hot")

    def vector(self) -> np.ndarray:
        return np.array(list(self.h_d) + [self.theta_sh_prev, self.theta_el_prev,
                                          self.dx, self.dy])


def gap_features(gap: Gap, scene: Scene, ctx: NormalizationContext) -> GapFeatures:
    """Distances to start/target, gap diagonal, and the two orientations."""
    target = scene.target.position
    return GapFeatures(
        d_gs=dist(gap.center, scene.start) / ctx.table_diag,
        d_gt=dist(gap.center, target) / ctx.table_diag,
        l_g=gap.diagonal / ctx.table_diag,
        theta_gs=_safe_orientation(scene.start, gap.center) / np.pi,
        theta_gt=_safe_orientation(gap.center, target) / np.pi,
    )


def _safe_orientation(frm: Point2, to: Point2) -> float:
    """Orientation that treats coincident points as straight ahead."""
    if frm.x == to.x and frm.y == to.y:
        return 0.0
    return orientation(frm, to)


def object_features(obj: SceneObject, scene: Scene, ctx: NormalizationContext,
                    alpha: float = 1.0, blocks: DirectionBlocks | None = None,
                    n_lines: int = 64) -> ObjectFeatures:
    """Object analogue of the gap features plus target overlap and free space."""
    if blocks is None:
        blocks = direction_blocks(obj, scene, alpha, n_lines)
    target = scene.target
    fp = obj.footprint
    l_ot = overlap_1d(fp.x_lo, fp.x_hi, target.footprint.x_lo, target.footprint.x_hi)
    return ObjectFeatures(
        d_os=dist(obj.position, scene.start) / ctx.table_diag,
        d_ot=dist(obj.position, target.position) / ctx.table_diag,
        l_o=fp.diagonal / ctx.table_diag,
        theta_os=_safe_orientation(scene.start, obj.position) / np.pi,
        theta_ot=_safe_orientation(obj.position, target.position) / np.pi,
        l_ot=l_ot / target.footprint.width,
        a_ofs=blocks.total_free_area / blocks.total_block_area,
    )


def direction_features(obj: SceneObject, approach_dir: str, scene: Scene,
                       ctx: NormalizationContext, alpha: float = 1.0,
                       blocks: DirectionBlocks | None = None,
                       n_lines: int = 64) -> DirectionFeatures:
    """Approach direction, target orientation, and per-direction free fractions."""
    if blocks is None:
        blocks = direction_blocks(obj, scene, alpha, n_lines)
    return DirectionFeatures(
        h_d=tuple(direction_one_hot(approach_dir)),
        theta_ot=_safe_orientation(obj.position, scene.target.position) / np.pi,
        a_fs=tuple(blocks.free_fractions()),
    )


def segment_features(e1: RowElement, e2: RowElement, scene: Scene,
                     ctx: NormalizationContext,
                     arm_poses: "tuple[ArmPose, ArmPose] | None" = None,
                     n_lines: int = 64) -> SegmentFeatures:
    """Features of the connecting segment between elements of consecutive rows.

    The expected-collision term needs the arm poses at the two endpoints;
    without them it is 0 (used only by tests that probe the geometry terms).
    """
    if e2.row_index != e1.row_index + 1:
        raise RowOrderError(
            f"segment endpoints must be in consecutive rows, got {e1.row_index} -> {e2.row_index}")
    target = scene.target
    span_lo = min(e1.position.x, e2.position.x)
    span_hi = max(e1.position.x, e2.position.x)
    l_ct = overlap_1d(span_lo, span_hi, target.footprint.x_lo, target.footprint.x_hi)
    theta_line = _safe_orientation(scene.start, target.position)
    theta_seg = _safe_orientation(e1.position, e2.position)
    c_zeta = 0.0
    if arm_poses is not None:
        pose_a, pose_b = arm_poses
        area = swept_chain_overlap([pose_a.shoulder, pose_a.elbow, pose_a.hand],
                                   [pose_b.shoulder, pose_b.elbow, pose_b.hand],
                                   collision_space(scene), n_lines)
        c_zeta = area / ctx.table_area
    return SegmentFeatures(
        dx=(e2.position.x - e1.position.x) / ctx.table_diag,
        dy=(e2.position.y - e1.position.y) / ctx.table_diag,
        l_ct=l_ct / target.footprint.width,
        theta_c=wrap_angle(theta_seg - theta_line) / np.pi,
        c_zeta=c_zeta,
    )


def arm_features(approach_dir: str, prev_config: "ArmConfig", k_prev: Point2,
                 k_next: Point2, ctx: NormalizationContext) -> ArmFeatures:
    """Inputs to the configuration regressor for the step k_prev -> k_next."""
    return ArmFeatures(
        h_d=tuple(direction_one_hot(approach_dir)),
        theta_sh_prev=prev_config.theta_sh,
        theta_el_prev=prev_config.theta_el,
        dx=(k_next.x - k_prev.x) / ctx.arm_reach,
        dy=(k_next.y - k_prev.y) / ctx.arm_reach,
    )
