"""Desk-scale synthetic scenes with analytically known properties.

Ground-truth tracks follow constant-velocity motion; detections are
derived from them by seed-deterministic corruption (dropout, Gaussian
noise, false positives, id switches) together with an exact corruption log
so downstream metrics can be verified against first principles.

Randomness comes from numpy's PCG64 generator, which has a published
algorithm and is stable across platforms for a fixed seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (Box3D, FrameRecord, ObjectClass, ObjectRecord,
                   SequenceRecord, TimingRecord)

_CLASS_DIMS = {
    ObjectClass.PEDESTRIAN: (0.6, 0.6, 1.8),
    ObjectClass.BIKE: (1.8, 0.6, 1.6),
    ObjectClass.CAR: (4.5, 1.9, 1.6),
    ObjectClass.TRUCK: (8.0, 2.5, 3.2),
}

# Keep injected false positives clearly off every ground-truth box.
FP_MAX_GT_IOU = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    n_frames: int
    objects_per_class: dict[ObjectClass, int]
    speed_m_per_frame: float = 1.0
    position_sigma_m: float = 0.0
    yaw_sigma_rad: float = 0.0
    dropout_prob: float = 0.0
    false_positive_rate: float = 0.0  # expected FPs injected per frame
    id_switch_prob: float = 0.0
    arena_half_extent_m: float = 60.0
    frame_interval_us: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects_per_class", {
            ObjectClass(k): int(v) for k, v in self.objects_per_class.items()})
        for name in ("dropout_prob", "id_switch_prob"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0,1]")
        for name in ("position_sigma_m", "yaw_sigma_rad", "false_positive_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")


@dataclass
class CorruptionLog:
    """Exact record of what corrupt_detections did, per frame."""

    dropped: dict[int, list[int]] = field(default_factory=dict)      # frame -> gt track ids
    perturbed: dict[int, list[int]] = field(default_factory=dict)    # frame -> gt track ids kept
    false_positives: dict[int, int] = field(default_factory=dict)    # frame -> count injected
    id_map: dict[int, dict[int, int]] = field(default_factory=dict)  # frame -> gt id -> pred id

    @property
    def kept_count(self) -> int:
        return sum(len(v) for v in self.perturbed.values())


def _track_states(cfg: ScenarioConfig, rng: np.random.Generator):
    """Initial pose and velocity per track, deterministic from the seed."""
    states = []
    track_id = 0
    for cls in ObjectClass:
        for _ in range(cfg.objects_per_class.get(cls, 0)):
            x0, y0 = rng.uniform(-cfg.arena_half_extent_m * 0.5,
                                 cfg.arena_half_extent_m * 0.5, size=2)
            heading = rng.uniform(-np.pi, np.pi)
            vx = cfg.speed_m_per_frame * np.cos(heading)
            vy = cfg.speed_m_per_frame * np.sin(heading)
            states.append((track_id, cls, float(x0), float(y0),
                           float(vx), float(vy), float(heading)))
            track_id += 1
    return states


def generate_scenario(cfg: ScenarioConfig) -> SequenceRecord:
    """Constant-velocity ground-truth tracks with stable ids."""
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    states = _track_states(cfg, rng)
    frames = []
    for t in range(cfg.n_frames):
        objects = []
        for track_id, cls, x0, y0, vx, vy, heading in states:
            l, w, h = _CLASS_DIMS[cls]
            box = Box3D(x0 + vx * t, y0 + vy * t, h / 2.0, l, w, h, heading)
            objects.append(ObjectRecord(cls=cls, box=box, track_id=track_id))
        frames.append(FrameRecord(frame_index=t,
                                  timestamp_us=t * cfg.frame_interval_us,
                                  objects=tuple(objects)))
    return SequenceRecord(sequence_id=f"synth-{cfg.seed}",
                          gt_frames=tuple(frames), pred_frames=())


def _sample_false_positive(rng: np.random.Generator, cfg: ScenarioConfig,
                           gt_objects) -> Box3D:
    from .geometry import iou_3d
    l, w, h = _CLASS_DIMS[ObjectClass.CAR]
    for _ in range(200):
        x, y = rng.uniform(-cfg.arena_half_extent_m, cfg.arena_half_extent_m,
                           size=2)
        yaw = rng.uniform(-np.pi, np.pi)
        box = Box3D(float(x), float(y), h / 2.0, l, w, h, float(yaw))
        if all(iou_3d(box, o.box) <= FP_MAX_GT_IOU for o in gt_objects):
            return box
    raise RuntimeError("could not place a false positive away from ground truth")


def corrupt_detections(gt: SequenceRecord, cfg: ScenarioConfig
                       ) -> tuple[SequenceRecord, CorruptionLog]:
    """Derive noisy predictions from ground truth, seed-deterministically.

    Applies dropout, Gaussian position/yaw noise, injected false positives
    and id switches, and returns the exact corruption log.
    """
    rng = np.random.default_rng(np.random.PCG64((cfg.seed << 16) ^ 0x5EED))
    log = CorruptionLog()
    pred_frames = []
    # Persistent relabeling so an id switch starts a new predicted identity.
    next_pred_id = 10_000
    current_map: dict[int, int] = {}
    for frame in gt.gt_frames:
        kept: list[ObjectRecord] = []
        dropped_ids: list[int] = []
        perturbed_ids: list[int] = []
        for obj in frame.objects:
            if rng.random() < cfg.dropout_prob:
                dropped_ids.append(obj.track_id)
                continue
            if obj.track_id not in current_map:
                current_map[obj.track_id] = obj.track_id
            elif rng.random() < cfg.id_switch_prob:
                current_map[obj.track_id] = next_pred_id
                next_pred_id += 1
            box = obj.box
            if cfg.position_sigma_m > 0 or cfg.yaw_sigma_rad > 0:
                dx, dy = rng.normal(0.0, cfg.position_sigma_m or 1e-12, size=2) \
                    if cfg.position_sigma_m > 0 else (0.0, 0.0)
                dyaw = rng.normal(0.0, cfg.yaw_sigma_rad) if cfg.yaw_sigma_rad > 0 else 0.0
                box = Box3D(box.center_x + float(dx), box.center_y + float(dy),
                            box.center_z, box.length, box.width, box.height,
                            box.yaw + float(dyaw))
            score = float(rng.uniform(0.5, 1.0)) if cfg.position_sigma_m > 0 \
                or cfg.dropout_prob > 0 or cfg.false_positive_rate > 0 else 1.0
            kept.append(ObjectRecord(cls=obj.cls, box=box, score=score,
                                     track_id=current_map[obj.track_id]))
            perturbed_ids.append(obj.track_id)

        n_fp = int(rng.poisson(cfg.false_positive_rate)) \
            if cfg.false_positive_rate > 0 else 0
        for k in range(n_fp):
            box = _sample_false_positive(rng, cfg, frame.objects)
            kept.append(ObjectRecord(cls=ObjectClass.CAR, box=box,
                                     score=float(rng.uniform(0.1, 0.5)),
                                     track_id=next_pred_id))
            next_pred_id += 1

        log.dropped[frame.frame_index] = dropped_ids
        log.perturbed[frame.frame_index] = perturbed_ids
        log.false_positives[frame.frame_index] = n_fp
        log.id_map[frame.frame_index] = {
            o: current_map[o] for o in perturbed_ids}
        pred_frames.append(FrameRecord(frame.frame_index, frame.timestamp_us,
                                       tuple(kept)))
    seq = SequenceRecord(gt.sequence_id, gt.gt_frames, tuple(pred_frames))
    return seq, log


def simulate_timing(n_frames: int, base_det_ms: float, base_track_ms: float,
                    per_object_track_ms: float,
                    objects_per_frame: list[int]) -> list[TimingRecord]:
    """Linear timing model: tracking grows with the object count, detection
    does not."""
    if min(base_det_ms, base_track_ms, per_object_track_ms) < 0:
        raise ValueError("timing parameters must be >= 0")
    if len(objects_per_frame) != n_frames:
        raise ValueError("objects_per_frame length must equal n_frames")
    return [
        TimingRecord(frame_index=t, t_detection_ms=base_det_ms,
                     t_tracking_ms=base_track_ms + per_object_track_ms * n_obj)
        for t, n_obj in enumerate(objects_per_frame)
    ]
