"""Shared domain types and validation for sensor-setup quality assessment.

Conventions: up axis is +z, yaw is counter-clockwise about +z measured from
+x, all lengths in meters, all angles in radians once parsed. Degree-valued
config fields are converted at construction time by the I/O layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class ObjectClass(str, Enum):
    PEDESTRIAN = "pedestrian"
    BIKE = "bike"
    CAR = "car"
    TRUCK = "truck"


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(yaw, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Box3D:
    """Upright oriented 3D bounding box (center/dimensions in m, yaw in rad)."""

    center_x: float
    center_y: float
    center_z: float
    length: float
    width: float
    height: float
    yaw: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0 and self.height > 0):
            raise ValueError(
                f"box dimensions must be positive, got "
                f"(l={self.length}, w={self.width}, h={self.height})"
            )
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def volume(self) -> float:
        return self.length * self.width * self.height

    @property
    def z_min(self) -> float:
        return self.center_z - 0.5 * self.height

    @property
    def z_max(self) -> float:
        return self.center_z + 0.5 * self.height


def bev_corners(box: Box3D) -> list[tuple[float, float]]:
    """Ground-plane footprint corners, counter-clockwise, yaw-rotated.

    Order starts at the (+l/2, +w/2) local corner and proceeds
    counter-clockwise, so the signed polygon area is always positive.
    """
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    hl, hw = 0.5 * box.length, 0.5 * box.width
    local = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
    return [
        (box.center_x + c * x - s * y, box.center_y + s * x + c * y)
        for x, y in local
    ]


@dataclass(frozen=True)
class ObjectRecord:
    cls: ObjectClass
    box: Box3D
    score: Optional[float] = None
    track_id: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "cls", ObjectClass(self.cls))


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    timestamp_us: int
    objects: tuple[ObjectRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))


@dataclass(frozen=True)
class SequenceRecord:
    sequence_id: str
    gt_frames: tuple[FrameRecord, ...]
    pred_frames: tuple[FrameRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "gt_frames", tuple(self.gt_frames))
        object.__setattr__(self, "pred_frames", tuple(self.pred_frames))


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_sequence."""

    frame_index: Optional[int]
    field: str
    message: str

    def __str__(self):
        where = f"frame {self.frame_index}" if self.frame_index is not None else "sequence"
        return f"{where}: {self.field}: {self.message}"


def _validate_frame_list(frames, role: str, require_score: bool,
                         violations: list[Violation]) -> None:
    prev_index = None
    for fr in frames:
        if fr.frame_index < 0:
            violations.append(Violation(fr.frame_index, "frame_index",
                                        f"{role} frame_index negative"))
        if prev_index is not None and fr.frame_index <= prev_index:
            violations.append(Violation(fr.frame_index, "frame_index",
                                        f"{role} frame_index not strictly increasing"))
        prev_index = fr.frame_index

        seen_ids: set[int] = set()
        for obj in fr.objects:
            if require_score and obj.score is None:
                violations.append(Violation(fr.frame_index, "score",
                                            "prediction object missing score"))
            if not require_score and obj.score is not None:
                violations.append(Violation(fr.frame_index, "score",
                                            "ground-truth object carries a score"))
            if obj.score is not None and not (0.0 <= obj.score <= 1.0):
                violations.append(Violation(fr.frame_index, "score",
                                            f"score {obj.score} outside [0,1]"))
            if obj.track_id is not None:
                if obj.track_id in seen_ids:
                    violations.append(Violation(fr.frame_index, "track_id",
                                                f"duplicate track_id {obj.track_id}"))
                seen_ids.add(obj.track_id)


def validate_sequence(seq: SequenceRecord) -> list[Violation]:
    """Check every type invariant; violations are data, not exceptions."""
    violations: list[Violation] = []
    _validate_frame_list(seq.gt_frames, "gt", require_score=False,
                         violations=violations)
    _validate_frame_list(seq.pred_frames, "pred", require_score=True,
                         violations=violations)
    gt_idx = {f.frame_index for f in seq.gt_frames}
    pred_idx = {f.frame_index for f in seq.pred_frames}
    if gt_idx != pred_idx:
        violations.append(Violation(None, "frame_index",
                                    "gt and pred frame index sets differ"))
    return violations


class SensorKind(str, Enum):
    CAMERA = "camera"
    LIDAR = "lidar"


@dataclass(frozen=True)
class SensorSpec:
    """Physical parameters of one camera or lidar sensor.

    Angular fields are stored in degrees as configured; the error-model
    functions convert to radians where arc lengths are needed.
    """

    kind: SensorKind
    label: str
    sample_rate_hz: float
    # camera
    width_px: Optional[int] = None
    height_px: Optional[int] = None
    # shared
    hfov_deg: Optional[float] = None
    vfov_deg: Optional[float] = None
    # lidar
    vertical_layers: Optional[int] = None
    hor_ang_res_deg: Optional[float] = None
    vert_ang_res_deg: Optional[float] = None
    range_accuracy_m: Optional[float] = None
    # registration
    e_trans_m: Optional[float] = None
    e_rot_deg: Optional[float] = None
    readout_ms: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SensorKind(self.kind))
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sensor {self.label}: sample_rate_hz must be > 0")
        for name in ("hfov_deg", "vfov_deg"):
            v = getattr(self, name)
            if v is not None and not (0.0 < v < 360.0):
                raise ValueError(f"sensor {self.label}: {name}={v} outside (0, 360)")
        if self.kind is SensorKind.CAMERA:
            if not self.width_px or not self.height_px:
                raise ValueError(f"camera {self.label}: width_px/height_px required")
            if self.width_px <= 0 or self.height_px <= 0:
                raise ValueError(f"camera {self.label}: pixel counts must be positive")
        else:
            if not self.vertical_layers or self.vertical_layers <= 0:
                raise ValueError(f"lidar {self.label}: vertical_layers required")


@dataclass(frozen=True)
class MachineProfile:
    machine_id: int
    gpu_desc: str = ""
    cpu_desc: str = ""


@dataclass(frozen=True)
class TimingRecord:
    frame_index: int
    t_detection_ms: float
    t_tracking_ms: float

    def __post_init__(self):
        if self.t_detection_ms < 0 or self.t_tracking_ms < 0:
            raise ValueError(
                f"frame {self.frame_index}: negative duration "
                f"(det={self.t_detection_ms}, track={self.t_tracking_ms})"
            )


class SetupKind(str, Enum):
    CAMERA_ONLY = "camera_only"
    LIDAR_ONLY = "lidar_only"
    COMBINED = "combined"


@dataclass(frozen=True)
class SetupId:
    """One sensor setup paired with one machine profile."""

    kind: SetupKind
    camera_label: Optional[str]
    lidar_label: Optional[str]
    machine_id: int

    def __post_init__(self):
        object.__setattr__(self, "kind", SetupKind(self.kind))
        if self.kind is SetupKind.CAMERA_ONLY and not (self.camera_label and not self.lidar_label):
            raise ValueError("camera_only setup needs camera_label only")
        if self.kind is SetupKind.LIDAR_ONLY and not (self.lidar_label and not self.camera_label):
            raise ValueError("lidar_only setup needs lidar_label only")
        if self.kind is SetupKind.COMBINED and not (self.camera_label and self.lidar_label):
            raise ValueError("combined setup needs both sensor labels")

    @property
    def sensor_key(self) -> str:
        """Machine-independent identifier of the sensor part of the setup."""
        if self.kind is SetupKind.CAMERA_ONLY:
            return self.camera_label
        if self.kind is SetupKind.LIDAR_ONLY:
            return self.lidar_label
        return f"{self.camera_label}+{self.lidar_label}"

    def __str__(self):
        return f"{self.sensor_key}@{self.machine_id}"


@dataclass(frozen=True)
class QualityVector:
    accuracy_norm: float
    latency_norm: float
    reliability_norm: float
    magnitude: float

    def __post_init__(self):
        for name in ("accuracy_norm", "latency_norm", "reliability_norm"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0,1]")
        expected = math.sqrt(self.accuracy_norm ** 2 + self.latency_norm ** 2
                             + self.reliability_norm ** 2)
        if abs(self.magnitude - expected) > 1e-9:
            raise ValueError("magnitude inconsistent with components")
