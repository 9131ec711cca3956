"""Simulated sensor quality levels: lidar layer identification and the
halving ladder, camera resampling ladder, and camera-frustum cropping of
point clouds.

Lidar layers are recovered from per-point elevation angles by 1D gap
clustering, then thinned: the topmost layers above 256 are dropped first,
after which every halving step keeps the even-indexed layers so the lowest
layer (the relevant near range) survives every step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .core import SensorKind, SensorSpec

LIDAR_LADDER = (256, 128, 64, 32, 16, 8)
CAMERA_LADDER = (2160, 1080, 720, 540, 360, 270, 180, 135)
CAMERA_SOURCE_SIZE = (1920, 1080)  # (width, height)
ASPECT_W, ASPECT_H = 16, 9
LANCZOS_RADIUS = 3  # PIL's LANCZOS filter uses a=3


@dataclass(frozen=True)
class PointCloud:
    """Points as an (n, 4) float array of x, y, z, intensity with an
    optional per-point layer id."""

    points: np.ndarray
    layer_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 4)
        if not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.layer_ids is not None:
            ids = np.asarray(self.layer_ids, dtype=np.int64).reshape(-1)
            if ids.shape[0] != pts.shape[0]:
                raise ValueError("layer_ids length must match point count")
            if ids.size and ids.min() < 0:
                raise ValueError("layer_ids must be >= 0")
            object.__setattr__(self, "layer_ids", ids)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class CalibrationSet:
    """Pinhole intrinsics and lidar-to-camera extrinsics."""

    intrinsics: np.ndarray          # 3x3
    rotation: np.ndarray            # 3x3, lidar -> camera
    translation: np.ndarray         # 3, meters

    def __post_init__(self):
        k = np.asarray(self.intrinsics, dtype=np.float64).reshape(3, 3)
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-6):
            raise ValueError("rotation must be orthonormal")
        object.__setattr__(self, "intrinsics", k)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)


def assign_layers(cloud: PointCloud, spec: SensorSpec) -> PointCloud:
    """Cluster per-point elevation angles into beam layers.

    Layers split where the elevation gap between sorted neighbours exceeds
    half the vertical angular resolution; index 0 is the lowest elevation.
    """
    if spec.kind is not SensorKind.LIDAR:
        raise ValueError("assign_layers needs a lidar spec")
    if len(cloud) == 0:
        return PointCloud(cloud.points, np.zeros(0, dtype=np.int64))
    pts = cloud.points
    elevation = np.arctan2(pts[:, 2], np.hypot(pts[:, 0], pts[:, 1]))
    order = np.argsort(elevation, kind="stable")
    gap = math.radians(spec.vert_ang_res_deg or 0.13) / 2.0
    sorted_elev = elevation[order]
    splits = np.diff(sorted_elev) > gap
    layer_sorted = np.concatenate(([0], np.cumsum(splits)))
    layer_ids = np.empty(len(cloud), dtype=np.int64)
    layer_ids[order] = layer_sorted
    n_layers = int(layer_ids.max()) + 1
    if n_layers > spec.vertical_layers:
        raise ValueError(
            f"found {n_layers} elevation clusters, but the sensor has only "
            f"{spec.vertical_layers} layers; check vert_ang_res_deg")
    return PointCloud(pts, layer_ids)


def surviving_layer_ids(source_layers: int, target: int) -> list[int]:
    """Original layer ids that survive thinning source_layers -> target."""
    if target not in LIDAR_LADDER:
        raise ValueError(f"target {target} not in ladder {LIDAR_LADDER}")
    if source_layers < target:
        raise ValueError(f"source has {source_layers} layers < target {target}")
    ids = list(range(min(source_layers, 256)))  # topmost layers above 256 dropped
    while len(ids) > target:
        ids = ids[0::2]
    return ids


def downsample_layers(cloud: PointCloud, source_layers: int,
                      target: int) -> PointCloud:
    """Thin a layered cloud to a ladder resolution, keeping layer 0.

    The surviving points keep their original layer ids re-indexed densely
    from 0 (lowest layer stays 0).
    """
    if cloud.layer_ids is None:
        raise ValueError("cloud has no layer ids; run assign_layers first")
    keep = surviving_layer_ids(source_layers, target)
    remap = {orig: new for new, orig in enumerate(keep)}
    mask = np.isin(cloud.layer_ids, keep)
    new_ids = np.array([remap[i] for i in cloud.layer_ids[mask]],
                       dtype=np.int64)
    return PointCloud(cloud.points[mask], new_ids)


def resample_image(img: np.ndarray, target_height: int) -> np.ndarray:
    """Resample a 1920x1080 RGB image to a ladder step.

    2160 uses nearest-neighbour x2 (exact block copy); every smaller target
    uses separable Lanczos filtering. Values stay in [0, 255].
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("expected an HxWx3 uint8 image")
    if (img.shape[1], img.shape[0]) != CAMERA_SOURCE_SIZE:
        raise ValueError(f"expected a {CAMERA_SOURCE_SIZE[0]}x{CAMERA_SOURCE_SIZE[1]} source image")
    if target_height not in CAMERA_LADDER:
        raise ValueError(f"target height {target_height} not in ladder {CAMERA_LADDER}")
    target_width = target_height * ASPECT_W // ASPECT_H
    if target_height == img.shape[0]:
        return img.copy()
    pil = Image.fromarray(img)
    if target_height > img.shape[0]:
        out = pil.resize((target_width, target_height), Image.NEAREST)
    else:
        out = pil.resize((target_width, target_height), Image.LANCZOS)
    return np.asarray(out)


def crop_to_camera_fov(cloud: PointCloud, calib: CalibrationSet,
                       image_size: tuple[int, int]) -> PointCloud:
    """Keep points with positive camera-frame depth projecting inside the
    image bounds. image_size is (width, height) in pixels."""
    if abs(float(np.linalg.det(calib.intrinsics))) < 1e-12:
        raise ValueError("singular camera intrinsics")
    if len(cloud) == 0:
        return cloud
    width, height = image_size
    cam = cloud.points[:, :3] @ calib.rotation.T + calib.translation
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        proj = cam @ calib.intrinsics.T
        u = proj[:, 0] / z
        v = proj[:, 1] / z
    mask = (z > 0) & (u >= 0) & (u < width) & (v >= 0) & (v < height)
    ids = cloud.layer_ids[mask] if cloud.layer_ids is not None else None
    return PointCloud(cloud.points[mask], ids)


def write_cloud(cloud: PointCloud, path: str | Path) -> None:
    """Write points as little-endian float32 x,y,z,intensity quadruples
    plus a JSON sidecar descriptor."""
    path = Path(path)
    data = cloud.points.astype("<f4")
    path.write_bytes(data.tobytes())
    sidecar = {
        "format": "xyzi-float32-le",
        "n_points": int(len(cloud)),
    }
    if cloud.layer_ids is not None:
        sidecar["n_layers"] = int(cloud.layer_ids.max()) + 1 if len(cloud) else 0
        sidecar["layer_ids"] = cloud.layer_ids.tolist()
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n")


def read_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(-1, 4)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    layer_ids = None
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
        if sidecar.get("n_points") != raw.shape[0]:
            raise ValueError(f"{path}: sidecar point count mismatch")
        if "layer_ids" in sidecar:
            layer_ids = np.asarray(sidecar["layer_ids"], dtype=np.int64)
    return PointCloud(raw.astype(np.float64), layer_ids)


def write_image(img: np.ndarray, path: str | Path) -> None:
    Image.fromarray(np.asarray(img)).save(str(path), format="PNG")


def read_image(path: str | Path) -> np.ndarray:
    return np.asarray(Image.open(str(path)).convert("RGB"))
