"""Run configuration: sensors, machines, constants, error-model and fusion
selections, and per-setup input bindings. Parsed from a YAML file."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .core import MachineProfile, SensorKind, SensorSpec
from .sensor_model import EvalConstants


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SetupInputs:
    """Input bindings for one sensor setup (machine-independent key).

    Either measured result files (gt/detections/tracking plus per-machine
    timing logs) or a composition rule naming two other setups.
    """

    gt: Optional[Path] = None
    detections: Optional[Path] = None
    tracking: Optional[Path] = None
    timing: dict[int, Path] = field(default_factory=dict)
    compose: Optional[tuple[str, str]] = None

    @property
    def is_composed(self) -> bool:
        return self.compose is not None


@dataclass(frozen=True)
class RunConfig:
    sensors: tuple[SensorSpec, ...]
    machines: tuple[MachineProfile, ...]
    constants: EvalConstants = EvalConstants()
    camera_error_model: str = "camera_gsd"
    lidar_error_model: str = "lidar_beam"
    fusion_policy: str = "parallel"
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    inputs: dict[str, SetupInputs] = field(default_factory=dict)
    output_dir: Path = Path("out")

    def __post_init__(self):
        labels = [s.label for s in self.sensors]
        if len(set(labels)) != len(labels):
            raise ConfigError("sensor labels must be unique")
        ids = [m.machine_id for m in self.machines]
        if len(set(ids)) != len(ids):
            raise ConfigError("machine ids must be unique")
        if self.fusion_policy not in ("parallel", "serial"):
            raise ConfigError(f"unknown fusion policy {self.fusion_policy!r}")

    @property
    def cameras(self) -> list[SensorSpec]:
        return [s for s in self.sensors if s.kind is SensorKind.CAMERA]

    @property
    def lidars(self) -> list[SensorSpec]:
        return [s for s in self.sensors if s.kind is SensorKind.LIDAR]

    def sensor(self, label: str) -> SensorSpec:
        for s in self.sensors:
            if s.label == label:
                return s
        raise ConfigError(f"unknown sensor label {label!r}")


def _parse_sensor(raw: dict) -> SensorSpec:
    try:
        return SensorSpec(
            kind=SensorKind(raw["kind"]),
            label=raw["label"],
            sample_rate_hz=float(raw["sample_rate_hz"]),
            width_px=raw.get("width_px"),
            height_px=raw.get("height_px"),
            hfov_deg=raw.get("hfov_deg"),
            vfov_deg=raw.get("vfov_deg"),
            vertical_layers=raw.get("vertical_layers"),
            hor_ang_res_deg=raw.get("hor_ang_res_deg"),
            vert_ang_res_deg=raw.get("vert_ang_res_deg"),
            range_accuracy_m=raw.get("range_accuracy_m"),
            e_trans_m=raw.get("e_trans_m"),
            e_rot_deg=raw.get("e_rot_deg"),
            readout_ms=float(raw.get("readout_ms", 0.0)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad sensor entry {raw.get('label', raw)}: {exc}") from exc


def _parse_inputs(raw: dict, base: Path) -> dict[str, SetupInputs]:
    inputs = {}
    for key, entry in (raw or {}).items():
        if "compose" in entry:
            pair = entry["compose"]
            if len(pair) != 2:
                raise ConfigError(f"inputs[{key}]: compose needs two setup keys")
            inputs[key] = SetupInputs(compose=(str(pair[0]), str(pair[1])))
            continue
        timing = {int(m): base / p for m, p in (entry.get("timing") or {}).items()}
        inputs[key] = SetupInputs(
            gt=base / entry["gt"] if "gt" in entry else None,
            detections=base / entry["detections"] if "detections" in entry else None,
            tracking=base / entry["tracking"] if "tracking" in entry else None,
            timing=timing,
        )
    return inputs


def load_config(path: str | Path) -> RunConfig:
    """Parse a YAML run configuration; relative paths resolve against the
    config file's directory."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = path.parent

    consts_raw = raw.get("constants") or {}
    try:
        constants = EvalConstants(**consts_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"constants: {exc}") from exc

    sensors = tuple(_parse_sensor(s) for s in raw.get("sensors") or [])
    machines = tuple(
        MachineProfile(machine_id=int(m["machine_id"]),
                       gpu_desc=str(m.get("gpu", "")),
                       cpu_desc=str(m.get("cpu", "")))
        for m in raw.get("machines") or [])

    models = raw.get("error_models") or {}
    weights = raw.get("weights") or [1.0, 1.0, 1.0]
    if len(weights) != 3:
        raise ConfigError("weights must have exactly three entries")

    return RunConfig(
        sensors=sensors,
        machines=machines,
        constants=constants,
        camera_error_model=models.get("camera", "camera_gsd"),
        lidar_error_model=models.get("lidar", "lidar_beam"),
        fusion_policy=raw.get("fusion_policy", "parallel"),
        weights=tuple(float(w) for w in weights),
        inputs=_parse_inputs(raw.get("inputs"), base),
        output_dir=base / raw.get("output_dir", "out"),
    )
