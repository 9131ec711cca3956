"""File-format adapters and report emission.

Frame streams are JSONL (one frame object per line), timing logs are CSV,
reports are CSV/JSON written atomically (temp file + rename). Floats are
serialized with 9 significant digits so repeated runs diff byte-identically.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .core import (Box3D, FrameRecord, ObjectClass, ObjectRecord,
                   SequenceRecord, TimingRecord)


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _parse_object(raw: dict, path: Path, line_no: int) -> ObjectRecord:
    try:
        cls = ObjectClass(raw["cls"])
    except ValueError:
        raise FormatError(f"{path}:{line_no}: unknown class {raw.get('cls')!r}") from None
    except KeyError:
        raise FormatError(f"{path}:{line_no}: object missing 'cls'") from None
    try:
        box = Box3D(float(raw["x"]), float(raw["y"]), float(raw["z"]),
                    float(raw["l"]), float(raw["w"]), float(raw["h"]),
                    float(raw["yaw"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}:{line_no}: bad box: {exc}") from exc
    score = raw.get("score")
    if score is not None:
        score = float(score)
        if not (0.0 <= score <= 1.0):
            # Tolerant ingestion of third-party detector outputs.
            import warnings
            warnings.warn(f"{path}:{line_no}: score {score} clamped to [0,1]")
            score = min(max(score, 0.0), 1.0)
    track_id = raw.get("track_id")
    return ObjectRecord(cls=cls, box=box, score=score,
                        track_id=int(track_id) if track_id is not None else None)


def load_frames_jsonl(path: str | Path) -> list[FrameRecord]:
    """Parse a JSONL frame stream into validated frame records."""
    path = Path(path)
    frames = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{line_no}: malformed JSON: {exc}") from exc
            try:
                frame_index = int(raw["frame"])
                ts = int(raw["ts_us"])
                objs = raw.get("objects", [])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{line_no}: bad frame header: {exc}") from exc
            objects = tuple(_parse_object(o, path, line_no) for o in objs)
            frames.append(FrameRecord(frame_index, ts, objects))
    return frames


def _object_to_json(o: ObjectRecord) -> dict:
    b = o.box
    d = {"cls": o.cls.value,
         "x": float(_fmt(b.center_x)), "y": float(_fmt(b.center_y)),
         "z": float(_fmt(b.center_z)), "l": float(_fmt(b.length)),
         "w": float(_fmt(b.width)), "h": float(_fmt(b.height)),
         "yaw": float(_fmt(b.yaw))}
    if o.score is not None:
        d["score"] = float(_fmt(o.score))
    if o.track_id is not None:
        d["track_id"] = o.track_id
    return d


def write_frames_jsonl(frames: Iterable[FrameRecord], path: str | Path) -> None:
    lines = []
    for f in frames:
        lines.append(json.dumps({
            "frame": f.frame_index,
            "ts_us": f.timestamp_us,
            "objects": [_object_to_json(o) for o in f.objects],
        }, separators=(",", ":")))
    _atomic_write_text(Path(path), "\n".join(lines) + ("\n" if lines else ""))


def load_sequence_jsonl(gt_path: str | Path, pred_path: str | Path,
                        sequence_id: str = "") -> SequenceRecord:
    return SequenceRecord(sequence_id or str(gt_path),
                          tuple(load_frames_jsonl(gt_path)),
                          tuple(load_frames_jsonl(pred_path)))


# Original dataset classes reduced to the four evaluated ones.
DAIR_CLASS_MAP = {
    "pedestrian": ObjectClass.PEDESTRIAN,
    "bicycle": ObjectClass.BIKE,
    "scooter": ObjectClass.BIKE,
    "cyclist": ObjectClass.BIKE,
    "motorcyclist": ObjectClass.BIKE,
    "car": ObjectClass.CAR,
    "van": ObjectClass.CAR,
    "truck": ObjectClass.TRUCK,
    "bus": ObjectClass.TRUCK,
}


def load_labels_dair(label_dir: str | Path, calib_dir: str | Path
                     ) -> SequenceRecord:
    """Adapter for per-frame JSON label files in the DAIR-V2X layout.

    Labels are lists of objects with `type`, `3d_location` {x,y,z},
    `3d_dimensions` {l,w,h} and `rotation` (yaw about the up axis, already
    matching the internal convention). Calibration files must be present
    for every frame.
    """
    label_dir, calib_dir = Path(label_dir), Path(calib_dir)
    label_files = sorted(label_dir.glob("*.json"))
    if not label_files:
        raise FormatError(f"no frames found in {label_dir}")
    frames = []
    for idx, lf in enumerate(label_files):
        calib_file = calib_dir / lf.name
        if not calib_file.exists():
            raise FormatError(f"missing calibration for frame {lf.name}")
        raw_objects = json.loads(lf.read_text())
        objects = []
        for o in raw_objects:
            cls_name = str(o.get("type", "")).lower()
            if cls_name not in DAIR_CLASS_MAP:
                raise FormatError(f"{lf}: unknown source class {cls_name!r}")
            loc = o["3d_location"]
            dim = o["3d_dimensions"]
            objects.append(ObjectRecord(
                cls=DAIR_CLASS_MAP[cls_name],
                box=Box3D(float(loc["x"]), float(loc["y"]), float(loc["z"]),
                          float(dim["l"]), float(dim["w"]), float(dim["h"]),
                          float(o.get("rotation", 0.0))),
            ))
        frames.append(FrameRecord(frame_index=idx,
                                  timestamp_us=idx * 100_000,
                                  objects=tuple(objects)))
    return SequenceRecord(sequence_id=label_dir.name,
                          gt_frames=tuple(frames), pred_frames=())


def load_timing_csv(path: str | Path) -> list[TimingRecord]:
    """Parse `frame,t_detection_ms,t_tracking_ms` rows, frame-sorted."""
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"frame", "t_detection_ms", "t_tracking_ms"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise FormatError(f"{path}: expected header frame,t_detection_ms,t_tracking_ms")
        for row_no, row in enumerate(reader, start=2):
            try:
                rec = TimingRecord(int(row["frame"]),
                                   float(row["t_detection_ms"]),
                                   float(row["t_tracking_ms"]))
            except ValueError as exc:
                raise FormatError(f"{path}: row {row_no}: {exc}") from exc
            records.append(rec)
    return sorted(records, key=lambda r: r.frame_index)


def write_timing_csv(records: Iterable[TimingRecord], path: str | Path) -> None:
    lines = ["frame,t_detection_ms,t_tracking_ms"]
    for r in records:
        lines.append(f"{r.frame_index},{_fmt(r.t_detection_ms)},{_fmt(r.t_tracking_ms)}")
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(results, out_dir: str | Path) -> dict[str, Path]:
    """Emit report.csv, report.json and qspace.csv for a result list."""
    if not results:
        raise ValueError("write_report needs at least one result")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_lines = ["setup,machine,mAP,A_sld,HOTA,A_norm,L_norm,R_norm,Q_mag"]
    qspace_lines = ["setup,machine,A_norm,L_norm,R_norm"]
    json_rows = []
    for r in results:
        s = r.setup
        csv_lines.append(",".join([
            s.sensor_key, str(s.machine_id),
            _fmt(r.accuracy.a_d), _fmt(r.accuracy.a_sld), _fmt(r.accuracy.a_t),
            _fmt(r.accuracy.accuracy_norm), _fmt(r.latency.latency_norm),
            _fmt(r.reliability.reliability_norm), _fmt(r.q.magnitude),
        ]))
        qspace_lines.append(",".join([
            s.sensor_key, str(s.machine_id),
            _fmt(r.q.accuracy_norm), _fmt(r.q.latency_norm),
            _fmt(r.q.reliability_norm),
        ]))
        json_rows.append({
            "setup": s.sensor_key,
            "kind": s.kind.value,
            "machine": s.machine_id,
            "accuracy": {
                "a_s": float(_fmt(r.accuracy.a_s)),
                "a_l": float(_fmt(r.accuracy.a_l)),
                "a_d": float(_fmt(r.accuracy.a_d)),
                "a_sld": float(_fmt(r.accuracy.a_sld)),
                "a_t": float(_fmt(r.accuracy.a_t)),
                "accuracy_norm": float(_fmt(r.accuracy.accuracy_norm)),
            },
            "latency": {
                "t_sensor_readout_ms": float(_fmt(r.latency.t_sensor_readout_ms)),
                "t_detection_ms": float(_fmt(r.latency.t_detection_ms)),
                "t_tracking_ms": float(_fmt(r.latency.t_tracking_ms)),
                "total_ms": float(_fmt(r.latency.total_ms)),
                "latency_norm": float(_fmt(r.latency.latency_norm)),
            },
            "reliability": {
                "var_r1": float(_fmt(r.reliability.var_r1)),
                "var_r2": float(_fmt(r.reliability.var_r2)),
                "var_r3": float(_fmt(r.reliability.var_r3)),
                "var_r4": float(_fmt(r.reliability.var_r4)),
                "cov_r1_r2": float(_fmt(r.reliability.cov_r1_r2)),
                "cov_r1_r3": float(_fmt(r.reliability.cov_r1_r3)),
                "raw": float(_fmt(r.reliability.raw)),
                "reliability_norm": float(_fmt(r.reliability.reliability_norm)),
            },
            "q": {
                "accuracy_norm": float(_fmt(r.q.accuracy_norm)),
                "latency_norm": float(_fmt(r.q.latency_norm)),
                "reliability_norm": float(_fmt(r.q.reliability_norm)),
                "magnitude": float(_fmt(r.q.magnitude)),
            },
        })

    paths = {
        "report.csv": out_dir / "report.csv",
        "report.json": out_dir / "report.json",
        "qspace.csv": out_dir / "qspace.csv",
    }
    _atomic_write_text(paths["report.csv"], "\n".join(csv_lines) + "\n")
    _atomic_write_text(paths["qspace.csv"], "\n".join(qspace_lines) + "\n")
    _atomic_write_text(paths["report.json"],
                       json.dumps(json_rows, indent=2, sort_keys=True) + "\n")
    return paths
