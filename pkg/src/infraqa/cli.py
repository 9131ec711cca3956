"""Command-line entry points.

Exit codes: 0 success, 2 validation failure, 3 missing input, 4 I/O error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import io as io_mod
from . import ladder as ladder_mod
from .config import ConfigError, load_config
from .core import ObjectClass, SensorKind, SensorSpec
from .pipeline import MissingInputError, enumerate_setups, evaluate_all
from .synth import ScenarioConfig, corrupt_detections, generate_scenario, simulate_timing

EXIT_VALIDATION = 2
EXIT_MISSING_INPUT = 3
EXIT_IO = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Quality assessment for roadside infrastructure sensor setups."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Run configuration file.")
def evaluate(config_path):
    """Run the full evaluation and write reports."""
    if not Path(config_path).exists():
        _fail(EXIT_MISSING_INPUT, f"config file not found: {config_path}")
    try:
        cfg = load_config(config_path)
        results = evaluate_all(cfg)
        paths = io_mod.write_report(results, cfg.output_dir)
    except ConfigError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except MissingInputError as exc:
        _fail(EXIT_MISSING_INPUT, str(exc))
    except FileNotFoundError as exc:
        _fail(EXIT_MISSING_INPUT, str(exc))
    except (io_mod.FormatError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    for name, p in paths.items():
        click.echo(f"wrote {p}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False))
def enumerate(config_path):
    """List every total combination defined by the configuration."""
    if not Path(config_path).exists():
        _fail(EXIT_MISSING_INPUT, f"config file not found: {config_path}")
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    setups = enumerate_setups([s.label for s in cfg.cameras],
                              [s.label for s in cfg.lidars], cfg.machines)
    for s in setups:
        click.echo(str(s))
    n_machines = max(len(cfg.machines), 1)
    click.echo(f"# {len(setups) // n_machines} sensor setups, "
               f"{len(setups)} total combinations", err=True)


@main.group()
def ladder():
    """Simulate sensor resolution levels."""


@ladder.command("lidar")
@click.option("--cloud", "cloud_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--target", type=int, required=True,
              help=f"Target layer count, one of {ladder_mod.LIDAR_LADDER}.")
@click.option("--layers", type=int, default=300, show_default=True,
              help="Vertical layer count of the source sensor.")
@click.option("--vert-res-deg", type=float, default=0.13, show_default=True)
def ladder_lidar(cloud_path, out_path, target, layers, vert_res_deg):
    """Thin a point cloud to a lidar ladder resolution."""
    if not Path(cloud_path).exists():
        _fail(EXIT_MISSING_INPUT, f"point cloud not found: {cloud_path}")
    try:
        cloud = ladder_mod.read_cloud(cloud_path)
        if cloud.layer_ids is None:
            spec = SensorSpec(kind=SensorKind.LIDAR, label="src",
                              sample_rate_hz=10.0, vertical_layers=layers,
                              vert_ang_res_deg=vert_res_deg)
            cloud = ladder_mod.assign_layers(cloud, spec)
        result = ladder_mod.downsample_layers(cloud, layers, target)
        ladder_mod.write_cloud(result, out_path)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {out_path} ({len(result)} points)")


@ladder.command("camera")
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--target-height", type=int, required=True,
              help=f"Target vertical resolution, one of {ladder_mod.CAMERA_LADDER}.")
def ladder_camera(image_path, out_path, target_height):
    """Resample a 1920x1080 image to a camera ladder resolution."""
    if not Path(image_path).exists():
        _fail(EXIT_MISSING_INPUT, f"image not found: {image_path}")
    try:
        img = ladder_mod.read_image(image_path)
        out = ladder_mod.resample_image(img, target_height)
        ladder_mod.write_image(out, out_path)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {out_path} ({out.shape[1]}x{out.shape[0]})")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--out-dir", required=True, type=click.Path())
def synth(scenario_path, out_dir):
    """Generate a synthetic scenario: gt/detections/tracking/timing files."""
    if not Path(scenario_path).exists():
        _fail(EXIT_MISSING_INPUT, f"scenario file not found: {scenario_path}")
    try:
        raw = yaml.safe_load(Path(scenario_path).read_text())
        cfg = ScenarioConfig(
            n_frames=int(raw["n_frames"]),
            objects_per_class={ObjectClass(k): int(v)
                               for k, v in (raw.get("objects_per_class") or {}).items()},
            speed_m_per_frame=float(raw.get("speed_m_per_frame", 1.0)),
            position_sigma_m=float(raw.get("position_sigma_m", 0.0)),
            yaw_sigma_rad=float(raw.get("yaw_sigma_rad", 0.0)),
            dropout_prob=float(raw.get("dropout_prob", 0.0)),
            false_positive_rate=float(raw.get("false_positive_rate", 0.0)),
            id_switch_prob=float(raw.get("id_switch_prob", 0.0)),
            seed=int(raw.get("seed", 0)),
        )
    except (yaml.YAMLError, KeyError, TypeError, ValueError) as exc:
        _fail(EXIT_VALIDATION, f"bad scenario file: {exc}")
    out = Path(out_dir)
    try:
        gt = generate_scenario(cfg)
        preds, log = corrupt_detections(gt, cfg)
        timing = simulate_timing(
            cfg.n_frames,
            base_det_ms=float(raw.get("base_det_ms", 50.0)),
            base_track_ms=float(raw.get("base_track_ms", 5.0)),
            per_object_track_ms=float(raw.get("per_object_track_ms", 1.0)),
            objects_per_frame=[len(f.objects) for f in gt.gt_frames])
        out.mkdir(parents=True, exist_ok=True)
        io_mod.write_frames_jsonl(gt.gt_frames, out / "gt.jsonl")
        io_mod.write_frames_jsonl(preds.pred_frames, out / "detections.jsonl")
        io_mod.write_frames_jsonl(preds.pred_frames, out / "tracking.jsonl")
        io_mod.write_timing_csv(timing, out / "timing.csv")
        (out / "corruption_log.json").write_text(json.dumps({
            "dropped": log.dropped, "false_positives": log.false_positives,
            "kept_count": log.kept_count,
        }, indent=2, default=str) + "\n")
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote scenario files to {out}")


@main.command()
@click.option("--from", "from_path", required=True,
              type=click.Path(), help="Existing report.json.")
@click.option("--out-dir", required=True, type=click.Path())
def report(from_path, out_dir):
    """Re-emit CSV reports from a previously written report.json."""
    if not Path(from_path).exists():
        _fail(EXIT_MISSING_INPUT, f"report not found: {from_path}")
    try:
        rows = json.loads(Path(from_path).read_text())
        csv_lines = ["setup,machine,mAP,A_sld,HOTA,A_norm,L_norm,R_norm,Q_mag"]
        qspace_lines = ["setup,machine,A_norm,L_norm,R_norm"]
        for r in rows:
            acc, q = r["accuracy"], r["q"]
            csv_lines.append(",".join([
                r["setup"], str(r["machine"]),
                format(acc["a_d"], ".9g"), format(acc["a_sld"], ".9g"),
                format(acc["a_t"], ".9g"), format(acc["accuracy_norm"], ".9g"),
                format(r["latency"]["latency_norm"], ".9g"),
                format(r["reliability"]["reliability_norm"], ".9g"),
                format(q["magnitude"], ".9g")]))
            qspace_lines.append(",".join([
                r["setup"], str(r["machine"]),
                format(q["accuracy_norm"], ".9g"),
                format(q["latency_norm"], ".9g"),
                format(q["reliability_norm"], ".9g")]))
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
        (out / "qspace.csv").write_text("\n".join(qspace_lines) + "\n")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        _fail(EXIT_VALIDATION, f"bad report file: {exc}")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote reports to {out_dir}")


if __name__ == "__main__":
    main()
