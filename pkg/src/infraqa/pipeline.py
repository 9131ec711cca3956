"""Setup enumeration, latency and reliability KPIs, quality-vector
assembly, and full-run orchestration.

A run has two phases: phase 1 computes accuracy, latency, and raw
reliability per total combination (parallel across setups, capped by the
INFRAQA_THREADS environment variable); phase 2 normalizes reliability
against the batch min/max and assembles the quality vectors in
deterministic setup order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import io as io_mod
from .config import RunConfig, SetupInputs
from .core import (MachineProfile, QualityVector, SensorKind, SetupId,
                   SetupKind, TimingRecord)
from .detection import map_at_05
from .sensor_model import (AccuracyBreakdown, EvalConstants, accuracy_norm,
                           combine_composite, combine_tracking,
                           composite_accuracy, localization_accuracy,
                           registration_errors, sensor_accuracy, sensor_error)
from .tracking import hota_3d


class MissingInputError(ValueError):
    """An enumerated setup has no input files and no composition rule."""


@dataclass(frozen=True)
class LatencyBreakdown:
    t_sensor_readout_ms: float
    t_detection_ms: float
    t_tracking_ms: float
    total_ms: float
    latency_norm: float


@dataclass(frozen=True)
class ReliabilityBreakdown:
    var_r1: float
    var_r2: float
    var_r3: float
    var_r4: float
    cov_r1_r2: float
    cov_r1_r3: float
    raw: float
    reliability_norm: Optional[float] = None


@dataclass(frozen=True)
class SetupResult:
    setup: SetupId
    accuracy: AccuracyBreakdown
    latency: LatencyBreakdown
    reliability: ReliabilityBreakdown
    q: QualityVector


def enumerate_setups(camera_labels: Sequence[str], lidar_labels: Sequence[str],
                     machines: Sequence[MachineProfile]) -> list[SetupId]:
    """All total combinations: cameras, lidars, then combined
    (camera-major), each crossed with machines ordered by machine_id."""
    sensor_setups: list[tuple[SetupKind, Optional[str], Optional[str]]] = []
    for c in camera_labels:
        sensor_setups.append((SetupKind.CAMERA_ONLY, c, None))
    for l in lidar_labels:
        sensor_setups.append((SetupKind.LIDAR_ONLY, None, l))
    for c in camera_labels:
        for l in lidar_labels:
            sensor_setups.append((SetupKind.COMBINED, c, l))
    ordered_machines = sorted(machines, key=lambda m: m.machine_id)
    return [
        SetupId(kind=kind, camera_label=c, lidar_label=l,
                machine_id=m.machine_id)
        for kind, c, l in sensor_setups
        for m in ordered_machines
    ]


def total_latency(timings: Sequence[TimingRecord],
                  readout_ms: float) -> tuple[float, float, float, float]:
    """Mean (readout, detection, tracking, total) in ms over the frames."""
    if not timings:
        raise ValueError("total_latency needs at least one timing record")
    det = sum(t.t_detection_ms for t in timings) / len(timings)
    track = sum(t.t_tracking_ms for t in timings) / len(timings)
    return readout_ms, det, track, readout_ms + det + track


def combined_frame_latency(per_frame_i: Sequence[float],
                           per_frame_j: Sequence[float],
                           policy: str) -> list[float]:
    """Per-frame combination of the two sensors' readout+detection paths."""
    if len(per_frame_i) != len(per_frame_j):
        raise ValueError("combined timing series differ in length")
    if policy == "parallel":
        return [max(a, b) for a, b in zip(per_frame_i, per_frame_j)]
    if policy == "serial":
        return [a + b for a, b in zip(per_frame_i, per_frame_j)]
    raise ValueError(f"unknown fusion policy {policy!r}")


def latency_norm(total_ms: float, consts: EvalConstants) -> float:
    """1 - (clamped total - t_min) / (t_max - t_min)."""
    if total_ms < 0:
        raise ValueError("latency must be >= 0")
    clamped = min(max(total_ms, 0.0), consts.t_max_ms)
    return 1.0 - (clamped - consts.t_min_ms) / (consts.t_max_ms - consts.t_min_ms)


def _pop_var(x: np.ndarray) -> float:
    return float(np.mean((x - x.mean()) ** 2))


def _pop_cov(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((x - x.mean()) * (y - y.mean())))


def reliability_raw(r1: Sequence[float], r2: Sequence[float],
                    r3: Sequence[float], r4: Sequence[float]
                    ) -> ReliabilityBreakdown:
    """Population variance/covariance sum of the four per-frame series:
    objects per frame, detection accuracy per frame, tracking time per
    frame, and detection time per frame. Only the r1/r2 and r1/r3
    covariances contribute."""
    series = [np.asarray(s, dtype=float) for s in (r1, r2, r3, r4)]
    n = len(series[0])
    if n < 2:
        raise ValueError("reliability needs at least two frames")
    if any(len(s) != n for s in series):
        raise ValueError("reliability series must have equal length")
    v1, v2, v3, v4 = (_pop_var(s) for s in series)
    c12 = _pop_cov(series[0], series[1])
    c13 = _pop_cov(series[0], series[2])
    raw = v1 + v2 + v3 + v4 + 2.0 * c12 + 2.0 * c13
    return ReliabilityBreakdown(v1, v2, v3, v4, c12, c13, raw)


def reliability_norm_batch(raws: Sequence[float]) -> list[float]:
    """Min-max normalization over the batch: min raw maps to 1, max to 0.
    A spread-free batch maps everything to 1."""
    if not raws:
        raise ValueError("empty reliability batch")
    lo, hi = min(raws), max(raws)
    if hi == lo:
        return [1.0 for _ in raws]
    return [1.0 - (r - lo) / (hi - lo) for r in raws]


def build_quality_vector(a_norm: float, l_norm: float, r_norm: float,
                         weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
                         ) -> QualityVector:
    a, l, r = a_norm * weights[0], l_norm * weights[1], r_norm * weights[2]
    return QualityVector(a, l, r, math.sqrt(a * a + l * l + r * r))


@dataclass
class _SensorEval:
    """Machine-independent measured results for one sensor setup.

    For combined setups a_s/a_l are an effective decomposition of the
    combined sensor-and-localization term (their product equals the
    self-weighted combination of the constituents' products).
    """

    a_s: float
    a_l: float
    a_d: float
    a_t: float
    a_sld: float
    r1: list[float]
    r2: list[float]

    @property
    def a_sl(self) -> float:
        return self.a_s * self.a_l


def _worker_count() -> int:
    raw = os.environ.get("INFRAQA_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _sensor_a_s_a_l(cfg: RunConfig, label: str) -> tuple[float, float]:
    spec = cfg.sensor(label)
    model = cfg.camera_error_model if spec.kind is SensorKind.CAMERA \
        else cfg.lidar_error_model
    a_s = sensor_accuracy(sensor_error(spec, cfg.constants, model), cfg.constants)
    e_trans, e_rot = registration_errors(spec, cfg.constants)
    a_l = localization_accuracy(e_trans, e_rot, cfg.constants)
    return a_s, a_l


def _combined_a_s_a_l(cfg: RunConfig, cam_label: str,
                      lid_label: str) -> tuple[float, float]:
    """Effective (a_s, a_l) pair whose product is the self-weighted
    combination of the constituents' a_s*a_l products."""
    a_s_c, a_l_c = _sensor_a_s_a_l(cfg, cam_label)
    a_s_l, a_l_l = _sensor_a_s_a_l(cfg, lid_label)
    a_sl = combine_composite(a_s_c * a_l_c, a_s_l * a_l_l)
    a_s = combine_composite(a_s_c, a_s_l)
    a_l = a_sl / a_s if a_s > 0 else 0.0
    return a_s, a_l


def _eval_measured(cfg: RunConfig, key: str, inputs: SetupInputs,
                   a_s: float, a_l: float) -> _SensorEval:
    for name in ("gt", "detections", "tracking"):
        if getattr(inputs, name) is None:
            raise MissingInputError(f"setup {key}: missing {name} file")
    gt = io_mod.load_frames_jsonl(inputs.gt)
    det = io_mod.load_frames_jsonl(inputs.detections)
    trk = io_mod.load_frames_jsonl(inputs.tracking)
    ap = map_at_05(gt, det)
    hota = hota_3d(gt, trk)
    r1 = [float(len(f.objects)) for f in sorted(gt, key=lambda f: f.frame_index)]
    r2 = [v for _, v in ap.per_frame_ad]
    return _SensorEval(a_s=a_s, a_l=a_l, a_d=ap.map_value, a_t=hota.hota,
                       a_sld=composite_accuracy(a_s, a_l, ap.map_value),
                       r1=r1, r2=r2)


def evaluate_all(cfg: RunConfig) -> list[SetupResult]:
    """Run the full two-phase evaluation for every enumerated total
    combination described by the configuration."""
    camera_labels = [s.label for s in cfg.cameras]
    lidar_labels = [s.label for s in cfg.lidars]
    setups = enumerate_setups(camera_labels, lidar_labels, cfg.machines)

    # Resolve sensor-level (machine-independent) evaluations first.
    sensor_keys: list[str] = []
    for s in setups:
        if s.sensor_key not in sensor_keys:
            sensor_keys.append(s.sensor_key)

    evals: dict[str, _SensorEval] = {}

    def eval_sensor_key(key: str) -> _SensorEval:
        inputs = cfg.inputs.get(key)
        if inputs is None:
            raise MissingInputError(f"no inputs configured for setup {key}")
        if inputs.is_composed:
            a, b = inputs.compose
            ev_a, ev_b = evals[a], evals[b]
            a_sld = combine_composite(ev_a.a_sld, ev_b.a_sld)
            a_t = combine_tracking(ev_a.a_t, ev_b.a_t)
            if len(ev_a.r1) != len(ev_b.r1):
                raise ValueError(f"setup {key}: composed series lengths differ")
            r1 = ev_a.r1
            r2 = [0.5 * (x + y) for x, y in zip(ev_a.r2, ev_b.r2)]
            a_s = combine_composite(ev_a.a_s, ev_b.a_s)
            a_sl = combine_composite(ev_a.a_sl, ev_b.a_sl)
            a_l = a_sl / a_s if a_s > 0 else 0.0
            a_d = a_sld / a_sl if a_sl > 0 else 0.0
            return _SensorEval(a_s=a_s, a_l=a_l, a_d=a_d, a_t=a_t,
                               a_sld=a_sld, r1=r1, r2=r2)
        if "+" in key:
            cam_label, lid_label = key.split("+", 1)
            a_s, a_l = _combined_a_s_a_l(cfg, cam_label, lid_label)
        else:
            a_s, a_l = _sensor_a_s_a_l(cfg, key)
        return _eval_measured(cfg, key, inputs, a_s, a_l)

    # Composed setups depend on their constituents; evaluate measured keys
    # (in parallel) first, then composed keys in order.
    measured_keys = [k for k in sensor_keys
                     if not (cfg.inputs.get(k) and cfg.inputs[k].is_composed)]
    composed_keys = [k for k in sensor_keys if k not in measured_keys]
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        for key, ev in zip(measured_keys,
                           pool.map(eval_sensor_key, measured_keys)):
            evals[key] = ev
    for key in composed_keys:
        inputs = cfg.inputs[key]
        for dep in inputs.compose:
            if dep not in evals:
                raise MissingInputError(
                    f"setup {key}: composition source {dep} not evaluated")
        evals[key] = eval_sensor_key(key)

    # Phase 1: per-total-combination accuracy/latency/raw reliability.
    partials: list[tuple[SetupId, AccuracyBreakdown, LatencyBreakdown,
                         ReliabilityBreakdown]] = []

    def eval_total(setup: SetupId):
        key = setup.sensor_key
        ev = evals[key]
        timings, per_frame_det, per_frame_trk, readout = \
            _resolve_timing(cfg, setup)
        _, det_ms, trk_ms, total_ms = total_latency(timings, readout)
        lat = LatencyBreakdown(readout, det_ms, trk_ms, total_ms,
                               latency_norm(total_ms, cfg.constants))
        rel = reliability_raw(ev.r1, ev.r2, per_frame_trk, per_frame_det)
        acc = AccuracyBreakdown(
            a_s=ev.a_s, a_l=ev.a_l, a_d=ev.a_d, a_sld=ev.a_sld, a_t=ev.a_t,
            accuracy_norm=accuracy_norm(min(ev.a_sld, 1.0), min(ev.a_t, 1.0)))
        return setup, acc, lat, rel

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        partials = list(pool.map(eval_total, setups))

    # Phase 2: batch reliability normalization, deterministic order.
    raws = [p[3].raw for p in partials]
    norms = reliability_norm_batch(raws)
    results = []
    for (setup, acc, lat, rel), r_norm in zip(partials, norms):
        rel = ReliabilityBreakdown(rel.var_r1, rel.var_r2, rel.var_r3,
                                   rel.var_r4, rel.cov_r1_r2, rel.cov_r1_r3,
                                   rel.raw, r_norm)
        q = build_quality_vector(acc.accuracy_norm, lat.latency_norm, r_norm,
                                 cfg.weights)
        results.append(SetupResult(setup, acc, lat, rel, q))
    return results


def _resolve_timing(cfg: RunConfig, setup: SetupId):
    """Per-frame timing records and the readout constant for one total
    combination; combined setups without fused logs are composed from their
    constituents per the fusion policy."""
    key = setup.sensor_key
    inputs = cfg.inputs.get(key)
    if inputs is not None and setup.machine_id in inputs.timing:
        timings = io_mod.load_timing_csv(inputs.timing[setup.machine_id])
        if not timings:
            raise MissingInputError(f"setup {setup}: empty timing log")
        readout = _setup_readout(cfg, setup)
        det = [t.t_detection_ms for t in timings]
        trk = [t.t_tracking_ms for t in timings]
        return timings, det, trk, readout
    if setup.kind is SetupKind.COMBINED:
        cam = SetupId(SetupKind.CAMERA_ONLY, setup.camera_label, None,
                      setup.machine_id)
        lid = SetupId(SetupKind.LIDAR_ONLY, None, setup.lidar_label,
                      setup.machine_id)
        t_cam, det_c, trk_c, ro_c = _resolve_timing(cfg, cam)
        t_lid, det_l, trk_l, ro_l = _resolve_timing(cfg, lid)
        if len(t_cam) != len(t_lid):
            raise ValueError(f"setup {setup}: constituent timing lengths differ")
        # Combine readout+detection per frame by policy; tracking runs once
        # on the fused objects, approximated by the per-frame maximum
        # (parallel) or sum (serial) of the constituents.
        det_path_c = [ro_c + d for d in det_c]
        det_path_l = [ro_l + d for d in det_l]
        fused_det = combined_frame_latency(det_path_c, det_path_l,
                                           cfg.fusion_policy)
        fused_trk = combined_frame_latency(trk_c, trk_l, cfg.fusion_policy)
        timings = [
            TimingRecord(frame_index=t.frame_index, t_detection_ms=d,
                         t_tracking_ms=k)
            for t, d, k in zip(t_cam, fused_det, fused_trk)
        ]
        return timings, fused_det, fused_trk, 0.0
    raise MissingInputError(
        f"setup {setup}: no timing log for machine {setup.machine_id}")


def _setup_readout(cfg: RunConfig, setup: SetupId) -> float:
    if setup.kind is SetupKind.CAMERA_ONLY:
        return cfg.sensor(setup.camera_label).readout_ms
    if setup.kind is SetupKind.LIDAR_ONLY:
        return cfg.sensor(setup.lidar_label).readout_ms
    ro_c = cfg.sensor(setup.camera_label).readout_ms
    ro_l = cfg.sensor(setup.lidar_label).readout_ms
    return max(ro_c, ro_l) if cfg.fusion_policy == "parallel" else ro_c + ro_l
