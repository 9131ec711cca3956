"""Quality-assessment toolkit for roadside infrastructure sensor setups."""

from .core import (Box3D, FrameRecord, MachineProfile, ObjectClass,
                   ObjectRecord, QualityVector, SensorKind, SensorSpec,
                   SequenceRecord, SetupId, SetupKind, TimingRecord,
                   bev_corners, validate_sequence)
from .geometry import convex_intersection_area, iou_3d, iou_bev
from .detection import APResult, average_precision, map_at_05, match_frame, per_frame_ad
from .tracking import HotaResult, hota_3d, optimal_assignment
from .sensor_model import (AccuracyBreakdown, EvalConstants, accuracy_norm,
                           camera_gsd, combine_composite, combine_tracking,
                           composite_accuracy, lidar_range_error,
                           localization_accuracy, sensor_accuracy)
from .pipeline import (LatencyBreakdown, ReliabilityBreakdown, SetupResult,
                       build_quality_vector, enumerate_setups, evaluate_all,
                       latency_norm, reliability_norm_batch, reliability_raw,
                       total_latency)
from .synth import (CorruptionLog, ScenarioConfig, corrupt_detections,
                    generate_scenario, simulate_timing)

__version__ = "0.1.0"
