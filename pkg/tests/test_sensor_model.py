import math

import pytest
from hypothesis import given, strategies as st

from infraqa.core import SensorKind, SensorSpec
from infraqa.sensor_model import (EvalConstants, accuracy_norm, camera_gsd,
                                  combine_composite, combine_tracking,
                                  composite_accuracy, lidar_range_error,
                                  localization_accuracy, sensor_accuracy,
                                  sensor_error, single_sensor_breakdown)

CONSTS = EvalConstants()


def camera_spec(width=3840, height=2160, label="C2160"):
    return SensorSpec(kind=SensorKind.CAMERA, label=label, sample_rate_hz=25,
                      width_px=width, height_px=height,
                      hfov_deg=48.1, vfov_deg=27.7)


def lidar_spec(label="L", hor=0.09, vert=0.13, sigma=0.03, layers=300):
    return SensorSpec(kind=SensorKind.LIDAR, label=label, sample_rate_hz=10,
                      vertical_layers=layers, hfov_deg=100, vfov_deg=40,
                      hor_ang_res_deg=hor, vert_ang_res_deg=vert,
                      range_accuracy_m=sigma)


class TestCameraGsd:
    def test_analytic_simple_case(self):
        spec = SensorSpec(kind=SensorKind.CAMERA, label="C", sample_rate_hz=25,
                          width_px=200, height_px=200, hfov_deg=90.0,
                          vfov_deg=1.0)
        assert camera_gsd(spec, 100.0) == pytest.approx(1.0, abs=1e-12)

    def test_high_resolution_camera_at_max_distance(self):
        assert camera_gsd(camera_spec(), 150.0) == pytest.approx(0.0349, abs=5e-5)

    def test_zero_distance_limit(self):
        assert camera_gsd(camera_spec(), 0.0) == 0.0

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            camera_gsd(lidar_spec(), 10.0)


class TestLidarRangeError:
    def test_reduces_to_range_accuracy(self):
        spec = lidar_spec(hor=0.0, vert=0.0, sigma=0.03)
        assert lidar_range_error(spec, 500.0) == pytest.approx(0.03)

    def test_plug_in_arithmetic(self):
        assert lidar_range_error(lidar_spec(), 150.0) == \
            pytest.approx(0.4150, abs=5e-4)

    def test_homogeneous_in_distance_without_sigma(self):
        spec = lidar_spec(sigma=0.0)
        assert lidar_range_error(spec, 300.0) == \
            pytest.approx(2 * lidar_range_error(spec, 150.0))

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            lidar_range_error(camera_spec(), 10.0)


class TestSensorAccuracy:
    def test_zero_error(self):
        assert sensor_accuracy(0.0, CONSTS) == 1.0

    def test_error_at_max_distance(self):
        assert sensor_accuracy(150.0, CONSTS) == 0.0

    def test_floor_at_zero(self):
        assert sensor_accuracy(300.0, CONSTS) == 0.0

    def test_small_error(self):
        assert sensor_accuracy(0.0554, CONSTS) == pytest.approx(0.99963, abs=1e-5)


class TestLocalizationAccuracy:
    def test_zero_errors(self):
        assert localization_accuracy(0.0, 0.0, CONSTS) == 1.0

    def test_camera_defaults(self):
        a = localization_accuracy(CONSTS.camera_e_trans_m,
                                  CONSTS.camera_e_rot_deg, CONSTS)
        assert a == pytest.approx(0.99843, abs=1e-5)

    def test_lidar_defaults(self):
        a = localization_accuracy(CONSTS.lidar_e_trans_m,
                                  CONSTS.lidar_e_rot_deg, CONSTS)
        assert a == pytest.approx(0.99941, abs=1e-5)


class TestComposition:
    def test_composite_identity(self):
        assert composite_accuracy(1, 1, 1) == 1.0

    def test_composite_reference_row(self):
        # high-res lidar reference point: a_s*a_l ~ 0.99904, mAP 0.6243
        assert composite_accuracy(0.99904, 1.0, 0.6243) == \
            pytest.approx(0.6237, abs=5e-5)

    def test_composite_zero_annihilates(self):
        assert composite_accuracy(0.0, 0.9, 0.9) == 0.0

    def test_combine_fixed_point(self):
        assert combine_composite(0.7, 0.7) == pytest.approx(0.7)

    def test_combine_example(self):
        assert combine_composite(0.2, 0.6) == pytest.approx(0.5)

    def test_combine_degenerate_zero(self):
        assert combine_composite(0.0, 0.4) == pytest.approx(0.4)
        assert combine_composite(0.0, 0.0) == 0.0

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_combine_bounds_and_mean_dominance(self, a, b):
        if a + b == 0:
            return
        v = combine_composite(a, b)
        assert min(a, b) - 1e-12 <= v <= max(a, b) + 1e-12
        assert v >= 0.5 * (a + b) - 1e-12

    def test_combine_tracking_mean(self):
        assert combine_tracking(0.2, 0.4) == pytest.approx(0.3)
        assert combine_tracking(0.1032, 0.4270) == pytest.approx(0.2651)


class TestAccuracyNorm:
    def test_reference_values(self):
        assert accuracy_norm(0.6237, 0.4270) == pytest.approx(0.7184, abs=5e-4)
        assert accuracy_norm(0.0857, 0.1290) == pytest.approx(0.3242, abs=5e-4)
        assert accuracy_norm(1.0, 1.0) == 1.0

    @given(st.floats(0.01, 1.0), st.floats(0.01, 1.0),
           st.floats(0.001, 0.2))
    def test_strictly_monotone(self, a, t, delta):
        if a + delta > 1.0:
            return
        assert accuracy_norm(a + delta, t) > accuracy_norm(a, t)
        if t + delta <= 1.0:
            assert accuracy_norm(a, t + delta) > accuracy_norm(a, t)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            accuracy_norm(1.2, 0.5)


class TestBreakdown:
    def test_invariants_hold(self):
        bd = single_sensor_breakdown(lidar_spec(), a_d=0.6243, a_t=0.4270,
                                     consts=CONSTS)
        assert bd.a_sld == pytest.approx(bd.a_s * bd.a_l * bd.a_d, abs=1e-12)
        assert bd.accuracy_norm == pytest.approx(
            (bd.a_sld * bd.a_t) ** 0.25, abs=1e-12)
        assert 0.0 <= bd.accuracy_norm <= 1.0

    def test_pluggable_model_rejects_unknown_name(self):
        with pytest.raises(ValueError, match="unknown sensor error model"):
            sensor_error(lidar_spec(), CONSTS, model="bogus")
