import math

import numpy as np
import pytest

import lidardeskew as ld
from lidardeskew.core import NO_RETURN, MotionIncrement, Pose2, Ray
from lidardeskew.deskew import (
    correct_point,
    deskew_scan,
    pose_for_ray,
    project_scan,
    ray_to_point,
)


def make_scan(ranges, beams=(0.0,), step_deg=90.0, mirror="counterclockwise", t0=0.0):
    cfg = ld.LidarConfig(
        scan_period_Ts=0.1,
        beam_inclinations=beams,
        azimuth_step=math.radians(step_deg),
        mirror_direction=mirror,
    )
    return ld.Scan(cfg, t0, np.asarray(ranges, dtype=float))


class TestRayToPoint:
    def test_axis_aligned(self):
        p = ray_to_point(Ray(0, 0.0, 0.0, 10.0))
        assert (p.x, p.y, p.z) == (10.0, 0.0, 0.0)

    def test_quarter_turn(self):
        p = ray_to_point(Ray(0, 0.0, math.pi / 2, 10.0))
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(10.0)
        assert p.z == 0.0

    def test_inclined_ray(self):
        # direct evaluation of the spherical-to-Cartesian form
        om, al, d = math.pi / 6, math.pi / 4, 2.0
        p = ray_to_point(Ray(0, om, al, d))
        assert p.x == pytest.approx(d * math.cos(om) * math.cos(al))
        assert p.y == pytest.approx(d * math.cos(om) * math.sin(al))
        assert p.z == pytest.approx(d * math.sin(om))
        assert (p.x, p.y, p.z) == pytest.approx((1.22474487, 1.22474487, 1.0), abs=1e-8)

    def test_clockwise_mirror_flips_azimuth(self):
        p = ray_to_point(Ray(0, 0.0, math.pi / 2, 10.0), mirror_sign=-1.0)
        assert p.y == pytest.approx(-10.0)

    def test_no_return_rejected(self):
        with pytest.raises(ValueError):
            ray_to_point(Ray(0, 0.0, 0.0, NO_RETURN))


class TestCorrectPoint:
    def test_identity_pose_is_plain_projection(self):
        ray = Ray(0, 0.1, 1.0, 7.0)
        a = ray_to_point(ray)
        b = correct_point(ray, Pose2(0, 0, 0))
        assert (a.x, a.y, a.z) == (b.x, b.y, b.z)

    def test_pure_translation_offset(self):
        p = correct_point(Ray(0, 0.0, 0.0, 10.0), Pose2(-1.0, 0.0, 0.0))
        assert (p.x, p.y, p.z) == (9.0, 0.0, 0.0)

    def test_quarter_rotation(self):
        p = correct_point(Ray(0, 0.0, 0.0, 10.0), Pose2(0.0, 0.0, math.pi / 2))
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(10.0)

    def test_z_never_rotates(self):
        p = correct_point(Ray(0, 0.3, 0.5, 5.0), Pose2(1.0, -2.0, 2.0))
        assert p.z == pytest.approx(5.0 * math.sin(0.3))


class TestDeskewScan:
    def test_zero_motion_is_bit_identical(self):
        ranges = np.array([[10.0], [20.0], [NO_RETURN], [5.0]])
        scan = make_scan(ranges)
        raw = project_scan(scan)
        corrected, report = deskew_scan(scan, MotionIncrement(0.0, 0.0, 0.1))
        assert np.array_equal(raw.points, corrected.points)
        assert report.max_correction_displacement == 0.0
        assert report.num_points == 3

    def test_no_returns_excluded_but_counted_in_scan(self):
        ranges = np.array([[10.0], [NO_RETURN], [NO_RETURN], [5.0]])
        scan = make_scan(ranges)
        cloud, report = deskew_scan(scan, MotionIncrement(0.5, 0.0, 0.1))
        assert len(cloud) == 2
        assert report.num_points == 2
        assert scan.ranges.size == 4

    def test_translation_gap_at_fifty_kmh(self):
        # vehicle at 50 km/h over a 0.1 s scan: the scan-start ray moves by
        # the full per-scan travel, the last ray barely at all
        dx = 50.0 / 3.6 * 0.1
        ranges = np.full((360, 1), 30.0)
        scan = make_scan(ranges, step_deg=1.0, mirror="clockwise")
        corrected, report = deskew_scan(scan, MotionIncrement(dx, 0.0, 0.1))
        raw = project_scan(scan)
        disp = np.linalg.norm(corrected.points - raw.points, axis=1)
        assert abs(disp[0] - 1.389) < 0.01
        assert report.max_correction_displacement == pytest.approx(dx)
        assert disp[-1] == pytest.approx(dx / 360.0, rel=1e-9)

    def test_rotation_gap_at_fifty_meters(self):
        # 25 deg/s yaw over a 0.1 s scan displaces a 50 m scan-start point
        # by the chord 2 * 50 * sin(dtheta / 2)
        dtheta = math.radians(25.0) * 0.1
        ranges = np.full((360, 1), 50.0)
        scan = make_scan(ranges, step_deg=1.0, mirror="clockwise")
        corrected, _ = deskew_scan(scan, MotionIncrement(0.0, -dtheta, 0.1))
        raw = project_scan(scan)
        gap = float(np.linalg.norm(corrected.points[0] - raw.points[0]))
        assert abs(gap - 2.18) < 0.02
        assert gap == pytest.approx(2 * 50.0 * math.sin(dtheta / 2), abs=1e-9)

    @pytest.mark.parametrize("inc", [MotionIncrement(1.0, 0.0, 0.1), MotionIncrement(0.0, 0.04, 0.1)])
    def test_correction_monotone_in_phase_for_singular_motion(self, inc):
        # for the two singular motions the correction magnitude scales with
        # the remaining fraction; mixed motion adds an azimuth-dependent
        # cross term that is only monotone on average
        ranges = np.full((360, 1), 10.0)
        scan = make_scan(ranges, step_deg=1.0)
        corrected, _ = deskew_scan(scan, inc)
        raw = project_scan(scan)
        disp = np.linalg.norm(corrected.points - raw.points, axis=1)
        assert np.all(np.diff(disp) <= 1e-12)
        assert disp[0] > disp[-1]

    def test_z_preserved_for_horizontal_beams(self):
        ranges = np.full((8, 1), 12.0)
        scan = make_scan(ranges, step_deg=45.0)
        corrected, _ = deskew_scan(scan, MotionIncrement(1.0, 0.1, 0.1))
        assert np.all(corrected.points[:, 2] == 0.0)

    def test_increment_duration_mismatch_rejected(self):
        scan = make_scan(np.full((4, 1), 5.0))
        with pytest.raises(ValueError, match="does not match scan period"):
            deskew_scan(scan, MotionIncrement(1.0, 0.0, 0.2))

    def test_single_ray_path_matches_vectorized_output(self):
        ranges = np.linspace(3.0, 9.0, 8).reshape(8, 1)
        scan = make_scan(ranges, beams=(0.07,), step_deg=45.0, mirror="clockwise")
        inc = MotionIncrement(0.8, -0.05, 0.1)
        cloud, _ = deskew_scan(scan, inc)
        sign = scan.config.mirror_sign
        for k, ray in enumerate(scan.rays()):
            p = correct_point(ray, pose_for_ray(inc, ray), mirror_sign=sign)
            np.testing.assert_allclose(cloud.points[k], [p.x, p.y, p.z], atol=1e-14)

    def test_remission_carried_through(self):
        ranges = np.array([[10.0], [NO_RETURN], [7.0], [5.0]])
        cfg = ld.LidarConfig(0.1, [0.0], math.radians(90.0))
        rem = np.array([[1.0], [NO_RETURN], [2.0], [3.0]])
        scan = ld.Scan(cfg, 0.0, ranges, remission=rem)
        cloud, _ = deskew_scan(scan, MotionIncrement(0.3, 0.01, 0.1))
        np.testing.assert_array_equal(cloud.remission, [1.0, 2.0, 3.0])


class TestSweptWorldAngle:
    def _inc(self, dtheta):
        return MotionIncrement(1.0, dtheta, 0.1)

    def test_zero_yaw_is_exactly_two_pi(self):
        scan = make_scan(np.full((4, 1), 5.0), mirror="clockwise")
        _, report = deskew_scan(scan, self._inc(0.0))
        assert report.swept_world_angle == 2 * math.pi

    def test_clockwise_yaw_with_clockwise_mirror_extends_coverage(self):
        scan = make_scan(np.full((4, 1), 5.0), mirror="clockwise")
        _, report = deskew_scan(scan, self._inc(-0.0436))
        assert report.swept_world_angle == pytest.approx(2 * math.pi + 0.0436)

    def test_opposed_yaw_leaves_blind_wedge(self):
        scan = make_scan(np.full((4, 1), 5.0), mirror="clockwise")
        _, report = deskew_scan(scan, self._inc(+0.0436))
        assert report.swept_world_angle == pytest.approx(2 * math.pi - 0.0436)

    def test_counterclockwise_mirror_flips_the_table(self):
        scan = make_scan(np.full((4, 1), 5.0), mirror="counterclockwise")
        _, report = deskew_scan(scan, self._inc(+0.0436))
        assert report.swept_world_angle == pytest.approx(2 * math.pi + 0.0436)


class TestEquivariance:
    def test_world_placement_commutes_with_deskewing(self):
        # simulating a co-transformed world along a co-transformed trajectory
        # yields the same sensor-frame cloud; placing it with the transformed
        # end pose equals transforming the original world-frame cloud
        cfg = ld.hdl64_config(azimuth_step_deg=2.0, num_beams=8)
        offset = Pose2(5.0, -3.0, 0.7)
        scene_a = ld.Scene(ground=False, posts=(ld.Post(10.0, 1.0, 0.3, 3.0),),
                           fences=(ld.Fence(15.0, -5.0, 15.0, 5.0, 2.0),))
        c, s = math.cos(offset.theta), math.sin(offset.theta)

        def moved(x, y):
            return (offset.x + c * x - s * y, offset.y + s * x + c * y)

        post_b = ld.Post(*moved(10.0, 1.0), 0.3, 3.0)
        f1 = moved(15.0, -5.0)
        f2 = moved(15.0, 5.0)
        scene_b = ld.Scene(ground=False, posts=(post_b,),
                           fences=(ld.Fence(f1[0], f1[1], f2[0], f2[1], 2.0),))

        spec_a = ld.TrajectorySpec.arc(6.0, 0.2, 0.5)
        spec_b = ld.TrajectorySpec.arc(6.0, 0.2, 0.5, start=offset)
        scan_a = ld.simulate_scan(scene_a, spec_a, 0.1, cfg)
        scan_b = ld.simulate_scan(scene_b, spec_b, 0.1, cfg)
        inc = spec_a.increment_over(0.1, 0.2)

        cloud_a, _ = deskew_scan(scan_a, inc)
        cloud_b, _ = deskew_scan(scan_b, inc)
        np.testing.assert_allclose(cloud_a.points, cloud_b.points, atol=1e-9)

        world_a = cloud_a.transformed(spec_a.pose_at(0.2), cfg.sensor_height)
        world_b = cloud_b.transformed(spec_b.pose_at(0.2), cfg.sensor_height)
        np.testing.assert_allclose(
            offset.transform_points(world_a.points), world_b.points, atol=1e-9
        )
