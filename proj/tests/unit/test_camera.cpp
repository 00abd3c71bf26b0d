#include "doctest.h"
#include "oracles.hpp"

#include <splatedit/camera.hpp>
#include <splatedit/errors.hpp>
#include <splatedit/image.hpp>
#include <splatedit/json_io.hpp>

#include <cmath>

using namespace splatedit;

namespace {

Camera front_camera(int size = 128, double f = 100.0) {
    Intrinsics k{f, f, 0.5 * (size - 1), 0.5 * (size - 1), size, size};
    return Camera(k, Mat3d::Identity(), Vec3d::Zero());
}

OrientedBBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    OrientedBBox b;
    b.center = Vec3d(u(rng), u(rng), u(rng));
    b.half_extents = Vec3d(0.2 + 0.5 * (u(rng) + 1), 0.2 + 0.5 * (u(rng) + 1), 0.2 + 0.5 * (u(rng) + 1));
    b.rotation = Vec4d(u(rng), u(rng), u(rng), u(rng)).normalized();
    return b;
}

}  // namespace

TEST_CASE("camera validation") {
    Intrinsics k{100, 100, 10, 10, 20, 20};
    Mat3d bad = Mat3d::Identity();
    bad(0, 1) = 0.1;
    CHECK_THROWS_AS(Camera(k, bad, Vec3d::Zero()), ParameterError);
    CHECK_THROWS_AS(Camera(k, -Mat3d::Identity(), Vec3d::Zero()), ParameterError);
    k.fx = 0;
    CHECK_THROWS_AS(Camera(k, Mat3d::Identity(), Vec3d::Zero()), ParameterError);
}

TEST_CASE("look_at follows the OpenCV convention") {
    const Intrinsics k = Intrinsics::from_fov(64, 48, 60);
    const Camera cam = Camera::look_at(k, Vec3d(0, -5, 0), Vec3d::Zero(), Vec3d::UnitZ());
    CHECK((cam.forward() - Vec3d::UnitY()).norm() < 1e-12);
    const Vec3d up_point = cam.world_to_camera(Vec3d(0, 0, 1));
    CHECK(up_point.y() < 0.0);  // world up is image up (-y)
    const Vec3d right_point = cam.world_to_camera(Vec3d(1, 0, 0));
    CHECK(right_point.x() > 0.0);
    CHECK((cam.position() - Vec3d(0, -5, 0)).norm() < 1e-12);
}

TEST_CASE("trajectory with the default 14 views over 120 degrees") {
    OrientedBBox box;
    box.center = Vec3d(0.3, -0.2, 0.5);
    box.half_extents = Vec3d(0.4, 0.3, 0.5);
    box.rotation = Vec4d(std::cos(0.2), 0.0, 0.0, std::sin(0.2));
    const Intrinsics k = Intrinsics::from_fov(64, 64, 60);
    for (TrajectorySide side : {TrajectorySide::left, TrajectorySide::right, TrajectorySide::full}) {
        TrajectorySpec spec;
        spec.side = side;
        const auto az = trajectory_azimuths(spec);
        const auto cams = make_trajectory(box, spec, k);
        REQUIRE(cams.size() == 14);
        const double step = deg_to_rad(120.0 / 13.0);
        for (std::size_t i = 1; i < az.size(); ++i) CHECK(std::abs(az[i] - az[i - 1] - step) <= 1e-9);
        const double radius = 2.5 * box.half_extents.maxCoeff();
        const Mat3d r = box.rotation_matrix();
        for (const Camera& c : cams) {
            const Vec3d to_center = (box.center - c.position()).normalized();
            CHECK(std::abs(to_center.dot(c.forward()) - 1.0) <= 1e-9);
            const Vec3d local = r.transpose() * (c.position() - box.center);
            CHECK(std::hypot(local.x(), local.y()) == doctest::Approx(radius).epsilon(1e-12));
            CHECK(local.z() == doctest::Approx(radius * std::tan(deg_to_rad(15.0))).epsilon(1e-12));
            CHECK(std::abs(c.rotation().determinant() - 1.0) < 1e-9);
            CHECK((c.rotation() * c.rotation().transpose() - Mat3d::Identity()).norm() < 1e-9);
        }
    }
}

TEST_CASE("trajectory sides cover adjacent arcs") {
    TrajectorySpec spec;
    spec.side = TrajectorySide::left;
    const auto left = trajectory_azimuths(spec);
    spec.side = TrajectorySide::right;
    const auto right = trajectory_azimuths(spec);
    CHECK(left.back() == doctest::Approx(right.front()));
    CHECK(right.back() - left.front() == doctest::Approx(deg_to_rad(240.0)));
}

TEST_CASE("trajectory rejects degenerate specs") {
    const OrientedBBox box;
    const Intrinsics k = Intrinsics::from_fov(32, 32, 60);
    TrajectorySpec spec;
    spec.n_views = 2;
    spec.arc_degrees = 0;
    CHECK_THROWS_AS(make_trajectory(box, spec, k), ParameterError);
    spec.arc_degrees = 90;
    spec.radius = 0.0;
    CHECK_THROWS_AS(make_trajectory(box, spec, k), ParameterError);
    spec.radius = -1.0;
    CHECK_THROWS_AS(make_trajectory(box, spec, k), ParameterError);
    spec.radius.reset();
    spec.n_views = 1;
    CHECK_THROWS_AS(make_trajectory(box, spec, k), ParameterError);
}

TEST_CASE("central camera index") {
    CHECK(central_index(14) == 6);
    CHECK(central_index(15) == 7);
    CHECK(central_index(1) == 0);
    CHECK_THROWS_AS(central_index(0), ParameterError);
    const Intrinsics k = Intrinsics::from_fov(16, 16, 60);
    const auto cams = make_trajectory(OrientedBBox{}, TrajectorySpec{}, k);
    CHECK(central_camera(cams) == cams[6]);
    CHECK_THROWS_AS(central_camera(std::span<const Camera>{}), ParameterError);
}

TEST_CASE("unit cube at depth 5 projects to a centered square") {
    OrientedBBox box;
    box.center = Vec3d(0, 0, 5);
    box.half_extents = Vec3d(0.5, 0.5, 0.5);
    const Camera cam = front_camera();
    const Mask m = project_bbox_mask(box, cam);
    // The nearest face (z = 4.5) bounds the silhouette: side 100 / 4.5 px.
    const double half = 0.5 * 100.0 / 4.5;
    int min_x = 1000, max_x = -1, min_y = 1000, max_y = -1;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x)
            if (m.at(x, y) > 0.5) {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
    const double c = 63.5;
    CHECK(min_x == static_cast<int>(std::ceil(c - half)));
    CHECK(max_x == static_cast<int>(std::floor(c + half)));
    CHECK(min_y == min_x);
    CHECK(max_y == max_x);
    CHECK(mask_count(m) == static_cast<std::size_t>((max_x - min_x + 1) * (max_y - min_y + 1)));
    CHECK(mask_count(m) == mask_count(testing::oracle_box_mask(box, cam)));
}

TEST_CASE("box behind the camera gives an empty mask") {
    OrientedBBox box;
    box.center = Vec3d(0, 0, -5);
    CHECK(mask_count(project_bbox_mask(box, front_camera())) == 0);
}

TEST_CASE("box straddling the camera plane is clipped, not dropped") {
    OrientedBBox box;
    box.center = Vec3d(0, 0, 0.5);
    box.half_extents = Vec3d(0.3, 0.3, 1.0);
    const Mask m = project_bbox_mask(box, front_camera(64, 50));
    CHECK(mask_count(m) > 0);
    CHECK(m.at(32, 32) == 1.0);
}

TEST_CASE("hull mask matches a ray-casting oracle") {
    std::mt19937_64 rng(11);
    int cases = 0;
    while (cases < 40) {
        const Camera cam = testing::random_camera(rng, 48, 40);
        const OrientedBBox box = random_box(rng);
        bool in_front = true;
        for (const auto& c : box.corners()) in_front = in_front && cam.world_to_camera(c).z() > kNearPlane;
        if (!in_front) continue;
        ++cases;
        const Mask m = project_bbox_mask(box, cam);
        const Mask oracle = testing::oracle_box_mask(box, cam);
        std::size_t mismatches = 0;
        for (std::size_t p = 0; p < m.pixel_count(); ++p) mismatches += m.data()[p] != oracle.data()[p];
        CHECK(mismatches == 0);
    }
}

TEST_CASE("Gaussian centers inside the box land inside the mask") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Camera cam = testing::random_camera(rng, 64, 64);
        const OrientedBBox box = random_box(rng);
        const Mask m = project_bbox_mask(box, cam);
        for (int k = 0; k < 200; ++k) {
            const Vec3d local(u(rng) * box.half_extents.x(), u(rng) * box.half_extents.y(),
                              u(rng) * box.half_extents.z());
            const Vec3d p = box.center + box.rotation_matrix() * local;
            const Vec3d pc = cam.world_to_camera(p);
            if (pc.z() <= kNearPlane) continue;
            const Vec2d px = cam.project(pc);
            const int x = static_cast<int>(std::lround(px.x())), y = static_cast<int>(std::lround(px.y()));
            if (x < 0 || y < 0 || x >= 64 || y >= 64) continue;
            // The pixel containing the point: its center may sit just outside
            // the silhouette, so test the rounded pixel against a 1-px dilation.
            CHECK(dilate(m, 1).at(x, y) == 1.0);
        }
    }
}

TEST_CASE("mask grows monotonically with the box") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Camera cam = testing::random_camera(rng, 40, 40);
        OrientedBBox small = random_box(rng);
        OrientedBBox big = small;
        big.half_extents *= 1.4;
        const Mask a = project_bbox_mask(small, cam), b = project_bbox_mask(big, cam);
        for (std::size_t p = 0; p < a.pixel_count(); ++p) CHECK(a.data()[p] <= b.data()[p]);
    }
}

TEST_CASE("rectangle mode covers the hull with its bounding rectangle") {
    std::mt19937_64 rng(2);
    const Camera cam = testing::random_camera(rng, 64, 64);
    const OrientedBBox box = random_box(rng);
    const Mask hull = project_bbox_mask(box, cam, MaskMode::hull);
    const Mask rect = project_bbox_mask(box, cam, MaskMode::rectangle);
    for (std::size_t p = 0; p < hull.pixel_count(); ++p) CHECK(hull.data()[p] <= rect.data()[p]);
    CHECK(mask_count(rect) >= mask_count(hull));
}

TEST_CASE("point_in_bbox agrees with a transform oracle") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const OrientedBBox box = random_box(rng);
    CHECK(point_in_bbox(box, box.center));
    CHECK_FALSE(point_in_bbox(box, box.center + box.rotation_matrix() * Vec3d(2 * box.half_extents.x(), 0, 0)));
    int inside = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3d p = box.center + Vec3d(u(rng), u(rng), u(rng)) * box.half_extents.minCoeff();
        const bool expected = testing::oracle_point_in_bbox(box, p);
        CHECK(point_in_bbox(box, p) == expected);
        inside += expected;
    }
    CHECK(inside > 100);
}

TEST_CASE("bbox JSON schema") {
    std::mt19937_64 rng(9);
    const OrientedBBox box = random_box(rng);
    CHECK(bbox_from_json(bbox_to_json(box)) == box);
    auto j = bbox_to_json(box);
    j["extra"] = 1;
    CHECK_THROWS_AS(bbox_from_json(j), ParameterError);
    j = bbox_to_json(box);
    j["half_extents"][1] = 0.0;
    CHECK_THROWS_AS(bbox_from_json(j), ParameterError);
    j = bbox_to_json(box);
    j.erase("rotation_wxyz");
    CHECK_THROWS_AS(bbox_from_json(j), ParameterError);
}

TEST_CASE("camera JSON round-trip") {
    std::mt19937_64 rng(6);
    const Camera cam = testing::random_camera(rng, 33, 17);
    const Camera back = camera_from_json(camera_to_json(cam));
    CHECK(back.intrinsics() == cam.intrinsics());
    CHECK((back.rotation() - cam.rotation()).norm() == 0.0);
    CHECK((back.translation() - cam.translation()).norm() == 0.0);
}
