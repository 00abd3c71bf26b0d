#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"

#include <splatedit/rasterizer.hpp>

using namespace splatedit;

namespace {

GaussianScene small_scene(std::mt19937_64& rng, const Camera& cam, std::size_t count, int sh_degree) {
    testing::RandomSceneOptions opt;
    opt.count = count;
    opt.sh_degree = sh_degree;
    opt.min_scale = 0.1;
    opt.max_scale = 0.4;
    opt.min_depth_gap = 0.01;
    return testing::random_scene(rng, cam, opt);
}

}  // namespace

TEST_CASE("mean intensity of a three-Gaussian scene") {
    std::mt19937_64 rng(100);
    const Camera cam = testing::random_camera(rng, 32, 32);
    const GaussianScene scene = small_scene(rng, cam, 3, 0);
    const auto check =
        testing::finite_difference_check(scene, cam, Vec3d(0.1, 0.2, 0.3), testing::mean_intensity_upstream(32, 32));
    INFO(check.worst);
    CHECK(check.checked > 20);
    CHECK(check.max_relative_error <= 1e-2);
}

TEST_CASE("random upstream gradients on randomized scenes") {
    std::mt19937_64 rng(200);
    for (int trial = 0; trial < 6; ++trial) {
        const Camera cam = testing::random_camera(rng, 32, 32);
        const GaussianScene scene = small_scene(rng, cam, 1 + rng() % 10, static_cast<int>(rng() % 2));
        const auto up = testing::random_upstream(rng, 32, 32);
        const auto check = testing::finite_difference_check(scene, cam, Vec3d(0.5, 0.5, 0.5), up);
        INFO("trial " << trial << " worst " << check.worst);
        CHECK(check.checked > 0);
        CHECK(check.max_relative_error <= 1e-2);
    }
}

TEST_CASE("depth gradients where the depth is defined") {
    std::mt19937_64 rng(250);
    for (int trial = 0; trial < 4; ++trial) {
        const Camera cam = testing::random_camera(rng, 32, 32);
        const GaussianScene scene = small_scene(rng, cam, 2 + rng() % 8, 0);
        const auto up = testing::random_depth_upstream(rng, render_fast(scene, cam, Vec3d::Zero()));
        const auto check = testing::finite_difference_check(scene, cam, Vec3d::Zero(), up);
        INFO("trial " << trial << " worst " << check.worst);
        CHECK(check.checked > 0);
        CHECK(check.max_relative_error <= 1e-2);
    }
}

TEST_CASE("zero upstream gives zero gradient") {
    std::mt19937_64 rng(300);
    const Camera cam = testing::random_camera(rng, 24, 24);
    const GaussianScene scene = small_scene(rng, cam, 5, 1);
    RenderOutputGrad up;
    up.color = Image(24, 24, 3);
    const RenderGrad g = render_backward(scene, cam, Vec3d::Zero(), up);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        CHECK(g.positions[i].norm() == 0.0);
        CHECK(g.rotations[i].norm() == 0.0);
        CHECK(g.log_scales[i].norm() == 0.0);
        CHECK(g.opacity_logits[i] == 0.0);
    }
    for (double v : g.sh_coeffs) CHECK(v == 0.0);
}

TEST_CASE("Gaussians outside the frustum get no gradient") {
    std::mt19937_64 rng(400);
    const Camera cam = testing::random_camera(rng, 24, 24);
    GaussianScene scene = small_scene(rng, cam, 3, 0);
    Gaussian behind = scene.gaussian(0);
    behind.position = (cam.position() - 2.0 * cam.forward()).cast<float>();
    scene.push_back(behind);
    const RenderGrad g = render_backward(scene, cam, Vec3d::Zero(), testing::mean_intensity_upstream(24, 24));
    CHECK(g.visible.back() == 0);
    CHECK(g.positions.back().norm() == 0.0);
    CHECK(g.opacity_logits.back() == 0.0);
    CHECK(g.means2d.back().norm() == 0.0);
}

TEST_CASE("backward reports the screen-space position gradient") {
    std::mt19937_64 rng(500);
    const Camera cam = testing::random_camera(rng, 32, 32);
    const GaussianScene scene = small_scene(rng, cam, 4, 0);
    const RenderGrad g = render_backward(scene, cam, Vec3d::Zero(), testing::random_upstream(rng, 32, 32));
    std::size_t visible = 0;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        visible += g.visible[i];
        if (g.visible[i]) CHECK(g.means2d[i].norm() > 0.0);
    }
    CHECK(visible > 0);
}
