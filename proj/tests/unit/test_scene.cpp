#include "doctest.h"
#include "oracles.hpp"

#include <splatedit/errors.hpp>
#include <splatedit/scene.hpp>

#include <algorithm>
#include <cmath>

using namespace splatedit;

namespace {

GaussianScene line_scene(std::size_t n) {
    GaussianScene s;
    for (std::size_t i = 0; i < n; ++i) {
        Gaussian g;
        g.position = Vec3f(static_cast<float>(i), 0, 0);
        g.sh = {0.5f, -0.5f, 3.0f};
        s.push_back(g);
    }
    return s;
}

}  // namespace

TEST_CASE("push_back keeps arrays aligned and normalizes quaternions") {
    GaussianScene s(1);
    Gaussian g;
    g.rotation = Vec4f(2, 0, 0, 0);
    g.sh.assign(12, 0.1f);
    s.push_back(g);
    CHECK(s.size() == 1);
    CHECK(s.sh_coeffs().size() == 12);
    CHECK(s.rotations()[0].norm() == doctest::Approx(1.0).epsilon(1e-7));
    g.sh.resize(3);
    CHECK_THROWS_AS(s.push_back(g), ParameterError);
}

TEST_CASE("setters keep unit quaternions") {
    GaussianScene s = line_scene(3);
    s.set_rotation(1, Vec4f(0.3f, 4.0f, -1.0f, 0.2f));
    for (const auto& q : s.rotations()) CHECK(std::abs(q.norm() - 1.0f) <= 1e-6f);
    s.mutable_rotations()[2] = Vec4f(0, 0, 3, 0);
    s.renormalize_rotations();
    CHECK(std::abs(s.rotations()[2].norm() - 1.0f) <= 1e-6f);
}

TEST_CASE("validate reports the first bad index") {
    GaussianScene s = line_scene(5);
    s.mutable_opacity_logits()[3] = NAN;
    try {
        s.validate();
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.index() == 3);
    }
}

TEST_CASE("opacity is the sigmoid of the logit") {
    GaussianScene s = line_scene(1);
    CHECK(s.opacity(0) == 0.5);
    s.set_opacity_logit(0, 40.0f);
    CHECK(s.opacity(0) < 1.0 + 1e-15);
}

TEST_CASE("base color clamps the degree-0 term") {
    GaussianScene s = line_scene(1);
    const Vec3d c = s.base_color(0);
    CHECK(c[0] == doctest::Approx(sh0_to_rgb(0.5)));
    CHECK(c[1] == doctest::Approx(sh0_to_rgb(-0.5)));
    CHECK(c[2] == 1.0);
}

TEST_CASE("sample_point_cloud without subsampling returns every center") {
    const GaussianScene s = line_scene(10);
    const auto cloud = sample_point_cloud(s, 10);
    REQUIRE(cloud.points.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(cloud.points[i] == s.positions()[i]);
}

TEST_CASE("sample_point_cloud strides uniformly") {
    const GaussianScene s = line_scene(100);
    const auto cloud = sample_point_cloud(s, 10);
    REQUIRE(cloud.points.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(cloud.points[i].x() == static_cast<float>(10 * i));
    CHECK(cloud.colors.size() == cloud.points.size());
}

TEST_CASE("sample_point_cloud output is a subset of the scene") {
    std::mt19937_64 rng(3);
    const GaussianScene s = testing::random_io_scene(rng, 777, 0);
    for (std::size_t max_points : {1u, 13u, 500u, 777u, 2000u}) {
        const auto cloud = sample_point_cloud(s, max_points);
        CHECK(cloud.points.size() == std::min<std::size_t>(777, max_points));
        for (const auto& p : cloud.points) {
            CHECK(std::find(s.positions().begin(), s.positions().end(), p) != s.positions().end());
        }
        for (const auto& c : cloud.colors) CHECK((c.minCoeff() >= 0.0f && c.maxCoeff() <= 1.0f));
    }
    CHECK(sample_point_cloud(GaussianScene{}, 5).points.empty());
}

TEST_CASE("select and append") {
    const GaussianScene s = line_scene(4);
    const std::vector<std::size_t> idx{3, 1, 1};
    GaussianScene picked = s.select(idx);
    CHECK(picked.size() == 3);
    CHECK(picked.positions()[0].x() == 3.0f);
    picked.append(s);
    CHECK(picked.size() == 7);
    CHECK_THROWS_AS(picked.append(GaussianScene(2)), ParameterError);
}
