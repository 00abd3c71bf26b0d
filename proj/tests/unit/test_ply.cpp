#include "doctest.h"
#include "oracles.hpp"

#include <splatedit/errors.hpp>
#include <splatedit/image_io.hpp>
#include <splatedit/json_io.hpp>
#include <splatedit/ply.hpp>

#include <cmath>
#include <fstream>

using namespace splatedit;
using splatedit::testing::TempDir;

namespace {

void write_raw(const std::filesystem::path& p, const std::string& header, const std::vector<float>& values) {
    std::ofstream out(p, std::ios::binary);
    out << header;
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
}

std::string header(std::size_t n, const std::vector<std::string>& fields) {
    std::string h = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(n) + "\n";
    for (const auto& f : fields) h += "property float " + f + "\n";
    return h + "end_header\n";
}

const std::vector<std::string> kDegree0 = {"x",       "y",       "z",       "nx",    "ny",    "nz",
                                           "f_dc_0",  "f_dc_1",  "f_dc_2",  "opacity", "scale_0", "scale_1",
                                           "scale_2", "rot_0",   "rot_1",   "rot_2", "rot_3"};

}  // namespace

TEST_CASE("single vertex with zero opacity logit has opacity one half") {
    TempDir dir;
    write_raw(dir / "one.ply", header(1, kDegree0), {1, 2, 3, 0, 0, 0, 0.1f, 0.2f, 0.3f, 0.0f, -2, -2, -2, 1, 0, 0, 0});
    const GaussianScene s = load_ply(dir / "one.ply");
    REQUIRE(s.size() == 1);
    CHECK(s.opacity(0) == 0.5);
    CHECK(s.positions()[0] == Vec3f(1, 2, 3));
}

TEST_CASE("fixture written by an independent exporter loads") {
    const auto path = testing::data_dir() / "fixture_4096.ply";
    const GaussianScene s = load_ply(path);
    const auto meta = load_json(path.string() + ".samples.json");
    CHECK(s.size() == 4096);
    CHECK(s.sh_degree() == meta.at("sh_degree").get<int>());
    s.validate();
    for (const auto& q : s.rotations()) CHECK(std::abs(q.norm() - 1.0f) <= 1e-6f);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double o = s.opacity(i);
        CHECK((o > 0.0 && o < 1.0));
    }
    const int rest = s.sh_coeffs_per_gaussian() - 1;
    for (const auto& sample : meta.at("samples")) {
        const auto i = sample.at("index").get<std::size_t>();
        for (int a = 0; a < 3; ++a) {
            CHECK(s.positions()[i][a] == sample.at("position")[a].get<float>());
            CHECK(s.log_scales()[i][a] == sample.at("scale")[a].get<float>());
            CHECK(s.sh_of(i)[a] == sample.at("f_dc")[a].get<float>());
        }
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < rest; ++k)
                CHECK(s.sh_of(i)[3 * (k + 1) + c] == sample.at("f_rest")[c * rest + k].get<float>());
        CHECK(s.opacity_logits()[i] == sample.at("opacity").get<float>());
        Vec4f q;
        for (int a = 0; a < 4; ++a) q[a] = sample.at("rotation")[a].get<float>();
        CHECK((s.rotations()[i] - q).cwiseAbs().maxCoeff() <= 1e-6f);
    }
}

TEST_CASE("canonical file round-trips byte for byte") {
    TempDir dir;
    const auto path = testing::data_dir() / "fixture_4096.ply";
    save_ply(load_ply(path), dir / "a.ply");
    save_ply(load_ply(dir / "a.ply"), dir / "b.ply");
    CHECK(read_file(dir / "a.ply") == read_file(dir / "b.ply"));
    CHECK(read_file(dir / "a.ply") == read_file(path));
}

TEST_CASE("save then load reproduces scenes exactly") {
    TempDir dir;
    SUBCASE("empty scene") {
        save_ply(GaussianScene{}, dir / "empty.ply");
        const GaussianScene s = load_ply(dir / "empty.ply");
        CHECK(s.size() == 0);
    }
    SUBCASE("two Gaussians") {
        std::mt19937_64 rng(1);
        const GaussianScene s = testing::random_io_scene(rng, 2, 0);
        save_ply(s, dir / "two.ply");
        CHECK(load_ply(dir / "two.ply") == s);
    }
    SUBCASE("10k random Gaussians at every SH degree") {
        for (int degree = 0; degree <= kMaxShDegree; ++degree) {
            std::mt19937_64 rng(10 + degree);
            const GaussianScene s = testing::random_io_scene(rng, 10000, degree);
            save_ply(s, dir / "big.ply");
            const GaussianScene back = load_ply(dir / "big.ply");
            CHECK(back == s);
        }
    }
}

TEST_CASE("field order in the file does not matter") {
    TempDir dir;
    std::vector<std::string> shuffled = kDegree0;
    std::reverse(shuffled.begin(), shuffled.end());
    shuffled.insert(shuffled.begin() + 3, "custom");
    // Values follow the shuffled order: rot_3 .. x with an extra property.
    std::vector<float> v = {0, 0, 0, 1, -1, -2, -3, 0.5f, 0.3f, 0.2f, 0.1f, 0, 0, 0, 7, 8, 9};
    v.insert(v.begin() + 3, 42.0f);
    write_raw(dir / "shuffled.ply", header(1, shuffled), v);
    const GaussianScene s = load_ply(dir / "shuffled.ply");
    CHECK(s.positions()[0] == Vec3f(9, 8, 7));
    CHECK(s.log_scales()[0] == Vec3f(-3, -2, -1));
    CHECK(s.opacity_logits()[0] == 0.5f);
    CHECK(s.rotations()[0] == Vec4f(1, 0, 0, 0));
}

TEST_CASE("malformed headers name the missing field") {
    TempDir dir;
    std::vector<std::string> fields = kDegree0;
    fields.erase(std::find(fields.begin(), fields.end(), "scale_1"));
    write_raw(dir / "bad.ply", header(1, fields), std::vector<float>(fields.size(), 0.0f));
    try {
        load_ply(dir / "bad.ply");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("scale_1") != std::string::npos);
    }
    std::ofstream(dir / "ascii.ply") << "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
    CHECK_THROWS_AS(load_ply(dir / "ascii.ply"), FormatError);
    CHECK_THROWS_AS(load_ply(dir / "missing.ply"), IoError);
}

TEST_CASE("non-finite values raise a data error with the index") {
    TempDir dir;
    std::vector<float> v;
    for (int i = 0; i < 3; ++i) {
        std::vector<float> row = {0, 0, 0, 0, 0, 0, 0.1f, 0.2f, 0.3f, 0.0f, -2, -2, -2, 1, 0, 0, 0};
        if (i == 2) row[10] = INFINITY;
        v.insert(v.end(), row.begin(), row.end());
    }
    write_raw(dir / "inf.ply", header(3, kDegree0), v);
    try {
        load_ply(dir / "inf.ply");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("truncated payload is a format error") {
    TempDir dir;
    write_raw(dir / "short.ply", header(2, kDegree0), std::vector<float>(kDegree0.size() + 3, 0.0f));
    CHECK_THROWS_AS(load_ply(dir / "short.ply"), FormatError);
}

TEST_CASE("unwritable path is an I/O error") {
    CHECK_THROWS_AS(save_ply(GaussianScene{}, "/nonexistent_dir/x/scene.ply"), IoError);
}
