#include "doctest.h"
#include "oracles.hpp"

#include "commands.hpp"

#include <splatedit/image_io.hpp>
#include <splatedit/json_io.hpp>
#include <splatedit/ply.hpp>

#include <fstream>
#include <sstream>

using namespace splatedit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// One demo directory shared by the cases below; each case writes to its own
// output directory.
const testing::TempDir& demo() {
    static const testing::TempDir dir;
    static const bool made = [] {
        REQUIRE(run({"make-demo", "-o", dir.path().string(), "--size", "40"}).code == 0);
        return true;
    }();
    (void)made;
    return dir;
}

std::vector<std::string> with_config(std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), {"-c", (demo() / "config.json").string(), "-o", out.string()});
    return args;
}

}  // namespace

TEST_CASE("sample-pointcloud") {
    const fs::path out = demo() / "points.json";
    REQUIRE(run({"sample-pointcloud", "--scene", (demo() / "scene.ply").string(), "-o", out.string(),
                 "--max-points", "100"})
                .code == 0);
    const PointCloudSample cloud = point_cloud_from_json(load_json(out));
    CHECK(cloud.points.size() == 100);
    CHECK(run({"sample-pointcloud", "--scene", (demo() / "missing.ply").string(), "-o", out.string()}).code ==
          cli::kExitConfig);
}

TEST_CASE("extract writes both trajectory arcs") {
    const fs::path out = demo() / "extract";
    const Run r = run(with_config({"extract"}, out));
    INFO(r.err);
    REQUIRE(r.code == 0);
    const json index = load_json(out / "bundles" / "index.json");
    REQUIRE(index.at("arcs").size() == 2);
    std::size_t views = 0;
    for (const auto& arc : index.at("arcs")) {
        views += arc.at("views").size();
        CHECK(arc.at("conditioning_view_index") == 6);
    }
    CHECK(views == 28);
    CHECK(fs::exists(out / "bundles" / "left_00_mask.png"));
    CHECK(fs::exists(out / "bundles" / "right_13.json"));
    CHECK(fs::exists(out / "bundles" / "coarse.ply"));

    // Re-running gives identical files.
    const auto before = read_file(out / "bundles" / "left_03_background.pfm");
    REQUIRE(run(with_config({"extract"}, out)).code == 0);
    CHECK(read_file(out / "bundles" / "left_03_background.pfm") == before);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == cli::kExitConfig);
    CHECK(run({"bogus"}).code == cli::kExitConfig);
    CHECK(run({"--help"}).code == cli::kExitOk);
    CHECK(run({"extract", "-c", (demo() / "nope.json").string()}).code == cli::kExitConfig);
    CHECK(run(with_config({"extract", "--set", "train.bogus=1"}, demo() / "bad")).code == cli::kExitConfig);
    CHECK(run(with_config({"reconstruct"}, demo() / "empty")).code == cli::kExitConfig);

    const fs::path out = demo() / "transport";
    REQUIRE(run(with_config({"extract", "--n-views", "3"}, out)).code == 0);
    CHECK(run(with_config({"inpaint", "--n-views", "3", "--endpoint", "http://127.0.0.1:9"}, out)).code ==
          cli::kExitTransport);

    json box = load_json(demo() / "bbox.json");
    box["half_extents"][0] = 0.0;
    save_json(box, demo() / "flat_bbox.json");
    const Run flat = run(with_config({"extract", "--bbox", (demo() / "flat_bbox.json").string()}, demo() / "flat"));
    CHECK(flat.code == cli::kExitConfig);
    CHECK(flat.err.find("extent") != std::string::npos);
}

TEST_CASE("zero iterations passes the initial scene through") {
    const fs::path out = demo() / "zero";
    const Run r = run(with_config({"run-all", "--n-views", "4", "--iterations", "0"}, out));
    INFO(r.err);
    REQUIRE(r.code == 0);
    GaussianScene expected = load_ply(demo() / "scene.ply");
    expected.append(load_ply(out / "bundles" / "coarse.ply"));
    CHECK(load_ply(out / "edited.ply") == expected);
    for (const char* f : {"report_consistency.json", "report_consistency.csv", "report_background.json",
                          "report_background.csv", "contact_sheet.png", "inpainted/mock_object.ply",
                          "inpainted/conditioning_left.png", "inpainted/conditioning_right.png"})
        CHECK(fs::exists(out / f));
    CHECK(load_json(out / "report_background.json").at("region") == "unmasked");
}

TEST_CASE("reconstruct is deterministic and resumable") {
    const fs::path out = demo() / "resume";
    const auto args = with_config({"--n-views", "4", "--iterations", "30", "--set", "checkpoint_interval=10",
                                   "--set", "log_interval=5"},
                                  out);
    auto cmd = [&](std::vector<std::string> head) {
        head.insert(head.end(), args.begin(), args.end());
        return run(head);
    };
    REQUIRE(cmd({"extract"}).code == 0);
    REQUIRE(cmd({"inpaint"}).code == 0);
    REQUIRE(cmd({"reconstruct"}).code == 0);
    const auto first = read_file(out / "edited.ply");
    REQUIRE(cmd({"reconstruct"}).code == 0);
    CHECK(read_file(out / "edited.ply") == first);
    REQUIRE(fs::exists(out / "checkpoints" / "iter_000010.ply"));
    REQUIRE(cmd({"reconstruct", "--resume", (out / "checkpoints" / "iter_000010").string()}).code == 0);
    CHECK(read_file(out / "edited.ply") == first);

    std::ifstream log(out / "train_log.jsonl");
    std::string line;
    std::getline(log, line);
    CHECK(json::parse(line).at("iter") == 1);
}
