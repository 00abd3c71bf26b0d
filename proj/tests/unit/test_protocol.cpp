#include "doctest.h"
#include "oracles.hpp"

#include <splatedit/errors.hpp>
#include <splatedit/protocol.hpp>
#include <splatedit/synthetic.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace splatedit;

namespace {

std::vector<ViewBundle> small_bundles() {
    static const std::vector<ViewBundle> bundles = [] {
        const SyntheticRoom room = make_synthetic_room(32);
        TrajectorySpec spec;
        spec.n_views = 3;
        const auto cams = make_trajectory(room.bbox, spec, room.intrinsics);
        return extract_view_bundles(room.scene, seed_coarse_prior(room.bbox, 100, 1), room.bbox, cams);
    }();
    return bundles;
}

InpaintRequest small_request() {
    InpaintRequest r;
    r.bundles = small_bundles();
    r.prompt = "a snowman";
    r.seed = 12;
    r.conditioning_view_index = 1;
    return r;
}

InpaintResponse echo(const InpaintRequest& r) {
    InpaintResponse out;
    out.seed = r.seed;
    for (const auto& b : r.bundles) out.images.push_back(b.background);
    return out;
}

}  // namespace

TEST_CASE("base64") {
    CHECK(base64_encode({}) == "");
    CHECK(base64_encode({'f'}) == "Zg==");
    CHECK(base64_encode({'f', 'o'}) == "Zm8=");
    CHECK(base64_encode({'f', 'o', 'o', 'b', 'a', 'r'}) == "Zm9vYmFy");
    std::mt19937_64 rng(1);
    for (int n = 0; n < 40; ++n) {
        std::vector<std::uint8_t> bytes(n);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
    CHECK_THROWS_AS(base64_decode("Zm9"), ProtocolError);
    CHECK_THROWS_AS(base64_decode("Zm9v!mFy"), ProtocolError);
}

TEST_CASE("request encoding round-trips within quantization") {
    const InpaintRequest r = small_request();
    const InpaintRequest back = decode_request(encode_request(r));
    CHECK(back.prompt == r.prompt);
    CHECK(back.seed == r.seed);
    CHECK(back.conditioning_view_index == r.conditioning_view_index);
    REQUIRE(back.bundles.size() == r.bundles.size());
    for (std::size_t i = 0; i < r.bundles.size(); ++i) {
        const auto& a = r.bundles[i];
        const auto& b = back.bundles[i];
        CHECK(b.mask == a.mask);
        CHECK((b.camera.rotation() - a.camera.rotation()).norm() == 0.0);
        for (std::size_t k = 0; k < a.background.size(); ++k)
            CHECK(std::abs(b.background.data()[k] - a.background.data()[k]) <= 0.5 / 255 + 1e-12);
        double lo = 1e300, hi = 0;
        for (double d : a.depth.data())
            if (d > 0) lo = std::min(lo, d), hi = std::max(hi, d);
        for (std::size_t k = 0; k < a.depth.size(); ++k) {
            CHECK((b.depth.data()[k] > 0) == (a.depth.data()[k] > 0));
            CHECK(std::abs(b.depth.data()[k] - a.depth.data()[k]) <= (hi - lo) / 65535.0 + 1e-9);
        }
    }
}

TEST_CASE("schema violations are rejected") {
    CHECK_THROWS_AS(decode_request("not json"), ProtocolError);
    auto j = nlohmann::json::parse(encode_request(small_request()));
    j["version"] = 2;
    CHECK_THROWS_AS(decode_request(j.dump()), ProtocolError);
    j = nlohmann::json::parse(encode_request(small_request()));
    j.erase("views");
    CHECK_THROWS_AS(decode_request(j.dump()), ProtocolError);
    CHECK_THROWS_AS(decode_response("{\"version\":1}"), ProtocolError);
}

TEST_CASE("response encoding round-trips") {
    InpaintResponse r = echo(small_request());
    const InpaintResponse back = decode_response(encode_response(r));
    CHECK(back.seed == 12);
    REQUIRE(back.images.size() == r.images.size());
    for (std::size_t i = 0; i < r.images.size(); ++i)
        for (std::size_t k = 0; k < r.images[i].size(); ++k)
            CHECK(std::abs(back.images[i].data()[k] - r.images[i].data()[k]) <= 0.5 / 255 + 1e-12);
}

TEST_CASE("client and in-process server") {
    InpaintServer server(echo);
    const int port = server.start();
    CHECK(port > 0);
    HttpInpainter client(server.url());
    const auto health = nlohmann::json::parse(client.health());
    CHECK(health.at("status") == "ok");
    CHECK(health.at("version") == kProtocolVersion);

    const InpaintRequest req = small_request();
    const InpaintResponse raw = client.submit(req);
    CHECK(raw.seed == req.seed);
    CHECK(raw.images.size() == req.bundles.size());
    const InpaintResponse composited = inpaint(req, client);
    for (std::size_t i = 0; i < req.bundles.size(); ++i) {
        const auto& b = req.bundles[i];
        for (int y = 0; y < b.mask.height(); ++y)
            for (int x = 0; x < b.mask.width(); ++x)
                if (b.mask.at(x, y) == 0.0) CHECK(composited.images[i].at(x, y, 0) == b.background.at(x, y, 0));
    }
    CHECK(server.requests_served() == 2);
    CHECK(client.attempts_made() == 1);

    httplib::Client raw_client("127.0.0.1", port);
    const auto bad = raw_client.Post(kInpaintPath, "{\"version\":1}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    server.stop();
}

TEST_CASE("handler failures map to 503") {
    InpaintServer server([](const InpaintRequest&) -> InpaintResponse { throw std::runtime_error("busy"); });
    server.start();
    RetryPolicy policy;
    policy.attempts = 2;
    policy.initial_backoff = std::chrono::milliseconds(1);
    HttpInpainter client(server.url(), policy);
    CHECK_THROWS_AS(client.submit(small_request()), TransportError);
    CHECK(client.attempts_made() == 2);
}

TEST_CASE("unreachable endpoint fails after the retry budget") {
    int port = 0;
    {
        InpaintServer probe(echo);
        port = probe.start();
        probe.stop();
    }
    RetryPolicy policy;
    policy.initial_backoff = std::chrono::milliseconds(5);
    HttpInpainter client("http://127.0.0.1:" + std::to_string(port), policy);
    CHECK_THROWS_AS(client.submit(small_request()), TransportError);
    CHECK(client.attempts_made() == 3);
}
