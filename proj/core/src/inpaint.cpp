#include "splatedit/inpaint.hpp"

#include "splatedit/errors.hpp"
#include "splatedit/protocol.hpp"
#include "splatedit/rasterizer.hpp"

#include <httplib.h>

#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <thread>

namespace splatedit {

void InpaintRequest::validate() const {
    if (bundles.empty()) throw ParameterError("inpaint request has no views");
    if (conditioning_view_index >= bundles.size()) {
        throw ParameterError("conditioning_view_index is out of range");
    }
    for (const auto& b : bundles) b.validate();
}

InpaintResponse inpaint(const InpaintRequest& request, InpaintEndpoint& endpoint) {
    request.validate();
    InpaintResponse response = endpoint.submit(request);
    if (response.images.size() != request.bundles.size()) {
        throw ProtocolError("inpainting service returned " + std::to_string(response.images.size()) +
                            " images for " + std::to_string(request.bundles.size()) + " views");
    }
    for (std::size_t i = 0; i < response.images.size(); ++i) {
        const ViewBundle& b = request.bundles[i];
        const Image& img = response.images[i];
        if (!img.same_shape(b.background)) {
            throw ProtocolError("inpainted view " + std::to_string(i) + " has the wrong size");
        }
        response.images[i] = composite(b.background, img, b.mask);
    }
    return response;
}

namespace {

constexpr std::array<std::array<double, 3>, 8> kPalette = {{
    {0.85, 0.20, 0.15},
    {0.15, 0.55, 0.85},
    {0.95, 0.75, 0.10},
    {0.20, 0.70, 0.30},
    {0.60, 0.25, 0.75},
    {0.95, 0.50, 0.15},
    {0.90, 0.90, 0.90},
    {0.10, 0.65, 0.65},
}};

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

bool contains_any(const std::string& text, std::initializer_list<const char*> words) {
    for (const char* w : words)
        if (text.find(w) != std::string::npos) return true;
    return false;
}

// Samples a point uniformly inside the unit ball.
Vec3d unit_ball(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        const Vec3d p(u(rng), u(rng), u(rng));
        if (p.squaredNorm() <= 1.0) return p;
    }
}

}  // namespace

MockShape mock_shape_for(const std::string& prompt) {
    std::string p;
    for (char c : prompt) p.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (contains_any(p, {"snowman", "snow man"})) return MockShape::snowman;
    if (contains_any(p, {"box", "crate", "cube", "chest"})) return MockShape::crate;
    if (contains_any(p, {"ring", "donut", "torus", "tire"})) return MockShape::ring;
    if (contains_any(p, {"ball", "blob", "sphere", "stone", "rock"})) return MockShape::blob;
    return static_cast<MockShape>(fnv1a(p) % 4);
}

Vec3d mock_color_for(std::uint64_t seed) {
    const auto& c = kPalette[seed % kPalette.size()];
    return {c[0], c[1], c[2]};
}

GaussianScene mock_object(const OrientedBBox& bbox, const std::string& prompt, std::uint64_t seed, int sh_degree) {
    bbox.validate();
    const MockShape shape = mock_shape_for(prompt);
    const Vec3d color = mock_color_for(seed);
    std::mt19937_64 rng(seed ^ fnv1a(prompt));
    std::uniform_real_distribution<double> jitter(-0.04, 0.04);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Object-local coordinates are in units of the half extents, z up.
    struct Sample {
        Vec3d p;
        double size;  // fraction of the smallest half extent
        Vec3d color;
    };
    std::vector<Sample> samples;
    const Vec3d light = (color * 0.55 + Vec3d::Constant(0.45)).cwiseMin(1.0);
    switch (shape) {
        case MockShape::blob:
            for (int i = 0; i < 360; ++i) samples.push_back({unit_ball(rng) * 0.62, 0.11, color});
            break;
        case MockShape::snowman:
            for (int i = 0; i < 260; ++i) samples.push_back({unit_ball(rng) * 0.42 + Vec3d(0, 0, -0.3), 0.1, color});
            for (int i = 0; i < 140; ++i) samples.push_back({unit_ball(rng) * 0.27 + Vec3d(0, 0, 0.38), 0.08, light});
            break;
        case MockShape::crate:
            for (int i = 0; i < 400; ++i) {
                std::uniform_real_distribution<double> u(-0.5, 0.5);
                samples.push_back({Vec3d(u(rng), u(rng), u(rng)), 0.1, color});
            }
            break;
        case MockShape::ring:
            for (int i = 0; i < 400; ++i) {
                const double a = 2 * kPi * unit(rng);
                const Vec3d tube = unit_ball(rng) * 0.18;
                const double r = 0.48 + tube.x();
                samples.push_back({Vec3d(r * std::cos(a), r * std::sin(a), tube.z()), 0.08, i % 2 ? color : light});
            }
            break;
    }

    const Mat3d rot = bbox.rotation_matrix();
    const double min_half = bbox.half_extents.minCoeff();
    GaussianScene object(sh_degree);
    object.reserve(samples.size());
    Gaussian g;
    g.sh.assign(object.sh_stride(), 0.0f);
    g.opacity_logit = static_cast<float>(logit(0.95));
    for (const Sample& s : samples) {
        g.position = (bbox.center + rot * s.p.cwiseProduct(bbox.half_extents)).cast<float>();
        g.log_scale = Vec3f::Constant(static_cast<float>(std::log(s.size * min_half)));
        for (int c = 0; c < 3; ++c) {
            g.sh[c] = static_cast<float>(rgb_to_sh0(std::clamp(s.color[c] + jitter(rng), 0.0, 1.0)));
        }
        object.push_back(g);
    }
    return object;
}

MockInpainter::MockInpainter(OrientedBBox bbox, std::optional<GaussianScene> original, Vec3d render_background)
    : bbox_(std::move(bbox)), original_(std::move(original)), render_background_(render_background) {}

std::vector<Image> MockInpainter::render_views(std::span<const ViewBundle> bundles, const std::string& prompt,
                                               std::uint64_t seed) {
    hidden_ = mock_object(bbox_, prompt, seed, original_ ? original_->sh_degree() : 0);
    std::vector<Image> images;
    images.reserve(bundles.size());
    if (original_) {
        GaussianScene combined = *original_;
        combined.append(hidden_);
        for (const auto& b : bundles) images.push_back(render_fast(combined, b.camera, render_background_).color);
        return images;
    }
    for (const auto& b : bundles) {
        const RenderOutput out = render_fast(hidden_, b.camera, Vec3d::Zero());
        Image img = out.color;
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            const double t = 1.0 - out.alpha.data()[p];
            for (int c = 0; c < 3; ++c) img.data()[p * 3 + c] += t * b.background.data()[p * 3 + c];
        }
        images.push_back(std::move(img));
    }
    return images;
}

InpaintResponse MockInpainter::submit(const InpaintRequest& request) {
    return {render_views(request.bundles, request.prompt, request.seed), request.seed};
}

std::vector<Image> mock_inpainter(std::span<const ViewBundle> bundles, const std::string& prompt, std::uint64_t seed,
                                  const OrientedBBox& bbox, const GaussianScene* original) {
    MockInpainter mock(bbox, original ? std::optional<GaussianScene>(*original) : std::nullopt);
    std::vector<Image> raw = mock.render_views(bundles, prompt, seed);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = composite(bundles[i].background, raw[i], bundles[i].mask);
    return raw;
}

HttpInpainter::HttpInpainter(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(policy) {
    if (policy_.attempts < 1) throw ParameterError("retry policy needs at least one attempt");
}

InpaintResponse HttpInpainter::submit(const InpaintRequest& request) {
    const std::string body = encode_request(request);
    auto backoff = std::chrono::duration<double, std::milli>(policy_.initial_backoff);
    std::string last_error;
    attempts_made_ = 0;
    for (int attempt = 1; attempt <= policy_.attempts; ++attempt) {
        ++attempts_made_;
        httplib::Client client(base_url_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout).count());
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout).count());
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout).count());
        auto result = client.Post(kInpaintPath, body, "application/json");
        if (result && result->status == 200) return decode_response(result->body);
        last_error = result ? "HTTP " + std::to_string(result->status)
                            : "connection failed (" + httplib::to_string(result.error()) + ")";
        if (attempt < policy_.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= policy_.backoff_factor;
        }
    }
    throw TransportError("inpainting service at " + base_url_ + " failed after " + std::to_string(policy_.attempts) +
                         " attempts: " + last_error);
}

std::string HttpInpainter::health() {
    httplib::Client client(base_url_);
    client.set_connection_timeout(5);
    auto result = client.Get(kHealthPath);
    if (!result) throw TransportError("health check failed: " + httplib::to_string(result.error()));
    if (result->status != 200) throw TransportError("health check returned HTTP " + std::to_string(result->status));
    return result->body;
}

std::unique_ptr<InpaintEndpoint> make_endpoint(const std::string& endpoint, const OrientedBBox& bbox,
                                               std::optional<GaussianScene> original, RetryPolicy policy) {
    if (endpoint == "mock") return std::make_unique<MockInpainter>(bbox, std::move(original));
    if (endpoint.rfind("http://", 0) == 0) {
        return std::make_unique<HttpInpainter>(endpoint, policy);
    }
    throw ParameterError("endpoint must be \"mock\" or an http:// URL, got '" + endpoint + "'");
}

}  // namespace splatedit
