#include "splatedit/protocol.hpp"

#include "splatedit/errors.hpp"
#include "splatedit/image_io.hpp"
#include "splatedit/json_io.hpp"

#include <httplib.h>

#include <array>
#include <atomic>
#include <thread>

namespace splatedit {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int, 256> decode_table() {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
}

template <typename T>
T field(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ProtocolError(std::string(where) + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(std::string(where) + ": field '" + key + "' has the wrong type");
    }
}

json parse(const std::string& body, const char* where) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string(where) + ": body is not valid JSON");
    }
}

void check_version(const json& j, const char* where) {
    if (field<int>(j, "version", where) != kProtocolVersion) {
        throw ProtocolError(std::string(where) + ": unsupported protocol version");
    }
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t v = bytes[i] << 16;
        if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    static const auto table = decode_table();
    if (text.size() % 4 != 0) throw ProtocolError("base64 payload has invalid length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                v[k] = 0;
                ++pad;
                continue;
            }
            if (pad > 0) throw ProtocolError("base64 payload has misplaced padding");
            v[k] = table[static_cast<unsigned char>(c)];
            if (v[k] < 0) throw ProtocolError("base64 payload has invalid characters");
        }
        const std::uint32_t bits = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back(static_cast<std::uint8_t>(bits >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(bits >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(bits));
    }
    return out;
}

std::string encode_request(const InpaintRequest& request) {
    request.validate();
    json views = json::array();
    for (const auto& b : request.bundles) {
        DepthScale scale;
        const Image packed = normalize_depth(b.depth, scale);
        views.push_back({{"camera", camera_to_json(b.camera)},
                         {"background_png", base64_encode(encode_png(b.background, PngKind::rgb8))},
                         {"mask_png", base64_encode(encode_png(b.mask, PngKind::mask1))},
                         {"depth_png", base64_encode(encode_png(packed, PngKind::gray16))},
                         {"depth_scale", {{"min", scale.min}, {"max", scale.max}}}});
    }
    return json{{"version", kProtocolVersion},
                {"prompt", request.prompt},
                {"seed", request.seed},
                {"conditioning_view_index", request.conditioning_view_index},
                {"views", views}}
        .dump();
}

InpaintRequest decode_request(const std::string& body) {
    const char* where = "inpaint request";
    const json j = parse(body, where);
    check_version(j, where);
    InpaintRequest r;
    r.prompt = field<std::string>(j, "prompt", where);
    r.seed = field<std::uint64_t>(j, "seed", where);
    r.conditioning_view_index = field<std::size_t>(j, "conditioning_view_index", where);
    const json views = field<json>(j, "views", where);
    if (!views.is_array()) throw ProtocolError("inpaint request: 'views' must be an array");
    for (const auto& v : views) {
        ViewBundle b;
        try {
            b.camera = camera_from_json(field<json>(v, "camera", where));
            b.background = decode_png(base64_decode(field<std::string>(v, "background_png", where)));
            b.mask = decode_png(base64_decode(field<std::string>(v, "mask_png", where)));
            const json scale = field<json>(v, "depth_scale", where);
            b.depth = denormalize_depth(decode_png(base64_decode(field<std::string>(v, "depth_png", where))),
                                        {field<double>(scale, "min", where), field<double>(scale, "max", where)});
        } catch (const ParameterError& e) {
            throw ProtocolError(std::string("inpaint request: ") + e.what());
        } catch (const FormatError& e) {
            throw ProtocolError(std::string("inpaint request: ") + e.what());
        }
        r.bundles.push_back(std::move(b));
    }
    try {
        r.validate();
    } catch (const ParameterError& e) {
        throw ProtocolError(std::string("inpaint request: ") + e.what());
    }
    return r;
}

std::string encode_response(const InpaintResponse& response) {
    json images = json::array();
    for (const auto& img : response.images) images.push_back(base64_encode(encode_png(img, PngKind::rgb8)));
    return json{{"version", kProtocolVersion}, {"seed", response.seed}, {"images", images}}.dump();
}

InpaintResponse decode_response(const std::string& body) {
    const char* where = "inpaint response";
    const json j = parse(body, where);
    check_version(j, where);
    InpaintResponse r;
    r.seed = field<std::uint64_t>(j, "seed", where);
    const json images = field<json>(j, "images", where);
    if (!images.is_array()) throw ProtocolError("inpaint response: 'images' must be an array");
    for (const auto& img : images) {
        if (!img.is_string()) throw ProtocolError("inpaint response: images must be base64 strings");
        try {
            Image decoded = decode_png(base64_decode(img.get<std::string>()));
            if (decoded.channels() != 3) throw ProtocolError("inpaint response: images must be RGB");
            r.images.push_back(std::move(decoded));
        } catch (const FormatError& e) {
            throw ProtocolError(std::string("inpaint response: ") + e.what());
        }
    }
    return r;
}

struct InpaintServer::Impl {
    Handler handler;
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
    std::atomic<int> served{0};
};

InpaintServer::InpaintServer(Handler handler) : impl_(std::make_unique<Impl>()) {
    impl_->handler = std::move(handler);
    Impl* impl = impl_.get();
    impl->server.Get(kHealthPath, [](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"version", kProtocolVersion}}.dump(), "application/json");
    });
    impl->server.Post(kInpaintPath, [impl](const httplib::Request& req, httplib::Response& res) {
        InpaintRequest request;
        try {
            request = decode_request(req.body);
        } catch (const ProtocolError& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }
        try {
            InpaintResponse response = impl->handler(request);
            response.seed = request.seed;
            res.set_content(encode_response(response), "application/json");
            ++impl->served;
        } catch (const std::exception& e) {
            res.status = 503;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });
}

InpaintServer::~InpaintServer() { stop(); }

int InpaintServer::start(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port == 0 ? impl_->server.bind_to_any_port(host) : port;
    if (port != 0 && !impl_->server.bind_to_port(host, port)) impl_->port = -1;
    if (impl_->port < 0) throw TransportError("cannot bind inpaint server to " + host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void InpaintServer::listen(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    if (!impl_->server.listen(host, port)) throw TransportError("cannot listen on " + host);
}

void InpaintServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string InpaintServer::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

int InpaintServer::requests_served() const { return impl_->served; }

}  // namespace splatedit
