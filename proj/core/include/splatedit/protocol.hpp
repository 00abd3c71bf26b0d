#pragma once

#include "splatedit/inpaint.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace splatedit {

inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kInpaintPath = "/v1/inpaint";
inline constexpr const char* kHealthPath = "/v1/health";

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
/// Throws ProtocolError on invalid input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// JSON manifest with PNG payloads: 8-bit RGB background, 1-bit mask and
/// 16-bit depth with its [min, max] scale.
std::string encode_request(const InpaintRequest& request);
/// Throws ProtocolError on schema violations.
InpaintRequest decode_request(const std::string& body);

std::string encode_response(const InpaintResponse& response);
InpaintResponse decode_response(const std::string& body);

/// Minimal in-process server for the wire protocol, backed by any endpoint.
class InpaintServer {
public:
    using Handler = std::function<InpaintResponse(const InpaintRequest&)>;

    explicit InpaintServer(Handler handler);
    ~InpaintServer();
    InpaintServer(const InpaintServer&) = delete;
    InpaintServer& operator=(const InpaintServer&) = delete;

    /// Binds to `host` on `port` (0 = any free port) and serves on a
    /// background thread. Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Serves on the calling thread until stop() is called.
    void listen(const std::string& host, int port);
    void stop();
    std::string url() const;
    int requests_served() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace splatedit
