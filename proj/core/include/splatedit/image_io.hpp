#pragma once

#include "splatedit/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace splatedit {

/// PNG encodings used on disk and on the wire.
enum class PngKind {
    rgb8,    ///< 3-channel image, values in [0,1] quantized to 8 bits
    gray8,   ///< 1-channel image in [0,1]
    mask1,   ///< 1-bit grayscale; pixels > 0.5 are set
    gray16,  ///< 1-channel image in [0,1] quantized to 16 bits
};

std::vector<std::uint8_t> encode_png(const Image& image, PngKind kind);
/// Decodes any 8/16-bit gray or RGB(A) PNG into [0,1] values. 1-bit input
/// decodes to {0,1}.
Image decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const Image& image, PngKind kind, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

/// Lossless float32 export (Portable Float Map, little-endian, bottom-up rows).
void write_pfm(const Image& image, const std::filesystem::path& path);
Image read_pfm(const std::filesystem::path& path);

/// Metric depth packed into 16 bits: 0 means "no depth", 1..65535 map
/// linearly onto [min, max] of the valid (non-zero) depths.
struct DepthScale {
    double min = 0;
    double max = 0;
};
Image normalize_depth(const Image& depth, DepthScale& scale);
Image denormalize_depth(const Image& packed, const DepthScale& scale);

/// Writes `<stem>.png` (16-bit normalized depth) and `<stem>.json` with the
/// scale, so the exact metric range can be recovered.
void write_depth(const Image& depth, const std::filesystem::path& stem);
Image read_depth(const std::filesystem::path& stem);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace splatedit
