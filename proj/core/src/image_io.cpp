#include "splatedit/image_io.hpp"

#include "splatedit/errors.hpp"

#include <png.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace splatedit {

namespace {

struct PngWriteBuffer {
    std::vector<std::uint8_t>* out;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
    buf->out->insert(buf->out->end(), data, data + len);
}

struct PngReadBuffer {
    const std::vector<std::uint8_t>* in;
    std::size_t pos;
};

void png_read_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
    if (buf->pos + len > buf->in->size()) png_error(png, "truncated PNG");
    std::memcpy(data, buf->in->data() + buf->pos, len);
    buf->pos += len;
}

void png_error_cb(png_structp png, png_const_charp msg) {
    throw FormatError(std::string("PNG error: ") + msg);
    (void)png;
}

void png_warning_cb(png_structp, png_const_charp) {}

int quantize(double v, int max) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * max));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image, PngKind kind) {
    const int want_channels = kind == PngKind::rgb8 ? 3 : 1;
    if (image.channels() != want_channels) throw ParameterError("encode_png: wrong channel count");
    if (image.width() < 1 || image.height() < 1) throw ParameterError("encode_png: empty image");

    std::vector<std::uint8_t> out;
    PngWriteBuffer buf{&out};
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_cb, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    const int w = image.width(), h = image.height();
    int bit_depth = 8, color_type = PNG_COLOR_TYPE_GRAY;
    std::size_t row_bytes = w;
    switch (kind) {
        case PngKind::rgb8: color_type = PNG_COLOR_TYPE_RGB; row_bytes = 3 * w; break;
        case PngKind::gray8: break;
        case PngKind::mask1: bit_depth = 1; row_bytes = (w + 7) / 8; break;
        case PngKind::gray16: bit_depth = 16; row_bytes = 2 * w; break;
    }
    std::vector<std::uint8_t> pixels(row_bytes * h, 0);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* row = pixels.data() + y * row_bytes;
        for (int x = 0; x < w; ++x) {
            switch (kind) {
                case PngKind::rgb8:
                    for (int c = 0; c < 3; ++c) row[3 * x + c] = static_cast<std::uint8_t>(quantize(image.at(x, y, c), 255));
                    break;
                case PngKind::gray8: row[x] = static_cast<std::uint8_t>(quantize(image.at(x, y), 255)); break;
                case PngKind::mask1:
                    if (image.at(x, y) > 0.5) row[x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
                    break;
                case PngKind::gray16: {
                    const int v = quantize(image.at(x, y), 65535);
                    row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
                    row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
                    break;
                }
            }
        }
    }
    try {
        png_set_write_fn(png, &buf, png_write_cb, nullptr);
        png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < h; ++y) png_write_row(png, pixels.data() + y * row_bytes);
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw FormatError("not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_cb, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    PngReadBuffer buf{&bytes, 0};
    Image image;
    try {
        png_set_read_fn(png, &buf, png_read_cb);
        png_read_info(png, info);
        const int w = static_cast<int>(png_get_image_width(png, info));
        const int h = static_cast<int>(png_get_image_height(png, info));
        const int color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_packing(png);
        if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
        png_read_update_info(png, info);
        const int channels = png_get_channels(png, info);
        const int out_depth = png_get_bit_depth(png, info);
        const std::size_t row_bytes = png_get_rowbytes(png, info);
        std::vector<std::uint8_t> pixels(row_bytes * h);
        std::vector<png_bytep> rows(h);
        for (int y = 0; y < h; ++y) rows[y] = pixels.data() + y * row_bytes;
        png_read_image(png, rows.data());

        const int color_channels = channels >= 3 ? 3 : 1;
        const double max_value = depth < 8 ? double((1 << depth) - 1) : (out_depth == 16 ? 65535.0 : 255.0);
        image = Image(w, h, color_channels);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < color_channels; ++c) {
                    double v;
                    if (out_depth == 16) {
                        std::uint16_t s;
                        std::memcpy(&s, rows[y] + 2 * (x * channels + c), 2);
                        v = s;
                    } else {
                        v = rows[y][x * channels + c];
                    }
                    image.at(x, y, c) = v / max_value;
                }
            }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void write_png(const Image& image, PngKind kind, const std::filesystem::path& path) {
    write_file(path, encode_png(image, kind));
}

Image read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

void write_pfm(const Image& image, const std::filesystem::path& path) {
    if (image.channels() != 1 && image.channels() != 3) throw ParameterError("PFM needs 1 or 3 channels");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << (image.channels() == 3 ? "PF" : "Pf") << "\n" << image.width() << " " << image.height() << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(image.width()) * image.channels());
    for (int y = image.height() - 1; y >= 0; --y) {
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < image.channels(); ++c)
                row[x * image.channels() + c] = static_cast<float>(image.at(x, y, c));
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0;
    double scale = 0;
    in >> magic >> w >> h >> scale;
    in.get();
    if ((magic != "PF" && magic != "Pf") || w < 1 || h < 1) throw FormatError("bad PFM header: " + path.string());
    if (scale >= 0) throw FormatError("only little-endian PFM is supported");
    const int channels = magic == "PF" ? 3 : 1;
    Image image(w, h, channels);
    std::vector<float> row(static_cast<std::size_t>(w) * channels);
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
        if (!in) throw FormatError("truncated PFM: " + path.string());
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) image.at(x, y, c) = row[x * channels + c];
    }
    return image;
}

Image normalize_depth(const Image& depth, DepthScale& scale) {
    double lo = 0, hi = 0;
    bool any = false;
    for (double d : depth.data()) {
        if (d <= 0) continue;
        lo = any ? std::min(lo, d) : d;
        hi = any ? std::max(hi, d) : d;
        any = true;
    }
    scale = {lo, hi};
    Image out(depth.width(), depth.height(), 1);
    const double range = hi - lo;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        const double d = depth.data()[i];
        if (d <= 0) continue;
        const double t = range > 0 ? (d - lo) / range : 0.0;
        // 1..65535 encodes [lo, hi]; 0 stays "no depth".
        out.data()[i] = (1.0 + t * 65534.0) / 65535.0;
    }
    return out;
}

Image denormalize_depth(const Image& packed, const DepthScale& scale) {
    Image out(packed.width(), packed.height(), 1);
    for (std::size_t i = 0; i < packed.size(); ++i) {
        const double code = std::round(packed.data()[i] * 65535.0);
        if (code < 1) continue;
        out.data()[i] = scale.min + (code - 1.0) / 65534.0 * (scale.max - scale.min);
    }
    return out;
}

void write_depth(const Image& depth, const std::filesystem::path& stem) {
    DepthScale scale;
    const Image packed = normalize_depth(depth, scale);
    write_png(packed, PngKind::gray16, stem.string() + ".png");
    nlohmann::json j = {{"min", scale.min}, {"max", scale.max}, {"encoding", "uint16, 0 = none, 1..65535 = [min, max]"}};
    write_text(stem.string() + ".json", j.dump(2) + "\n");
}

Image read_depth(const std::filesystem::path& stem) {
    const auto j = nlohmann::json::parse(read_file(stem.string() + ".json"));
    DepthScale scale{j.at("min").get<double>(), j.at("max").get<double>()};
    return denormalize_depth(read_png(stem.string() + ".png"), scale);
}

}  // namespace splatedit
