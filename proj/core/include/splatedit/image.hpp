#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace splatedit {

/// Row-major, channel-interleaved float image. RGB values live in [0,1],
/// depth in world units, masks in {0,1}.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }
    bool same_size(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Image& other) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Binary single-channel image.
using Mask = Image;

/// Number of pixels set in a mask.
std::size_t mask_count(const Mask& mask);

/// Grows every set pixel into a (2r+1)^2 square.
Mask dilate(const Mask& mask, int radius);

/// Returns `a` where mask is 0 and `b` where mask is 1. Channel counts of a and b must match.
Image composite(const Image& a, const Image& b, const Mask& mask);

/// Per-pixel product with a single-channel image (broadcast over channels).
Image multiply(const Image& image, const Image& single_channel);

}  // namespace splatedit
