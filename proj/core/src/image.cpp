#include "splatedit/image.hpp"

#include "splatedit/errors.hpp"

#include <algorithm>

namespace splatedit {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) {
        throw ParameterError("invalid image shape");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

std::size_t mask_count(const Mask& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.data().begin(), mask.data().end(), [](double v) { return v > 0.5; }));
}

Mask dilate(const Mask& mask, int radius) {
    Mask out(mask.width(), mask.height(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y) <= 0.5) continue;
            const int y0 = std::max(0, y - radius), y1 = std::min(mask.height() - 1, y + radius);
            const int x0 = std::max(0, x - radius), x1 = std::min(mask.width() - 1, x + radius);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) out.at(xx, yy) = 1.0;
        }
    }
    return out;
}

Image composite(const Image& a, const Image& b, const Mask& mask) {
    if (!a.same_shape(b) || !a.same_size(mask) || mask.channels() != 1) {
        throw ParameterError("composite: image/mask shape mismatch");
    }
    Image out = a;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (mask.at(x, y) > 0.5)
                for (int c = 0; c < a.channels(); ++c) out.at(x, y, c) = b.at(x, y, c);
    return out;
}

Image multiply(const Image& image, const Image& single_channel) {
    if (!image.same_size(single_channel) || single_channel.channels() != 1) {
        throw ParameterError("multiply: shape mismatch");
    }
    Image out = image;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) *= single_channel.at(x, y);
    return out;
}

}  // namespace splatedit
