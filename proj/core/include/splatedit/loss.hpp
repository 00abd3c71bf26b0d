#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/image.hpp"

namespace splatedit {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Per-pixel SSIM averaged over channels. The 11x11 Gaussian window is
/// applied as a zero-padded "same" convolution, so every pixel has a value.
Image ssim_map(const Image& a, const Image& b);

/// Mean of ssim_map(). Throws ParameterError on shape mismatch.
double ssim(const Image& a, const Image& b);

struct LossResult {
    double loss = 0;
    double l1 = 0;          ///< mean absolute error
    double ssim_term = 0;   ///< 1 - SSIM
    Image grad;             ///< d loss / d render
};

/// (1 - lambda) * mean|render - target| + lambda * (1 - SSIM(render, target)).
LossResult l_gs(const Image& render, const Image& target, double lambda);

/// One supervision image. Edited views carry an inpainted target and no
/// mask; training views carry the original image and its editing mask.
struct SupervisionView {
    Camera camera;
    Image target;
    Mask mask;  ///< empty for edited views

    bool is_training_view() const { return !mask.empty(); }
};

/// Mask-aware reconstruction loss: full-frame l_gs on edited views, and
/// l_gs(render * (1 - M), target * (1 - M)) on training views.
LossResult l_rec(const Image& render, const SupervisionView& view, double lambda);

}  // namespace splatedit
