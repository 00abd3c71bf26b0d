#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/image.hpp"
#include "splatedit/scene.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace splatedit {

/// Screen-space footprint support: a splat contributes only where its
/// Mahalanobis distance is below 3.
inline constexpr double kCutoffSigma = 3.0;
/// Added to the diagonal of every projected 2D covariance (pixels^2).
inline constexpr double kCovarianceDilation = 0.3;
/// Depth is reported only where accumulated alpha exceeds this value.
inline constexpr double kDepthAlphaThreshold = 1e-3;
/// Tiled compositing stops once transmittance drops below this value.
inline constexpr double kTransmittanceCutoff = 1e-7;
inline constexpr int kTileSize = 16;

struct RenderOutput {
    Image color;  ///< RGB, clamped to [0,1]
    Image depth;  ///< camera z, 0 where alpha <= kDepthAlphaThreshold
    Image alpha;  ///< accumulated opacity
};

/// Upstream gradient of a scalar loss with respect to the render outputs.
/// `depth` and `alpha` may be left empty.
struct RenderOutputGrad {
    Image color;
    Image depth;
    Image alpha;
};

/// Per-Gaussian gradient, shaped like GaussianScene.
struct RenderGrad {
    std::vector<Vec3d> positions;
    std::vector<Vec4d> rotations;
    std::vector<Vec3d> log_scales;
    std::vector<double> opacity_logits;
    std::vector<double> sh_coeffs;
    /// Gradient with respect to the projected center in pixels.
    std::vector<Vec2d> means2d;
    /// 1 when the Gaussian touched at least one pixel.
    std::vector<std::uint8_t> visible;

    explicit RenderGrad(const GaussianScene& scene);
    RenderGrad() = default;
};

/// Reference renderer: every pixel composites every projected Gaussian in
/// depth order (ties broken by index), with no tiling, culling or early
/// termination. Slow; used as the oracle for the tiled path.
///
/// Splat opacity is sigmoid(logit) times a Gaussian kernel truncated at
/// 3 sigma and shifted by its tangent there, so both the kernel and its
/// slope reach zero at the cutoff.
RenderOutput render(const GaussianScene& scene, const Camera& camera, const Vec3d& background);

/// Tiled renderer (16x16 tiles, per-tile depth-sorted lists, 3 sigma
/// footprint binning). Matches render() to within kTransmittanceCutoff.
RenderOutput render_fast(const GaussianScene& scene, const Camera& camera, const Vec3d& background);

/// Analytic gradient of render_fast() for the given upstream gradient.
RenderGrad render_backward(const GaussianScene& scene, const Camera& camera, const Vec3d& background,
                           const RenderOutputGrad& upstream);

/// Stateful tiled rasterizer that keeps the forward pass around so that a
/// following backward() does not have to redo projection and binning.
class TileRasterizer {
public:
    TileRasterizer();
    ~TileRasterizer();
    TileRasterizer(TileRasterizer&&) noexcept;
    TileRasterizer& operator=(TileRasterizer&&) noexcept;

    RenderOutput forward(const GaussianScene& scene, const Camera& camera, const Vec3d& background);
    /// Requires a preceding forward() on the same scene, which must be unchanged.
    RenderGrad backward(const RenderOutputGrad& upstream);
    /// Screen-space footprint radius (pixels) of each Gaussian in the last
    /// forward pass; 0 for Gaussians that touched no pixel.
    const std::vector<double>& radii() const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

}  // namespace splatedit
