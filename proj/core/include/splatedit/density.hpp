#pragma once

#include "splatedit/rasterizer.hpp"
#include "splatedit/scene.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace splatedit {

/// Screen-space statistics gathered between two density-control passes.
struct DensityStats {
    std::vector<double> grad_accum;  ///< sum of NDC-scaled mean2d gradient norms
    std::vector<int> denom;          ///< number of views in which each Gaussian was visible
    std::vector<double> max_radii;   ///< largest screen radius seen (pixels)

    explicit DensityStats(std::size_t n = 0) : grad_accum(n, 0.0), denom(n, 0), max_radii(n, 0.0) {}
    std::size_t size() const { return grad_accum.size(); }

    /// Adds one view. Pixel gradients are scaled by (W/2, H/2) so thresholds
    /// are in normalized device units.
    void add(const RenderGrad& grad, const std::vector<double>& radii, int width, int height);
    /// Reorders/extends like the scene after density control.
    void remap(const std::vector<std::int64_t>& origin);
};

struct DensityParams {
    double grad_threshold = 0.0002;
    double percent_dense = 0.01;
    double opacity_prune_threshold = 0.005;
    double scene_extent = 1.0;
    /// Prune Gaussians whose screen radius exceeded this; <= 0 disables the
    /// screen-size and world-size (0.1 x extent) pruning.
    double max_screen_size = 0.0;
    int split_count = 2;
};

struct DensityResult {
    GaussianScene scene;
    /// For each output Gaussian, the input index it was copied from
    /// unchanged, or -1 for newly created (cloned/split) Gaussians.
    std::vector<std::int64_t> origin;
    std::size_t cloned = 0, split = 0, pruned = 0;
};

/// Clone small high-gradient Gaussians, split large ones into `split_count`
/// samples shrunk by 1/(0.8 * split_count), then prune low-opacity ones.
/// Output order: surviving originals, clones, split children.
DensityResult density_control(const GaussianScene& scene, const DensityStats& stats, const DensityParams& params,
                              std::mt19937_64& rng);

/// Clamps every opacity to at most `max_opacity`.
void reset_opacity(GaussianScene& scene, double max_opacity = 0.01);

}  // namespace splatedit
