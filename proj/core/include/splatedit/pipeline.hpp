#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/image.hpp"
#include "splatedit/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace splatedit {

/// Inputs for inpainting one viewpoint: background render, editing mask and
/// the coarse prior's depth inside the mask.
struct ViewBundle {
    Camera camera;
    Image background;  ///< RGB
    Mask mask;         ///< binary
    Image depth;       ///< camera z inside the mask, 0 elsewhere

    /// Throws ParameterError when image sizes disagree with the camera or
    /// the mask is not binary.
    void validate() const;
    bool operator==(const ViewBundle&) const = default;
};

/// Renders one bundle per camera. Throws EmptyRegionError when the box is
/// invisible (empty mask) in every camera.
std::vector<ViewBundle> extract_view_bundles(const GaussianScene& original, const GaussianScene& coarse,
                                             const OrientedBBox& bbox, std::span<const Camera> cameras,
                                             const Vec3d& background = Vec3d::Zero(),
                                             MaskMode mask_mode = MaskMode::hull);

/// Geometric stand-in for an optimized coarse model: `n_gaussians` gray,
/// half-opaque isotropic Gaussians uniformly filling the ellipsoid inscribed
/// in the box. Deterministic in `seed`.
GaussianScene seed_coarse_prior(const OrientedBBox& bbox, std::size_t n_gaussians, std::uint64_t seed,
                                int sh_degree = 0);

/// The inpainted image at the central trajectory viewpoint.
const Image& conditioning_image(std::span<const ViewBundle> bundles, std::span<const Image> images);

/// Writes `<dir>/<name>.json` plus `<name>_background.pfm`, `<name>_mask.png`
/// and `<name>_depth.pfm` next to it, and a `<name>_background.png` preview.
void save_bundle(const ViewBundle& bundle, const std::filesystem::path& dir, const std::string& name);
ViewBundle load_bundle(const std::filesystem::path& manifest);

}  // namespace splatedit
