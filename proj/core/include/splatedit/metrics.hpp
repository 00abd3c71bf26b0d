#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/image.hpp"
#include "splatedit/loss.hpp"
#include "splatedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace splatedit {

/// PSNR reported for identical images.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over the pixels where `region` is set (all pixels when
/// `region` is empty), averaged over channels. Throws ParameterError on a
/// shape mismatch or an empty region.
double psnr(const Image& a, const Image& b, const Mask& region = {});

/// Mean of ssim_map() over the pixels where `region` is set.
double masked_ssim(const Image& a, const Image& b, const Mask& region = {});

enum class Region { full, masked, unmasked };
const char* to_string(Region region);

struct ViewMetrics {
    std::string name;
    double psnr = 0;
    double ssim = 0;
};

struct EvalReport {
    std::string scene_id;
    std::string config_hash;
    Region region = Region::full;
    std::vector<ViewMetrics> views;
    double mean_psnr = 0;
    double mean_ssim = 0;

    void add(ViewMetrics view);
};

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

/// Renders `scene` at every edited camera and compares with the inpainted
/// target. `region` selects full frame or, using `masks`, the masked or
/// unmasked pixels. Throws ParameterError when `views` is empty.
EvalReport consistency_eval(const GaussianScene& scene, std::span<const SupervisionView> views,
                            const Vec3d& background, Region region = Region::full,
                            std::span<const Mask> masks = {});

/// Compares renders of `original` and `edited` on the pixels outside each mask.
EvalReport background_fidelity_eval(const GaussianScene& original, const GaussianScene& edited,
                                    std::span<const Camera> cameras, std::span<const Mask> masks,
                                    const Vec3d& background);

/// Tiles images (all RGB, same size) into a grid with one row per entry.
Image contact_sheet(const std::vector<std::vector<Image>>& rows, int gap = 2);

/// Per-pixel absolute difference averaged over channels, as a gray RGB image.
Image difference_image(const Image& a, const Image& b);

}  // namespace splatedit
