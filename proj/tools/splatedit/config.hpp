#pragma once

#include <splatedit/camera.hpp>
#include <splatedit/metrics.hpp>
#include <splatedit/trainer.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace splatedit::cli {

/// Everything a pipeline run needs. Paths are resolved against the
/// directory of the config file they came from.
struct PipelineConfig {
    std::filesystem::path scene;
    std::filesystem::path bbox;
    std::filesystem::path cameras;  ///< training camera set (optional)
    std::filesystem::path output_dir = "splatedit_out";

    int width = 128;
    int height = 128;
    double fov_x_degrees = 60.0;

    TrajectorySpec trajectory;
    std::vector<TrajectorySide> sides{TrajectorySide::left, TrajectorySide::right};
    MaskMode mask_mode = MaskMode::hull;
    std::size_t coarse_gaussians = 500;

    std::string endpoint = "mock";
    std::string prompt = "a red ball";
    std::uint64_t seed = 0;

    TrainConfig train;
    bool mask_aware = true;
    int log_interval = 100;
    int checkpoint_interval = 0;

    Region eval_region = Region::full;
    std::size_t max_points = 100000;

    Intrinsics intrinsics() const;
    /// Hash of every setting except the output directory.
    std::string hash() const;
};

nlohmann::json config_to_json(const PipelineConfig& config);
/// Overrides `base` with the keys in `j`; unknown keys are rejected.
/// Relative paths are resolved against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                PipelineConfig base = {});

/// Applies "dotted.key=value" to a JSON object; the value is parsed as JSON
/// when possible and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

const char* to_string(TrajectorySide side);
TrajectorySide side_from_string(const std::string& text);

}  // namespace splatedit::cli
