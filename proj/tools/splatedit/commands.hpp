#pragma once

#include "config.hpp"

#include <splatedit/inpaint.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace splatedit::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitTransport = 3,
    kExitDivergence = 4,
};

/// Parses `args` (without the program name), runs the subcommand and maps
/// library errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

void cmd_sample_pointcloud(const std::filesystem::path& scene, const std::filesystem::path& out_json,
                           std::size_t max_points);
/// Returns the number of bundles written.
std::size_t cmd_extract(const PipelineConfig& config);
void cmd_inpaint(const PipelineConfig& config, const RetryPolicy& policy = {});
void cmd_reconstruct(const PipelineConfig& config, const std::optional<std::filesystem::path>& resume = {},
                     std::ostream* progress = nullptr);
void cmd_evaluate(const PipelineConfig& config, std::ostream& out);
/// Writes a synthetic room scene, its box, training cameras with images and
/// a ready-to-run config into `dir`.
void cmd_make_demo(const std::filesystem::path& dir, int image_size, std::uint64_t seed);

}  // namespace splatedit::cli
