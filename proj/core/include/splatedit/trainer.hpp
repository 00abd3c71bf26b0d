#pragma once

#include "splatedit/density.hpp"
#include "splatedit/errors.hpp"
#include "splatedit/loss.hpp"
#include "splatedit/optimizer.hpp"
#include "splatedit/rasterizer.hpp"
#include "splatedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace splatedit {

/// Optimizer, schedule and densification settings. Defaults follow the
/// reference Gaussian Splatting trainer.
struct TrainConfig {
    double lambda_ssim = 0.2;
    int iterations = 30000;

    LearningRates lr;
    double position_lr_final = 0.0000016;
    int position_lr_max_steps = 30000;

    int densify_from = 500;
    int densify_until = 15000;
    int densify_interval = 100;
    double densify_grad_threshold = 0.0002;
    double percent_dense = 0.01;
    double opacity_prune_threshold = 0.005;
    /// Opacity reset period; 0 disables.
    int opacity_reset_interval = 3000;
    /// Screen-radius pruning limit (pixels), active after the first opacity reset.
    double max_screen_size = 20.0;

    /// Scales the position learning rate and the size criteria.
    double scene_extent = 1.0;
    std::uint64_t seed = 0;
    /// Each edited view is listed this many times in the sampling pool.
    int edited_oversampling = 1;
    Vec3d background = Vec3d::Zero();

    void validate() const;
    DensityParams density_params(int iteration) const;
};

nlohmann::json train_config_to_json(const TrainConfig& config);
/// Starts from `base` and overrides the keys present in `j`; unknown keys
/// are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base = {});

struct SupervisionSet {
    std::vector<SupervisionView> edited_views;
    std::vector<SupervisionView> training_views;

    std::size_t size() const { return edited_views.size() + training_views.size(); }
    /// Throws ParameterError when empty or when an image/mask size disagrees with its camera.
    void validate() const;
};

/// Loss became non-finite. Carries the last finite scene.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int iteration, GaussianScene checkpoint,
                  std::optional<std::filesystem::path> checkpoint_path = {});

    int iteration() const { return iteration_; }
    const GaussianScene& checkpoint() const { return checkpoint_; }
    const std::optional<std::filesystem::path>& checkpoint_path() const { return path_; }

private:
    int iteration_;
    GaussianScene checkpoint_;
    std::optional<std::filesystem::path> path_;
};

struct LogEntry {
    int iter = 0;
    double loss = 0;
    double l1 = 0;
    double ssim_term = 0;
    std::size_t count = 0;
    double psnr_probe = 0;  ///< PSNR of the sampled view's render against its (masked) target
};
nlohmann::json log_entry_to_json(const LogEntry& entry);

struct TrainHooks {
    std::function<void(const LogEntry&)> on_log;
    int log_interval = 100;
    /// Directory for periodic and divergence checkpoints; empty disables.
    std::filesystem::path checkpoint_dir;
    int checkpoint_interval = 0;
};

class Trainer {
public:
    Trainer(GaussianScene initial, SupervisionSet supervision, TrainConfig config);

    /// Restores a checkpoint written by save_checkpoint(); training then
    /// continues exactly as if it had never stopped.
    static Trainer resume(const std::filesystem::path& stem, SupervisionSet supervision, TrainConfig config);

    /// Runs one iteration and returns its log entry.
    LogEntry step();
    void run(const TrainHooks& hooks = {});
    bool done() const { return iteration_ >= config_.iterations; }

    int iteration() const { return iteration_; }
    const GaussianScene& scene() const { return scene_; }
    const TrainConfig& config() const { return config_; }

    /// Writes `<stem>.ply`, `<stem>.json` (iteration, config, RNG) and
    /// `<stem>.state` (optimizer moments and density statistics).
    void save_checkpoint(const std::filesystem::path& stem) const;

private:
    GaussianScene scene_;
    SupervisionSet supervision_;
    TrainConfig config_;
    /// Sampling pool; entries index edited views first, then training views.
    std::vector<std::size_t> pool_;
    SceneAdam adam_;
    DensityStats stats_;
    TileRasterizer rasterizer_;
    std::mt19937_64 rng_;
    int iteration_ = 0;

    void build_pool();
    const SupervisionView& view(std::size_t entry) const;
};

/// Mask-aware finetuning of `initial` against `supervision`.
GaussianScene finetune(const GaussianScene& initial, const SupervisionSet& supervision,
                       const TrainConfig& config, const TrainHooks& hooks = {});

}  // namespace splatedit
