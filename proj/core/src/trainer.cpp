#include "splatedit/trainer.hpp"

#include "splatedit/json_io.hpp"
#include "splatedit/metrics.hpp"
#include "splatedit/ply.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace splatedit {

using nlohmann::json;

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ParameterError(std::string("train config: ") + what);
    };
    require(lambda_ssim >= 0.0 && lambda_ssim <= 1.0, "lambda_ssim must lie in [0, 1]");
    require(iterations >= 0, "iterations must be non-negative");
    require(lr.position > 0 && lr.rotation > 0 && lr.scale > 0 && lr.opacity > 0 && lr.sh_dc > 0 && lr.sh_rest > 0,
            "learning rates must be positive");
    require(position_lr_final > 0, "position_lr_final must be positive");
    require(densify_interval >= 1, "densify_interval must be at least 1");
    require(densify_grad_threshold > 0, "densify_grad_threshold must be positive");
    require(percent_dense > 0, "percent_dense must be positive");
    require(opacity_prune_threshold > 0 && opacity_prune_threshold < 1, "opacity_prune_threshold must lie in (0, 1)");
    require(opacity_reset_interval >= 0, "opacity_reset_interval must be non-negative");
    require(scene_extent > 0, "scene_extent must be positive");
    require(edited_oversampling >= 1, "edited_oversampling must be at least 1");
    require(background.allFinite(), "background must be finite");
}

DensityParams TrainConfig::density_params(int iteration) const {
    DensityParams p;
    p.grad_threshold = densify_grad_threshold;
    p.percent_dense = percent_dense;
    p.opacity_prune_threshold = opacity_prune_threshold;
    p.scene_extent = scene_extent;
    p.max_screen_size = opacity_reset_interval > 0 && iteration > opacity_reset_interval ? max_screen_size : 0.0;
    return p;
}

json train_config_to_json(const TrainConfig& c) {
    return {{"lambda_ssim", c.lambda_ssim},
            {"iterations", c.iterations},
            {"position_lr_init", c.lr.position},
            {"position_lr_final", c.position_lr_final},
            {"position_lr_max_steps", c.position_lr_max_steps},
            {"rotation_lr", c.lr.rotation},
            {"scaling_lr", c.lr.scale},
            {"opacity_lr", c.lr.opacity},
            {"feature_lr", c.lr.sh_dc},
            {"feature_rest_lr", c.lr.sh_rest},
            {"densify_from_iter", c.densify_from},
            {"densify_until_iter", c.densify_until},
            {"densification_interval", c.densify_interval},
            {"densify_grad_threshold", c.densify_grad_threshold},
            {"percent_dense", c.percent_dense},
            {"opacity_prune_threshold", c.opacity_prune_threshold},
            {"opacity_reset_interval", c.opacity_reset_interval},
            {"max_screen_size", c.max_screen_size},
            {"scene_extent", c.scene_extent},
            {"seed", c.seed},
            {"edited_oversampling", c.edited_oversampling},
            {"background", {c.background.x(), c.background.y(), c.background.z()}}};
}

TrainConfig train_config_from_json(const json& j, const TrainConfig& base) {
    if (!j.is_object()) throw ParameterError("train config must be a JSON object");
    TrainConfig c = base;
    auto num = [](const json& v, const std::string& key) {
        if (!v.is_number()) throw ParameterError("train config: '" + key + "' must be a number");
        return v.get<double>();
    };
    auto integer = [](const json& v, const std::string& key) {
        if (!v.is_number_integer()) throw ParameterError("train config: '" + key + "' must be an integer");
        return v.get<long long>();
    };
    using Setter = std::function<void(const json&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"lambda_ssim", [&](const json& v, const std::string& k) { c.lambda_ssim = num(v, k); }},
        {"iterations", [&](const json& v, const std::string& k) { c.iterations = static_cast<int>(integer(v, k)); }},
        {"position_lr_init", [&](const json& v, const std::string& k) { c.lr.position = num(v, k); }},
        {"position_lr_final", [&](const json& v, const std::string& k) { c.position_lr_final = num(v, k); }},
        {"position_lr_max_steps",
         [&](const json& v, const std::string& k) { c.position_lr_max_steps = static_cast<int>(integer(v, k)); }},
        {"rotation_lr", [&](const json& v, const std::string& k) { c.lr.rotation = num(v, k); }},
        {"scaling_lr", [&](const json& v, const std::string& k) { c.lr.scale = num(v, k); }},
        {"opacity_lr", [&](const json& v, const std::string& k) { c.lr.opacity = num(v, k); }},
        {"feature_lr", [&](const json& v, const std::string& k) { c.lr.sh_dc = num(v, k); }},
        {"feature_rest_lr", [&](const json& v, const std::string& k) { c.lr.sh_rest = num(v, k); }},
        {"densify_from_iter",
         [&](const json& v, const std::string& k) { c.densify_from = static_cast<int>(integer(v, k)); }},
        {"densify_until_iter",
         [&](const json& v, const std::string& k) { c.densify_until = static_cast<int>(integer(v, k)); }},
        {"densification_interval",
         [&](const json& v, const std::string& k) { c.densify_interval = static_cast<int>(integer(v, k)); }},
        {"densify_grad_threshold", [&](const json& v, const std::string& k) { c.densify_grad_threshold = num(v, k); }},
        {"percent_dense", [&](const json& v, const std::string& k) { c.percent_dense = num(v, k); }},
        {"opacity_prune_threshold",
         [&](const json& v, const std::string& k) { c.opacity_prune_threshold = num(v, k); }},
        {"opacity_reset_interval",
         [&](const json& v, const std::string& k) { c.opacity_reset_interval = static_cast<int>(integer(v, k)); }},
        {"max_screen_size", [&](const json& v, const std::string& k) { c.max_screen_size = num(v, k); }},
        {"scene_extent", [&](const json& v, const std::string& k) { c.scene_extent = num(v, k); }},
        {"seed",
         [&](const json& v, const std::string& k) {
             if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                 throw ParameterError("train config: '" + k + "' must be a non-negative integer");
             }
             c.seed = v.get<std::uint64_t>();
         }},
        {"edited_oversampling",
         [&](const json& v, const std::string& k) { c.edited_oversampling = static_cast<int>(integer(v, k)); }},
        {"background",
         [&](const json& v, const std::string& k) {
             if (!v.is_array() || v.size() != 3) throw ParameterError("train config: '" + k + "' must be [r, g, b]");
             for (int i = 0; i < 3; ++i) c.background[i] = num(v[i], k);
         }},
    };
    for (const auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ParameterError("train config: unknown key '" + key + "'");
        it->second(value, key);
    }
    c.validate();
    return c;
}

void SupervisionSet::validate() const {
    if (size() == 0) throw ParameterError("supervision set is empty");
    auto check = [](const SupervisionView& v, bool training) {
        if (v.target.width() != v.camera.width() || v.target.height() != v.camera.height() ||
            v.target.channels() != 3) {
            throw ParameterError("supervision image does not match its camera");
        }
        if (training && (!v.mask.same_size(v.target) || v.mask.channels() != 1)) {
            throw ParameterError("training view mask does not match its image");
        }
        if (!training && !v.mask.empty()) throw ParameterError("edited views carry no mask");
    };
    for (const auto& v : edited_views) check(v, false);
    for (const auto& v : training_views) check(v, true);
}

TrainingError::TrainingError(const std::string& what, int iteration, GaussianScene checkpoint,
                             std::optional<std::filesystem::path> checkpoint_path)
    : Error(what + " at iteration " + std::to_string(iteration)),
      iteration_(iteration),
      checkpoint_(std::move(checkpoint)),
      path_(std::move(checkpoint_path)) {}

json log_entry_to_json(const LogEntry& e) {
    return {{"iter", e.iter},           {"loss", e.loss},   {"l1", e.l1},
            {"ssim_term", e.ssim_term}, {"count", e.count}, {"psnr_probe", e.psnr_probe}};
}

Trainer::Trainer(GaussianScene initial, SupervisionSet supervision, TrainConfig config)
    : scene_(std::move(initial)),
      supervision_(std::move(supervision)),
      config_(config),
      adam_(scene_),
      stats_(scene_.size()),
      rng_(config.seed) {
    config_.validate();
    supervision_.validate();
    scene_.validate();
    build_pool();
}

void Trainer::build_pool() {
    pool_.clear();
    for (std::size_t i = 0; i < supervision_.edited_views.size(); ++i)
        for (int k = 0; k < config_.edited_oversampling; ++k) pool_.push_back(i);
    for (std::size_t i = 0; i < supervision_.training_views.size(); ++i)
        pool_.push_back(supervision_.edited_views.size() + i);
}

const SupervisionView& Trainer::view(std::size_t entry) const {
    const std::size_t n_edit = supervision_.edited_views.size();
    return entry < n_edit ? supervision_.edited_views[entry] : supervision_.training_views[entry - n_edit];
}

namespace {

bool all_finite(const RenderGrad& g) {
    auto finite3 = [](const auto& v) {
        for (const auto& x : v)
            if (!x.allFinite()) return false;
        return true;
    };
    for (double v : g.opacity_logits)
        if (!std::isfinite(v)) return false;
    for (double v : g.sh_coeffs)
        if (!std::isfinite(v)) return false;
    return finite3(g.positions) && finite3(g.rotations) && finite3(g.log_scales);
}

}  // namespace

LogEntry Trainer::step() {
    const int iter = iteration_ + 1;
    LearningRates rates = config_.lr;
    rates.position = exponential_lr(config_.lr.position * config_.scene_extent,
                                    config_.position_lr_final * config_.scene_extent, iter,
                                    config_.position_lr_max_steps);

    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    const SupervisionView& v = view(pool_[pick(rng_)]);
    const RenderOutput out = rasterizer_.forward(scene_, v.camera, config_.background);
    LossResult loss = l_rec(out.color, v, config_.lambda_ssim);
    if (!std::isfinite(loss.loss)) throw TrainingError("loss is not finite", iter, scene_);

    LogEntry entry;
    entry.iter = iter;
    entry.loss = loss.loss;
    entry.l1 = loss.l1;
    entry.ssim_term = loss.ssim_term;
    if (v.is_training_view()) {
        Mask keep = v.mask;
        for (double& m : keep.data()) m = m > 0.5 ? 0.0 : 1.0;
        entry.psnr_probe = mask_count(keep) > 0 ? psnr(out.color, v.target, keep) : kPsnrCap;
    } else {
        entry.psnr_probe = psnr(out.color, v.target);
    }

    RenderOutputGrad upstream;
    upstream.color = std::move(loss.grad);
    const RenderGrad grad = rasterizer_.backward(upstream);
    if (!all_finite(grad)) throw TrainingError("gradient is not finite", iter, scene_);

    const bool densifying = iter < config_.densify_until;
    if (densifying) stats_.add(grad, rasterizer_.radii(), v.camera.width(), v.camera.height());
    adam_.step(scene_, grad, rates);

    if (densifying) {
        if (iter > config_.densify_from && iter % config_.densify_interval == 0) {
            DensityResult result = density_control(scene_, stats_, config_.density_params(iter), rng_);
            adam_.remap(result.origin, result.scene);
            scene_ = std::move(result.scene);
            stats_ = DensityStats(scene_.size());
        }
        if (config_.opacity_reset_interval > 0 && iter % config_.opacity_reset_interval == 0) {
            reset_opacity(scene_);
            adam_.reset_opacity_moments();
        }
    }
    iteration_ = iter;
    entry.count = scene_.size();
    return entry;
}

void Trainer::run(const TrainHooks& hooks) {
    while (!done()) {
        LogEntry entry;
        try {
            entry = step();
        } catch (const TrainingError& e) {
            if (hooks.checkpoint_dir.empty()) throw;
            std::filesystem::create_directories(hooks.checkpoint_dir);
            const auto stem = hooks.checkpoint_dir / "diverged";
            save_checkpoint(stem);
            throw TrainingError(e.what(), e.iteration(), e.checkpoint(), stem);
        }
        if (hooks.on_log && hooks.log_interval > 0 &&
            (entry.iter % hooks.log_interval == 0 || entry.iter == config_.iterations || entry.iter == 1)) {
            hooks.on_log(entry);
        }
        if (!hooks.checkpoint_dir.empty() && hooks.checkpoint_interval > 0 &&
            iteration_ % hooks.checkpoint_interval == 0 && !done()) {
            std::filesystem::create_directories(hooks.checkpoint_dir);
            char name[32];
            std::snprintf(name, sizeof name, "iter_%06d", iteration_);
            save_checkpoint(hooks.checkpoint_dir / name);
        }
    }
}

namespace {

constexpr char kStateMagic[8] = {'S', 'E', 'S', 'T', 'A', 'T', 'E', '1'};

json resumable_config(const TrainConfig& config) {
    json j = train_config_to_json(config);
    j.erase("iterations");
    return j;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return stem.parent_path() / (stem.filename().string() + suffix);
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw FormatError("truncated training state");
    return v;
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 34)) throw FormatError("corrupt training state");
    std::vector<T> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw FormatError("truncated training state");
    return v;
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& stem) const {
    save_ply(scene_, with_suffix(stem, ".ply"));
    std::ostringstream rng_text;
    rng_text << rng_;
    const json config = train_config_to_json(config_);
    save_json({{"iteration", iteration_},
               {"config", config},
               {"config_hash", config_hash(config)},
               {"rng", rng_text.str()},
               {"count", scene_.size()}},
              with_suffix(stem, ".json"));

    const auto path = with_suffix(stem, ".state");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kStateMagic, sizeof kStateMagic);
    put<std::uint64_t>(out, adam_.row_size());
    put<std::int64_t>(out, adam_.steps());
    put_vec(out, adam_.first_moments());
    put_vec(out, adam_.second_moments());
    put_vec(out, stats_.grad_accum);
    put_vec(out, stats_.denom);
    put_vec(out, stats_.max_radii);
    if (!out) throw IoError("failed writing " + path.string());
}

Trainer Trainer::resume(const std::filesystem::path& stem, SupervisionSet supervision, TrainConfig config) {
    const json meta = load_json(with_suffix(stem, ".json"));
    TrainConfig saved = train_config_from_json(meta.at("config"));
    if (resumable_config(saved) != resumable_config(config)) {
        throw ParameterError("checkpoint was written with a different training configuration");
    }
    Trainer trainer(load_ply(with_suffix(stem, ".ply")), std::move(supervision), config);
    trainer.iteration_ = meta.at("iteration").get<int>();
    std::istringstream rng_text(meta.at("rng").get<std::string>());
    rng_text >> trainer.rng_;
    if (!rng_text) throw FormatError("invalid RNG state in checkpoint");

    const auto path = with_suffix(stem, ".state");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[sizeof kStateMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kStateMagic, sizeof magic) != 0) throw FormatError("not a training state file");
    const auto row = get<std::uint64_t>(in);
    const auto steps = get<std::int64_t>(in);
    auto m = get_vec<double>(in);
    auto v = get_vec<double>(in);
    trainer.adam_.restore(steps, std::move(m), std::move(v), row);
    trainer.stats_.grad_accum = get_vec<double>(in);
    trainer.stats_.denom = get_vec<int>(in);
    trainer.stats_.max_radii = get_vec<double>(in);
    const std::size_t n = trainer.scene_.size();
    if (trainer.adam_.first_moments().size() != n * row || trainer.stats_.size() != n ||
        trainer.stats_.denom.size() != n || trainer.stats_.max_radii.size() != n) {
        throw FormatError("training state does not match checkpoint scene");
    }
    return trainer;
}

GaussianScene finetune(const GaussianScene& initial, const SupervisionSet& supervision, const TrainConfig& config,
                       const TrainHooks& hooks) {
    if (config.iterations == 0) {
        config.validate();
        return initial;
    }
    Trainer trainer(initial, supervision, config);
    trainer.run(hooks);
    return trainer.scene();
}

}  // namespace splatedit
