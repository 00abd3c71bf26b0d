#include "splatedit/density.hpp"

#include "splatedit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace splatedit {

void DensityStats::add(const RenderGrad& grad, const std::vector<double>& radii, int width, int height) {
    if (grad.visible.size() != size() || radii.size() != size()) {
        throw ParameterError("density stats size mismatch");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (!grad.visible[i]) continue;
        const Vec2d g = grad.means2d[i];
        grad_accum[i] += std::hypot(g.x() * 0.5 * width, g.y() * 0.5 * height);
        denom[i] += 1;
        max_radii[i] = std::max(max_radii[i], radii[i]);
    }
}

void DensityStats::remap(const std::vector<std::int64_t>& origin) {
    DensityStats out(origin.size());
    for (std::size_t i = 0; i < origin.size(); ++i) {
        if (origin[i] < 0) continue;
        out.grad_accum[i] = grad_accum[origin[i]];
        out.denom[i] = denom[origin[i]];
        out.max_radii[i] = max_radii[origin[i]];
    }
    *this = std::move(out);
}

DensityResult density_control(const GaussianScene& scene, const DensityStats& stats, const DensityParams& params,
                              std::mt19937_64& rng) {
    const std::size_t n = scene.size();
    if (stats.size() != n) throw ParameterError("density_control: stats do not match scene");
    const double size_limit = params.percent_dense * params.scene_extent;

    std::vector<std::size_t> clone, split;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = stats.denom[i] > 0 ? stats.grad_accum[i] / stats.denom[i] : 0.0;
        if (!(g >= params.grad_threshold)) continue;
        const double max_scale = std::exp(static_cast<double>(scene.log_scales()[i].maxCoeff()));
        (max_scale <= size_limit ? clone : split).push_back(i);
    }

    // Candidates: originals, clones, split children (with a flag for pruning originals).
    std::vector<Gaussian> candidates;
    std::vector<std::int64_t> origin;
    std::vector<double> radii;
    std::vector<char> split_flag(n, 0);
    for (std::size_t i : split) split_flag[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (split_flag[i]) continue;
        candidates.push_back(scene.gaussian(i));
        origin.push_back(static_cast<std::int64_t>(i));
        radii.push_back(stats.max_radii[i]);
    }
    for (std::size_t i : clone) {
        candidates.push_back(scene.gaussian(i));
        origin.push_back(-1);
        radii.push_back(0.0);
    }
    const double shrink = std::log(0.8 * params.split_count);
    for (std::size_t i : split) {
        const Gaussian src = scene.gaussian(i);
        const Vec3d scale = src.log_scale.cast<double>().array().exp();
        const Mat3d rot = quat_to_matrix(src.rotation.cast<double>());
        for (int k = 0; k < params.split_count; ++k) {
            std::normal_distribution<double> normal(0.0, 1.0);
            Vec3d sample;
            for (int a = 0; a < 3; ++a) sample[a] = normal(rng) * scale[a];
            Gaussian child = src;
            child.position = (src.position.cast<double>() + rot * sample).cast<float>();
            child.log_scale = (src.log_scale.cast<double>().array() - shrink).matrix().cast<float>();
            candidates.push_back(child);
            origin.push_back(-1);
            radii.push_back(0.0);
        }
    }

    DensityResult result{GaussianScene(scene.sh_degree()), {}, clone.size(), split.size(), 0};
    result.scene.reserve(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Gaussian& g = candidates[c];
        bool prune = sigmoid(g.opacity_logit) < params.opacity_prune_threshold;
        if (params.max_screen_size > 0.0) {
            const double max_scale = std::exp(static_cast<double>(g.log_scale.maxCoeff()));
            prune = prune || radii[c] > params.max_screen_size || max_scale > 0.1 * params.scene_extent;
        }
        if (prune) {
            ++result.pruned;
            continue;
        }
        result.scene.push_back(g);
        result.origin.push_back(origin[c]);
    }
    return result;
}

void reset_opacity(GaussianScene& scene, double max_opacity) {
    const float cap = static_cast<float>(logit(max_opacity));
    for (float& v : scene.mutable_opacity_logits()) v = std::min(v, cap);
}

}  // namespace splatedit
