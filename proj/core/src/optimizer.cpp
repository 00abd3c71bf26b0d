#include "splatedit/optimizer.hpp"

#include "splatedit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace splatedit {

namespace {
// Row layout: position(3) rotation(4) log_scale(3) opacity(1) sh(stride).
constexpr std::size_t kPos = 0, kRot = 3, kScale = 7, kOpacity = 10, kSh = 11;
}  // namespace

double exponential_lr(double init, double final, int step, int max_steps) {
    if (max_steps <= 0) return final;
    const double t = std::clamp(static_cast<double>(step) / max_steps, 0.0, 1.0);
    return std::exp(std::log(init) * (1 - t) + std::log(final) * t);
}

SceneAdam::SceneAdam(const GaussianScene& scene)
    : row_(kSh + scene.sh_stride()), m_(scene.size() * row_, 0.0), v_(scene.size() * row_, 0.0) {}

void SceneAdam::step(GaussianScene& scene, const RenderGrad& grad, const LearningRates& rates) {
    if (m_.size() != scene.size() * row_) throw ParameterError("optimizer state does not match scene size");
    ++steps_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    const double bc2_sqrt = std::sqrt(bc2);
    const int stride = scene.sh_stride();

    auto update = [&](std::size_t slot, double g, double lr, float& param) {
        double& m = m_[slot];
        double& v = v_[slot];
        m = kBeta1 * m + (1 - kBeta1) * g;
        v = kBeta2 * v + (1 - kBeta2) * g * g;
        const double denom = std::sqrt(v) / bc2_sqrt + kEpsilon;
        param = static_cast<float>(param - lr / bc1 * m / denom);
    };

    auto pos = scene.mutable_positions();
    auto rot = scene.mutable_rotations();
    auto scl = scene.mutable_log_scales();
    auto opa = scene.mutable_opacity_logits();
    auto sh = scene.mutable_sh_coeffs();
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const std::size_t base = i * row_;
        for (int a = 0; a < 3; ++a) update(base + kPos + a, grad.positions[i][a], rates.position, pos[i][a]);
        for (int a = 0; a < 4; ++a) update(base + kRot + a, grad.rotations[i][a], rates.rotation, rot[i][a]);
        for (int a = 0; a < 3; ++a) update(base + kScale + a, grad.log_scales[i][a], rates.scale, scl[i][a]);
        update(base + kOpacity, grad.opacity_logits[i], rates.opacity, opa[i]);
        for (int k = 0; k < stride; ++k) {
            const double lr = k < 3 ? rates.sh_dc : rates.sh_rest;
            update(base + kSh + k, grad.sh_coeffs[i * stride + k], lr, sh[i * stride + k]);
        }
    }
    scene.renormalize_rotations();
}

void SceneAdam::remap(const std::vector<std::int64_t>& origin, const GaussianScene& scene) {
    if (origin.size() != scene.size()) throw ParameterError("remap: origin size mismatch");
    std::vector<double> m(origin.size() * row_, 0.0), v(origin.size() * row_, 0.0);
    for (std::size_t i = 0; i < origin.size(); ++i) {
        if (origin[i] < 0) continue;
        const std::size_t src = static_cast<std::size_t>(origin[i]) * row_;
        std::copy_n(m_.begin() + src, row_, m.begin() + i * row_);
        std::copy_n(v_.begin() + src, row_, v.begin() + i * row_);
    }
    m_ = std::move(m);
    v_ = std::move(v);
}

void SceneAdam::reset_opacity_moments() {
    for (std::size_t base = 0; base < m_.size(); base += row_) {
        m_[base + kOpacity] = 0.0;
        v_[base + kOpacity] = 0.0;
    }
}

void SceneAdam::restore(std::int64_t steps, std::vector<double> m, std::vector<double> v, std::size_t row) {
    if (m.size() != v.size() || (row > 0 && m.size() % row != 0)) throw ParameterError("invalid optimizer state");
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
    row_ = row;
}

}  // namespace splatedit
