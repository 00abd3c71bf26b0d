#pragma once

#include "splatedit/rasterizer.hpp"
#include "splatedit/scene.hpp"

#include <cstdint>
#include <vector>

namespace splatedit {

/// Learning rates per parameter kind.
struct LearningRates {
    double position = 0.00016;
    double rotation = 0.001;
    double scale = 0.005;
    double opacity = 0.05;
    double sh_dc = 0.0025;
    double sh_rest = 0.0025 / 20.0;
};

/// Log-linear interpolation from `init` to `final` over `max_steps`, then flat.
double exponential_lr(double init, double final, int step, int max_steps);

/// Adam over every parameter of a GaussianScene. Moments are stored per
/// Gaussian row so that density control can remap them.
class SceneAdam {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-15;

    SceneAdam() = default;
    explicit SceneAdam(const GaussianScene& scene);

    /// Applies one update; `rates.position` is used as given (schedule it first).
    /// Rotations are renormalized afterwards.
    void step(GaussianScene& scene, const RenderGrad& grad, const LearningRates& rates);

    /// Rebuilds moments after density control: row i takes the moments of
    /// `origin[i]`, or zeros when origin[i] < 0.
    void remap(const std::vector<std::int64_t>& origin, const GaussianScene& scene);

    /// Zeroes the opacity moments (after an opacity reset).
    void reset_opacity_moments();

    std::size_t row_size() const { return row_; }
    std::int64_t steps() const { return steps_; }
    const std::vector<double>& first_moments() const { return m_; }
    const std::vector<double>& second_moments() const { return v_; }
    void restore(std::int64_t steps, std::vector<double> m, std::vector<double> v, std::size_t row);

private:
    std::size_t row_ = 0;
    std::int64_t steps_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace splatedit
