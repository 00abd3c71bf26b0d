#pragma once

#include "splatedit/math.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace splatedit {

/// Zeroth-order spherical harmonic basis constant; color = kShC0 * f_dc + 0.5.
inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr int kMaxShDegree = 3;

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Converts a flat RGB color to the degree-0 SH coefficient and back.
inline double rgb_to_sh0(double rgb) { return (rgb - 0.5) / kShC0; }
inline double sh0_to_rgb(double sh) { return kShC0 * sh + 0.5; }

/// One Gaussian, used to build scenes element by element.
struct Gaussian {
    Vec3f position = Vec3f::Zero();
    Vec4f rotation = Vec4f(1, 0, 0, 0);  ///< (w, x, y, z)
    Vec3f log_scale = Vec3f::Zero();
    float opacity_logit = 0.0f;
    /// (degree+1)^2 coefficients, each an RGB triple: sh[3*k + channel].
    std::vector<float> sh;
};

/// Structure-of-arrays Gaussian splatting scene.
///
/// Scales are stored in log space and opacities in logit space so that
/// every parameter is unconstrained during optimization. Rotations are
/// kept at unit norm: every setter renormalizes, and code that writes
/// through the mutable spans must call renormalize_rotations() afterwards.
class GaussianScene {
public:
    explicit GaussianScene(int sh_degree = 0);

    std::size_t size() const { return positions_.size(); }
    bool empty() const { return positions_.empty(); }
    int sh_degree() const { return sh_degree_; }
    int sh_coeffs_per_gaussian() const { return sh_coeff_count(sh_degree_); }
    /// Floats per Gaussian in the SH array (coefficients x 3 channels).
    int sh_stride() const { return 3 * sh_coeff_count(sh_degree_); }

    void reserve(std::size_t n);
    void push_back(const Gaussian& g);
    Gaussian gaussian(std::size_t i) const;

    /// Keeps the Gaussians at `indices`, in that order (duplicates allowed).
    GaussianScene select(std::span<const std::size_t> indices) const;
    /// Appends every Gaussian of `other`. SH degrees must match.
    void append(const GaussianScene& other);

    std::span<const Vec3f> positions() const { return positions_; }
    std::span<const Vec4f> rotations() const { return rotations_; }
    std::span<const Vec3f> log_scales() const { return log_scales_; }
    std::span<const float> opacity_logits() const { return opacity_logits_; }
    std::span<const float> sh_coeffs() const { return sh_; }
    std::span<const float> sh_of(std::size_t i) const {
        return std::span<const float>(sh_).subspan(i * sh_stride(), sh_stride());
    }

    std::span<Vec3f> mutable_positions() { return positions_; }
    std::span<Vec4f> mutable_rotations() { return rotations_; }
    std::span<Vec3f> mutable_log_scales() { return log_scales_; }
    std::span<float> mutable_opacity_logits() { return opacity_logits_; }
    std::span<float> mutable_sh_coeffs() { return sh_; }

    void set_position(std::size_t i, const Vec3f& p) { positions_[i] = p; }
    void set_rotation(std::size_t i, const Vec4f& q);
    void set_log_scale(std::size_t i, const Vec3f& s) { log_scales_[i] = s; }
    void set_opacity_logit(std::size_t i, float v) { opacity_logits_[i] = v; }

    double opacity(std::size_t i) const { return sigmoid(opacity_logits_[i]); }
    /// Degree-0 color clamped to [0,1].
    Vec3d base_color(std::size_t i) const;

    /// Normalizes any quaternion whose norm deviates from 1 by more than 1e-6.
    void renormalize_rotations();

    /// Throws DataError naming the first Gaussian with a non-finite value or
    /// a zero-length quaternion.
    void validate() const;

    bool operator==(const GaussianScene& other) const = default;

private:
    int sh_degree_ = 0;
    std::vector<Vec3f> positions_;
    std::vector<Vec4f> rotations_;
    std::vector<Vec3f> log_scales_;
    std::vector<float> opacity_logits_;
    std::vector<float> sh_;
};

struct PointCloudSample {
    std::vector<Vec3f> points;
    std::vector<Vec3f> colors;  ///< RGB in [0,1]
};

/// Returns min(count, max_points) Gaussian centers picked with a uniform
/// stride starting at index 0, colored by their clamped degree-0 term.
PointCloudSample sample_point_cloud(const GaussianScene& scene, std::size_t max_points);

}  // namespace splatedit
