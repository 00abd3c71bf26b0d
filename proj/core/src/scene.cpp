#include "splatedit/scene.hpp"

#include "splatedit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace splatedit {

namespace {
// Quaternions already unit to float precision are left untouched so that
// file round-trips stay bit exact.
constexpr double kUnitTolerance = 1e-6;
}  // namespace

GaussianScene::GaussianScene(int sh_degree) : sh_degree_(sh_degree) {
    if (sh_degree < 0 || sh_degree > kMaxShDegree) {
        throw ParameterError("SH degree must be in [0, 3]");
    }
}

void GaussianScene::reserve(std::size_t n) {
    positions_.reserve(n);
    rotations_.reserve(n);
    log_scales_.reserve(n);
    opacity_logits_.reserve(n);
    sh_.reserve(n * sh_stride());
}

void GaussianScene::push_back(const Gaussian& g) {
    if (g.sh.size() != static_cast<std::size_t>(sh_stride())) {
        throw ParameterError("Gaussian SH coefficient count does not match scene degree");
    }
    positions_.push_back(g.position);
    rotations_.push_back(g.rotation);
    log_scales_.push_back(g.log_scale);
    opacity_logits_.push_back(g.opacity_logit);
    sh_.insert(sh_.end(), g.sh.begin(), g.sh.end());
    const double n = g.rotation.cast<double>().norm();
    if (std::abs(n - 1.0) > kUnitTolerance) set_rotation(size() - 1, g.rotation);
}

Gaussian GaussianScene::gaussian(std::size_t i) const {
    Gaussian g;
    g.position = positions_[i];
    g.rotation = rotations_[i];
    g.log_scale = log_scales_[i];
    g.opacity_logit = opacity_logits_[i];
    auto sh = sh_of(i);
    g.sh.assign(sh.begin(), sh.end());
    return g;
}

GaussianScene GaussianScene::select(std::span<const std::size_t> indices) const {
    GaussianScene out(sh_degree_);
    out.reserve(indices.size());
    const std::size_t stride = sh_stride();
    for (std::size_t i : indices) {
        out.positions_.push_back(positions_[i]);
        out.rotations_.push_back(rotations_[i]);
        out.log_scales_.push_back(log_scales_[i]);
        out.opacity_logits_.push_back(opacity_logits_[i]);
        out.sh_.insert(out.sh_.end(), sh_.begin() + i * stride, sh_.begin() + (i + 1) * stride);
    }
    return out;
}

void GaussianScene::append(const GaussianScene& other) {
    if (other.sh_degree_ != sh_degree_) {
        throw ParameterError("cannot append scenes with different SH degrees");
    }
    positions_.insert(positions_.end(), other.positions_.begin(), other.positions_.end());
    rotations_.insert(rotations_.end(), other.rotations_.begin(), other.rotations_.end());
    log_scales_.insert(log_scales_.end(), other.log_scales_.begin(), other.log_scales_.end());
    opacity_logits_.insert(opacity_logits_.end(), other.opacity_logits_.begin(),
                           other.opacity_logits_.end());
    sh_.insert(sh_.end(), other.sh_.begin(), other.sh_.end());
}

void GaussianScene::set_rotation(std::size_t i, const Vec4f& q) {
    const double n = q.cast<double>().norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DataError("quaternion has zero or non-finite norm", i);
    }
    rotations_[i] = (q.cast<double>() / n).cast<float>();
}

Vec3d GaussianScene::base_color(std::size_t i) const {
    const float* sh = sh_.data() + i * sh_stride();
    Vec3d c;
    for (int ch = 0; ch < 3; ++ch) c[ch] = std::clamp(sh0_to_rgb(sh[ch]), 0.0, 1.0);
    return c;
}

void GaussianScene::renormalize_rotations() {
    for (std::size_t i = 0; i < rotations_.size(); ++i) {
        const double n = rotations_[i].cast<double>().norm();
        if (std::abs(n - 1.0) > kUnitTolerance) set_rotation(i, rotations_[i]);
    }
}

void GaussianScene::validate() const {
    auto finite = [](const auto& v) { return v.allFinite(); };
    const std::size_t stride = sh_stride();
    for (std::size_t i = 0; i < size(); ++i) {
        if (!finite(positions_[i])) throw DataError("non-finite position", i);
        if (!finite(rotations_[i])) throw DataError("non-finite rotation", i);
        if (rotations_[i].cast<double>().norm() == 0.0) throw DataError("zero quaternion", i);
        if (!finite(log_scales_[i])) throw DataError("non-finite scale", i);
        if (!std::isfinite(opacity_logits_[i])) throw DataError("non-finite opacity", i);
        for (std::size_t k = 0; k < stride; ++k) {
            if (!std::isfinite(sh_[i * stride + k])) throw DataError("non-finite SH coefficient", i);
        }
    }
}

PointCloudSample sample_point_cloud(const GaussianScene& scene, std::size_t max_points) {
    if (max_points < 1) throw ParameterError("max_points must be >= 1");
    PointCloudSample out;
    const std::size_t n = scene.size();
    const std::size_t count = std::min(n, max_points);
    out.points.reserve(count);
    out.colors.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        // Integer stride keeps indices exact: k * n / count.
        const std::size_t i = k * n / count;
        out.points.push_back(scene.positions()[i]);
        out.colors.push_back(scene.base_color(i).cast<float>());
    }
    return out;
}

}  // namespace splatedit
