#include "splatedit/rasterizer.hpp"

#include "splatedit/errors.hpp"
#include "splatedit/sh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace splatedit {

namespace {

constexpr double kCutoffPower = 0.5 * kCutoffSigma * kCutoffSigma;
const double kCutoffExp = std::exp(-kCutoffPower);
// The kernel exp(-power) is shifted by its tangent at the cutoff so that both
// its value and its slope vanish there; gradients stay continuous when a
// pixel crosses the footprint boundary.
const double kKernelNorm = 1.0 / (1.0 - kCutoffExp * (1.0 + kCutoffPower));
/// Limit on |x/z| used for the projection Jacobian, relative to the half FOV.
constexpr double kJacobianClamp = 1.3;

// Everything about a projected Gaussian that the backward pass needs.
struct Projection {
    bool valid = false;
    Vec3d t = Vec3d::Zero();  // camera-space center
    double ratio_x = 0, ratio_y = 0;
    bool clamped_x = false, clamped_y = false;
    Vec4d qn = Vec4d(1, 0, 0, 0);
    double qnorm = 1;
    Mat3d rot = Mat3d::Identity();
    Vec3d scale = Vec3d::Ones();
    Mat3d cov3d = Mat3d::Identity();
    Eigen::Matrix<double, 2, 3> jw = Eigen::Matrix<double, 2, 3>::Zero();
    Mat2d conic = Mat2d::Identity();
    Vec3d raw_color = Vec3d::Zero();
    Vec3d dir = Vec3d::UnitZ();
    double dir_norm = 1;
    std::array<double, 16> basis{};
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // covered pixel-center rectangle
};

// Compact per-splat record read in the compositing inner loop.
struct Splat {
    double mx, my;
    double a, b, c;  // conic (inverse 2D covariance)
    double opacity;
    double depth;
    double color[3];
};

struct PairGrad {
    double mean[2];
    double q00, q01, q11;  // dL/dconic as a full symmetric matrix
    double opacity;
    double color[3];
    double depth;
};

struct Preprocessed {
    std::vector<Projection> proj;
    std::vector<Splat> splats;
    std::vector<std::uint32_t> order;  // valid splats sorted by (depth, index)
};

Preprocessed preprocess(const GaussianScene& scene, const Camera& cam) {
    scene.validate();
    const std::size_t n = scene.size();
    Preprocessed out;
    out.proj.resize(n);
    out.splats.resize(n);

    const auto& k = cam.intrinsics();
    const Mat3d& w = cam.rotation();
    const Vec3d cam_pos = cam.position();
    const double lim_x = kJacobianClamp * 0.5 * k.width / k.fx;
    const double lim_y = kJacobianClamp * 0.5 * k.height / k.fy;
    const int degree = scene.sh_degree();
    const int n_coeffs = scene.sh_coeffs_per_gaussian();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        Projection& s = out.proj[i];
        Splat& sp = out.splats[i];
        const Vec3d p = scene.positions()[i].cast<double>();
        s.t = w * p + cam.translation();
        if (!(s.t.z() >= kNearPlane)) continue;

        const Vec4d q = scene.rotations()[i].cast<double>();
        s.qnorm = q.norm();
        s.qn = q / s.qnorm;
        s.rot = quat_to_matrix(s.qn);
        s.scale = scene.log_scales()[i].cast<double>().array().exp();
        const Mat3d m = s.rot * s.scale.asDiagonal();
        s.cov3d = m * m.transpose();

        const double tz = s.t.z();
        s.ratio_x = s.t.x() / tz;
        s.ratio_y = s.t.y() / tz;
        s.clamped_x = std::abs(s.ratio_x) > lim_x;
        s.clamped_y = std::abs(s.ratio_y) > lim_y;
        const double rx = std::clamp(s.ratio_x, -lim_x, lim_x);
        const double ry = std::clamp(s.ratio_y, -lim_y, lim_y);
        Eigen::Matrix<double, 2, 3> j;
        j << k.fx / tz, 0, -k.fx * rx / tz, 0, k.fy / tz, -k.fy * ry / tz;
        s.jw = j * w;
        Mat2d cov2d = s.jw * s.cov3d * s.jw.transpose();
        cov2d(0, 0) += kCovarianceDilation;
        cov2d(1, 1) += kCovarianceDilation;
        const double det = cov2d.determinant();
        if (!(det > 0.0) || !std::isfinite(det)) continue;
        s.conic = cov2d.inverse();

        const double mx = k.fx * s.ratio_x + k.cx;
        const double my = k.fy * s.ratio_y + k.cy;
        const double hx = kCutoffSigma * std::sqrt(cov2d(0, 0));
        const double hy = kCutoffSigma * std::sqrt(cov2d(1, 1));
        auto lo = [](double v) { return static_cast<int>(std::ceil(std::clamp(v, -2.0, 1e9))); };
        auto hi = [](double v) { return static_cast<int>(std::floor(std::clamp(v, -2.0, 1e9))); };
        s.x0 = std::max(0, lo(mx - hx));
        s.x1 = std::min(k.width - 1, hi(mx + hx));
        s.y0 = std::max(0, lo(my - hy));
        s.y1 = std::min(k.height - 1, hi(my + hy));

        const Vec3d v = p - cam_pos;
        s.dir_norm = v.norm();
        s.dir = s.dir_norm > 0 ? Vec3d(v / s.dir_norm) : Vec3d::UnitZ();
        sh_basis(degree, s.dir, s.basis);
        const auto sh = scene.sh_of(i);
        for (int c = 0; c < 3; ++c) {
            double acc = 0.5;
            for (int kk = 0; kk < n_coeffs; ++kk) acc += s.basis[kk] * sh[3 * kk + c];
            s.raw_color[c] = acc;
            sp.color[c] = std::max(acc, 0.0);
        }
        sp.mx = mx;
        sp.my = my;
        sp.a = s.conic(0, 0);
        sp.b = s.conic(0, 1);
        sp.c = s.conic(1, 1);
        sp.opacity = sigmoid(scene.opacity_logits()[i]);
        sp.depth = tz;
        s.valid = true;
    }

    for (std::size_t i = 0; i < n; ++i)
        if (out.proj[i].valid) out.order.push_back(static_cast<std::uint32_t>(i));
    std::sort(out.order.begin(), out.order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double da = out.splats[a].depth, db = out.splats[b].depth;
        return da < db || (da == db && a < b);
    });
    return out;
}

// Opacity of splat `s` at pixel center (px, py); 0 outside the 3 sigma support.
// `kernel` receives the unscaled kernel value and `slope` its negated
// derivative with respect to the power.
inline double splat_alpha(const Splat& s, double px, double py, double& dx, double& dy, double& kernel,
                          double& slope) {
    dx = px - s.mx;
    dy = py - s.my;
    const double power = 0.5 * (s.a * dx * dx + s.c * dy * dy) + s.b * dx * dy;
    if (!(power < kCutoffPower)) return 0.0;
    const double e = std::exp(-power);
    kernel = (e - kCutoffExp * (1.0 + kCutoffPower - power)) * kKernelNorm;
    slope = (e - kCutoffExp) * kKernelNorm;
    return s.opacity * kernel;
}

struct PixelAccum {
    double color[3] = {0, 0, 0};
    double depth_sum = 0;
    double transmittance = 1;
};

template <bool kTerminate>
PixelAccum composite_pixel(const std::uint32_t* list, std::size_t count, const std::vector<Splat>& splats,
                           double px, double py) {
    PixelAccum acc;
    double dx, dy, kernel, slope;
    for (std::size_t k = 0; k < count; ++k) {
        const Splat& s = splats[list[k]];
        const double alpha = splat_alpha(s, px, py, dx, dy, kernel, slope);
        if (alpha <= 0.0) continue;
        const double wgt = alpha * acc.transmittance;
        for (int c = 0; c < 3; ++c) acc.color[c] += wgt * s.color[c];
        acc.depth_sum += wgt * s.depth;
        acc.transmittance *= 1.0 - alpha;
        if constexpr (kTerminate) {
            if (acc.transmittance < kTransmittanceCutoff) break;
        }
    }
    return acc;
}

void write_pixel(RenderOutput& out, int x, int y, const PixelAccum& acc, const Vec3d& bg) {
    for (int c = 0; c < 3; ++c) {
        out.color.at(x, y, c) = std::clamp(acc.color[c] + acc.transmittance * bg[c], 0.0, 1.0);
    }
    const double alpha = 1.0 - acc.transmittance;
    out.alpha.at(x, y) = alpha;
    out.depth.at(x, y) = alpha > kDepthAlphaThreshold ? acc.depth_sum / alpha : 0.0;
}

RenderOutput make_output(const Camera& cam) {
    return {Image(cam.width(), cam.height(), 3), Image(cam.width(), cam.height(), 1),
            Image(cam.width(), cam.height(), 1)};
}

}  // namespace

RenderGrad::RenderGrad(const GaussianScene& scene)
    : positions(scene.size(), Vec3d::Zero()),
      rotations(scene.size(), Vec4d::Zero()),
      log_scales(scene.size(), Vec3d::Zero()),
      opacity_logits(scene.size(), 0.0),
      sh_coeffs(scene.size() * scene.sh_stride(), 0.0),
      means2d(scene.size(), Vec2d::Zero()),
      visible(scene.size(), 0) {}

RenderOutput render(const GaussianScene& scene, const Camera& camera, const Vec3d& background) {
    const Preprocessed pre = preprocess(scene, camera);
    RenderOutput out = make_output(camera);
#pragma omp parallel for schedule(dynamic)
    for (int y = 0; y < camera.height(); ++y) {
        for (int x = 0; x < camera.width(); ++x) {
            const auto acc = composite_pixel<false>(pre.order.data(), pre.order.size(), pre.splats, x, y);
            write_pixel(out, x, y, acc, background);
        }
    }
    return out;
}

struct TileRasterizer::State {
    const GaussianScene* scene = nullptr;
    Camera camera;
    Vec3d background = Vec3d::Zero();
    Preprocessed pre;
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::uint32_t> tile_offsets;  // size tiles + 1
    std::vector<std::uint32_t> pairs;         // splat index per (tile, depth-rank)
    std::vector<double> radii;
    RenderOutput output;
};

TileRasterizer::TileRasterizer() : state_(std::make_unique<State>()) {}
TileRasterizer::~TileRasterizer() = default;
TileRasterizer::TileRasterizer(TileRasterizer&&) noexcept = default;
TileRasterizer& TileRasterizer::operator=(TileRasterizer&&) noexcept = default;

const std::vector<double>& TileRasterizer::radii() const { return state_->radii; }

RenderOutput TileRasterizer::forward(const GaussianScene& scene, const Camera& camera,
                                     const Vec3d& background) {
    State& st = *state_;
    st.scene = &scene;
    st.camera = camera;
    st.background = background;
    st.pre = preprocess(scene, camera);
    const auto& proj = st.pre.proj;

    st.radii.assign(scene.size(), 0.0);
    st.tiles_x = (camera.width() + kTileSize - 1) / kTileSize;
    st.tiles_y = (camera.height() + kTileSize - 1) / kTileSize;
    const std::size_t n_tiles = static_cast<std::size_t>(st.tiles_x) * st.tiles_y;

    // Counting sort into tiles, visiting splats in depth order so each tile
    // list comes out depth sorted.
    std::vector<std::uint32_t> counts(n_tiles + 1, 0);
    for (std::uint32_t i : st.pre.order) {
        const Projection& s = proj[i];
        if (s.x0 > s.x1 || s.y0 > s.y1) continue;
        for (int ty = s.y0 / kTileSize; ty <= s.y1 / kTileSize; ++ty)
            for (int tx = s.x0 / kTileSize; tx <= s.x1 / kTileSize; ++tx) ++counts[ty * st.tiles_x + tx + 1];
        const auto& sp = st.pre.splats[i];
        st.radii[i] = std::max({sp.mx - s.x0, s.x1 - sp.mx, sp.my - s.y0, s.y1 - sp.my, 1.0});
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    st.tile_offsets = counts;
    st.pairs.assign(counts.back(), 0);
    std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (std::uint32_t i : st.pre.order) {
        const Projection& s = proj[i];
        if (s.x0 > s.x1 || s.y0 > s.y1) continue;
        for (int ty = s.y0 / kTileSize; ty <= s.y1 / kTileSize; ++ty)
            for (int tx = s.x0 / kTileSize; tx <= s.x1 / kTileSize; ++tx)
                st.pairs[cursor[ty * st.tiles_x + tx]++] = i;
    }

    st.output = make_output(camera);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n_tiles); ++t) {
        const int tx = static_cast<int>(t % st.tiles_x), ty = static_cast<int>(t / st.tiles_x);
        const std::uint32_t* list = st.pairs.data() + st.tile_offsets[t];
        const std::size_t count = st.tile_offsets[t + 1] - st.tile_offsets[t];
        const int x_end = std::min(camera.width(), (tx + 1) * kTileSize);
        const int y_end = std::min(camera.height(), (ty + 1) * kTileSize);
        for (int y = ty * kTileSize; y < y_end; ++y) {
            for (int x = tx * kTileSize; x < x_end; ++x) {
                const auto acc = composite_pixel<true>(list, count, st.pre.splats, x, y);
                write_pixel(st.output, x, y, acc, background);
            }
        }
    }
    return st.output;
}

RenderGrad TileRasterizer::backward(const RenderOutputGrad& upstream) {
    State& st = *state_;
    if (st.scene == nullptr) throw ParameterError("backward() called before forward()");
    const GaussianScene& scene = *st.scene;
    const Camera& cam = st.camera;
    const int width = cam.width(), height = cam.height();
    if (upstream.color.width() != width || upstream.color.height() != height ||
        upstream.color.channels() != 3) {
        throw ParameterError("color gradient shape does not match the render");
    }
    const bool has_depth = !upstream.depth.empty();
    const bool has_alpha = !upstream.alpha.empty();
    if (has_depth && (upstream.depth.width() != width || upstream.depth.height() != height ||
                      upstream.depth.channels() != 1)) {
        throw ParameterError("depth gradient shape does not match the render");
    }
    if (has_alpha && (upstream.alpha.width() != width || upstream.alpha.height() != height ||
                      upstream.alpha.channels() != 1)) {
        throw ParameterError("alpha gradient shape does not match the render");
    }

    const std::size_t n_tiles = static_cast<std::size_t>(st.tiles_x) * st.tiles_y;
    std::vector<PairGrad> pair_grads(st.pairs.size(), PairGrad{});
    const Vec3d& bg = st.background;

    struct Contribution {
        std::uint32_t pos;  // index into the tile list
        double alpha, transmittance, kernel, slope, dx, dy;
    };

#pragma omp parallel
    {
        std::vector<Contribution> contribs;
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n_tiles); ++t) {
            const int tx = static_cast<int>(t % st.tiles_x), ty = static_cast<int>(t / st.tiles_x);
            const std::uint32_t base = st.tile_offsets[t];
            const std::uint32_t* list = st.pairs.data() + base;
            const std::size_t count = st.tile_offsets[t + 1] - base;
            const int x_end = std::min(width, (tx + 1) * kTileSize);
            const int y_end = std::min(height, (ty + 1) * kTileSize);
            for (int y = ty * kTileSize; y < y_end; ++y) {
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    // Replay the forward pass, recording what each splat contributed.
                    contribs.clear();
                    double trans = 1.0;
                    double color[3] = {0, 0, 0};
                    double depth_sum = 0;
                    double dx, dy, kernel, slope;
                    for (std::size_t k = 0; k < count; ++k) {
                        const Splat& s = st.pre.splats[list[k]];
                        const double alpha = splat_alpha(s, x, y, dx, dy, kernel, slope);
                        if (alpha <= 0.0) continue;
                        contribs.push_back({static_cast<std::uint32_t>(k), alpha, trans, kernel, slope, dx, dy});
                        const double wgt = alpha * trans;
                        for (int c = 0; c < 3; ++c) color[c] += wgt * s.color[c];
                        depth_sum += wgt * s.depth;
                        trans *= 1.0 - alpha;
                        if (trans < kTransmittanceCutoff) break;
                    }
                    if (contribs.empty()) continue;

                    double g_color[3];
                    for (int c = 0; c < 3; ++c) {
                        const double raw = color[c] + trans * bg[c];
                        g_color[c] = (raw < 0.0 || raw > 1.0) ? 0.0 : upstream.color.at(x, y, c);
                    }
                    const double acc_alpha = 1.0 - trans;
                    double g_alpha = has_alpha ? upstream.alpha.at(x, y) : 0.0;
                    double g_sum = 0.0;  // gradient w.r.t. the unnormalized depth sum
                    if (has_depth && acc_alpha > kDepthAlphaThreshold) {
                        const double g_depth = upstream.depth.at(x, y);
                        const double depth = depth_sum / acc_alpha;
                        g_sum = g_depth / acc_alpha;
                        g_alpha -= g_depth * depth / acc_alpha;
                    }
                    if (g_color[0] == 0.0 && g_color[1] == 0.0 && g_color[2] == 0.0 && g_sum == 0.0 &&
                        g_alpha == 0.0) {
                        continue;
                    }

                    // Reverse sweep: `behind_*` is what lies behind splat j,
                    // normalized by the transmittance just after j.
                    double behind_color[3] = {bg[0], bg[1], bg[2]};
                    double behind_depth = 0.0;
                    double behind_trans = 1.0;
                    for (std::size_t r = contribs.size(); r-- > 0;) {
                        const Contribution& ct = contribs[r];
                        const Splat& s = st.pre.splats[list[ct.pos]];
                        PairGrad& pg = pair_grads[base + ct.pos];
                        const double wgt = ct.alpha * ct.transmittance;

                        double g_a = g_alpha * behind_trans + g_sum * (s.depth - behind_depth);
                        for (int c = 0; c < 3; ++c) {
                            g_a += g_color[c] * (s.color[c] - behind_color[c]);
                            pg.color[c] += g_color[c] * wgt;
                        }
                        g_a *= ct.transmittance;
                        pg.depth += g_sum * wgt;

                        pg.opacity += g_a * ct.kernel;
                        const double g_power = -g_a * s.opacity * ct.slope;
                        pg.mean[0] -= g_power * (s.a * ct.dx + s.b * ct.dy);
                        pg.mean[1] -= g_power * (s.b * ct.dx + s.c * ct.dy);
                        pg.q00 += 0.5 * g_power * ct.dx * ct.dx;
                        pg.q01 += 0.5 * g_power * ct.dx * ct.dy;
                        pg.q11 += 0.5 * g_power * ct.dy * ct.dy;

                        for (int c = 0; c < 3; ++c)
                            behind_color[c] = ct.alpha * s.color[c] + (1.0 - ct.alpha) * behind_color[c];
                        behind_depth = ct.alpha * s.depth + (1.0 - ct.alpha) * behind_depth;
                        behind_trans *= 1.0 - ct.alpha;
                    }
                }
            }
        }
    }

    // Deterministic reduction in (tile, depth) order.
    const std::size_t n = scene.size();
    std::vector<PairGrad> splat_grads(n, PairGrad{});
    for (std::size_t k = 0; k < st.pairs.size(); ++k) {
        PairGrad& d = splat_grads[st.pairs[k]];
        const PairGrad& s = pair_grads[k];
        d.mean[0] += s.mean[0];
        d.mean[1] += s.mean[1];
        d.q00 += s.q00;
        d.q01 += s.q01;
        d.q11 += s.q11;
        d.opacity += s.opacity;
        for (int c = 0; c < 3; ++c) d.color[c] += s.color[c];
        d.depth += s.depth;
    }

    RenderGrad grad(scene);
    const auto& k = cam.intrinsics();
    const Mat3d& w = cam.rotation();
    const int n_coeffs = scene.sh_coeffs_per_gaussian();
    const int degree = scene.sh_degree();
    const int stride = scene.sh_stride();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const Projection& s = st.pre.proj[i];
        if (!s.valid || s.x0 > s.x1 || s.y0 > s.y1) continue;
        grad.visible[i] = 1;
        const PairGrad& g = splat_grads[i];
        const Splat& sp = st.pre.splats[i];

        // Opacity.
        grad.opacity_logits[i] = g.opacity * sp.opacity * (1.0 - sp.opacity);

        // Color through the clamp and the SH basis.
        Vec3d g_raw;
        for (int c = 0; c < 3; ++c) g_raw[c] = s.raw_color[c] > 0.0 ? g.color[c] : 0.0;
        Vec3d g_dir = Vec3d::Zero();
        if (g_raw.squaredNorm() > 0.0) {
            std::array<double, 16> basis;
            std::array<Vec3d, 16> dbasis;
            sh_basis(degree, s.dir, basis, &dbasis);
            const auto sh = scene.sh_of(i);
            for (int kk = 0; kk < n_coeffs; ++kk) {
                double dot = 0.0;
                for (int c = 0; c < 3; ++c) {
                    grad.sh_coeffs[i * stride + 3 * kk + c] = g_raw[c] * basis[kk];
                    dot += g_raw[c] * sh[3 * kk + c];
                }
                g_dir += dot * dbasis[kk];
            }
        }
        Vec3d g_pos = Vec3d::Zero();
        if (degree > 0 && s.dir_norm > 0) {
            g_pos += (g_dir - s.dir * s.dir.dot(g_dir)) / s.dir_norm;
        }

        // Conic -> 2D covariance -> (Jacobian, 3D covariance).
        Mat2d g_conic;
        g_conic << g.q00, g.q01, g.q01, g.q11;
        const Mat2d g_cov2d = -s.conic * g_conic * s.conic;
        const Mat3d g_cov3d = s.jw.transpose() * g_cov2d * s.jw;
        const Eigen::Matrix<double, 2, 3> g_jw = 2.0 * g_cov2d * s.jw * s.cov3d;
        const Eigen::Matrix<double, 2, 3> g_j = g_jw * w.transpose();

        const double tz = s.t.z(), tz2 = tz * tz, tz3 = tz2 * tz;
        Vec3d g_t = Vec3d::Zero();
        // J02 = -fx * clamp(tx/tz) / tz, J12 likewise.
        if (s.clamped_x) {
            const double r = std::clamp(s.ratio_x, -kJacobianClamp * 0.5 * k.width / k.fx,
                                        kJacobianClamp * 0.5 * k.width / k.fx);
            g_t.z() += g_j(0, 2) * k.fx * r / tz2;
        } else {
            g_t.x() += g_j(0, 2) * (-k.fx / tz2);
            g_t.z() += g_j(0, 2) * (2.0 * k.fx * s.t.x() / tz3);
        }
        if (s.clamped_y) {
            const double r = std::clamp(s.ratio_y, -kJacobianClamp * 0.5 * k.height / k.fy,
                                        kJacobianClamp * 0.5 * k.height / k.fy);
            g_t.z() += g_j(1, 2) * k.fy * r / tz2;
        } else {
            g_t.y() += g_j(1, 2) * (-k.fy / tz2);
            g_t.z() += g_j(1, 2) * (2.0 * k.fy * s.t.y() / tz3);
        }
        g_t.z() += g_j(0, 0) * (-k.fx / tz2) + g_j(1, 1) * (-k.fy / tz2);

        // Projected mean and depth.
        g_t.x() += g.mean[0] * k.fx / tz;
        g_t.y() += g.mean[1] * k.fy / tz;
        g_t.z() += -g.mean[0] * k.fx * s.t.x() / tz2 - g.mean[1] * k.fy * s.t.y() / tz2;
        g_t.z() += g.depth;
        g_pos += w.transpose() * g_t;
        grad.positions[i] = g_pos;
        grad.means2d[i] = Vec2d(g.mean[0], g.mean[1]);

        // cov3d = M M^T with M = R S.
        const Mat3d m = s.rot * s.scale.asDiagonal();
        const Mat3d g_m = 2.0 * g_cov3d * m;
        Vec3d g_log_scale;
        for (int a = 0; a < 3; ++a) g_log_scale[a] = g_m.col(a).dot(s.rot.col(a)) * s.scale[a];
        grad.log_scales[i] = g_log_scale;

        const Mat3d g_r = g_m * s.scale.asDiagonal();
        const double qw = s.qn[0], qx = s.qn[1], qy = s.qn[2], qz = s.qn[3];
        Vec4d g_qn;
        g_qn[0] = 2 * (-qz * g_r(0, 1) + qy * g_r(0, 2) + qz * g_r(1, 0) - qx * g_r(1, 2) - qy * g_r(2, 0) +
                       qx * g_r(2, 1));
        g_qn[1] = 2 * (qy * g_r(0, 1) + qz * g_r(0, 2) + qy * g_r(1, 0) - 2 * qx * g_r(1, 1) - qw * g_r(1, 2) +
                       qz * g_r(2, 0) + qw * g_r(2, 1) - 2 * qx * g_r(2, 2));
        g_qn[2] = 2 * (-2 * qy * g_r(0, 0) + qx * g_r(0, 1) + qw * g_r(0, 2) + qx * g_r(1, 0) + qz * g_r(1, 2) -
                       qw * g_r(2, 0) + qz * g_r(2, 1) - 2 * qy * g_r(2, 2));
        g_qn[3] = 2 * (-2 * qz * g_r(0, 0) - qw * g_r(0, 1) + qx * g_r(0, 2) + qw * g_r(1, 0) -
                       2 * qz * g_r(1, 1) + qy * g_r(1, 2) + qx * g_r(2, 0) + qy * g_r(2, 1));
        grad.rotations[i] = (g_qn - s.qn * s.qn.dot(g_qn)) / s.qnorm;
    }
    return grad;
}

RenderOutput render_fast(const GaussianScene& scene, const Camera& camera, const Vec3d& background) {
    TileRasterizer r;
    return r.forward(scene, camera, background);
}

RenderGrad render_backward(const GaussianScene& scene, const Camera& camera, const Vec3d& background,
                           const RenderOutputGrad& upstream) {
    TileRasterizer r;
    r.forward(scene, camera, background);
    return r.backward(upstream);
}

}  // namespace splatedit
