#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include <unistd.h>

namespace splatedit::testing {

namespace {

struct Projected {
    std::size_t index;
    double z;
    double mx, my;
    Mat2d inv;
    double opacity;
    Vec3d color;
};

Mat3d rotation_from(const Vec4d& q_raw) {
    const Vec4d q = q_raw / q_raw.norm();
    // Same matrix written via the Eigen quaternion type.
    const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    return quat.toRotationMatrix();
}

}  // namespace

RenderOutput oracle_render(const GaussianScene& scene, const Camera& camera, const Vec3d& background) {
    const int w = camera.width(), h = camera.height();
    const auto& k = camera.intrinsics();
    const double tan_x = 1.3 * 0.5 * w / k.fx, tan_y = 1.3 * 0.5 * h / k.fy;
    const Mat4d view = camera.matrix();
    std::vector<Projected> splats;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const Vec3d p = scene.positions()[i].cast<double>();
        const Vec4d ph = view * Vec4d(p.x(), p.y(), p.z(), 1.0);
        const Vec3d t = ph.head<3>();
        if (t.z() < 0.2) continue;
        const Mat3d r = rotation_from(scene.rotations()[i].cast<double>());
        Mat3d s = Mat3d::Zero();
        for (int a = 0; a < 3; ++a) s(a, a) = std::exp(static_cast<double>(scene.log_scales()[i][a]));
        const Mat3d sigma = r * s * s * r.transpose();
        const double cx = std::min(tan_x, std::max(-tan_x, t.x() / t.z())) * t.z();
        const double cy = std::min(tan_y, std::max(-tan_y, t.y() / t.z())) * t.z();
        Eigen::Matrix<double, 2, 3> jac;
        jac << k.fx / t.z(), 0.0, -k.fx * cx / (t.z() * t.z()), 0.0, k.fy / t.z(), -k.fy * cy / (t.z() * t.z());
        const Mat3d wr = view.topLeftCorner<3, 3>();
        Mat2d cov = jac * wr * sigma * wr.transpose() * jac.transpose();
        cov += 0.3 * Mat2d::Identity();
        if (cov.determinant() <= 0.0) continue;
        Projected sp;
        sp.index = i;
        sp.z = t.z();
        sp.mx = k.fx * t.x() / t.z() + k.cx;
        sp.my = k.fy * t.y() / t.z() + k.cy;
        sp.inv = cov.inverse();
        sp.opacity = 1.0 / (1.0 + std::exp(-static_cast<double>(scene.opacity_logits()[i])));
        const auto sh = scene.sh_of(i);
        Vec3d dir = (p - camera.position()).normalized();
        for (int c = 0; c < 3; ++c) {
            double v = 0.5 + 0.28209479177387814 * sh[c];
            if (scene.sh_degree() >= 1) {
                const double c1 = 0.4886025119029199;
                v += -c1 * dir.y() * sh[3 + c] + c1 * dir.z() * sh[6 + c] - c1 * dir.x() * sh[9 + c];
            }
            sp.color[c] = std::max(0.0, v);
        }
        splats.push_back(sp);
    }
    std::stable_sort(splats.begin(), splats.end(), [](const Projected& a, const Projected& b) { return a.z < b.z; });

    RenderOutput out{Image(w, h, 3), Image(w, h, 1), Image(w, h, 1)};
    const double floor_e = std::exp(-4.5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Vec3d color = Vec3d::Zero();
            double depth = 0.0, t = 1.0;
            for (const auto& sp : splats) {
                const Vec2d d(x - sp.mx, y - sp.my);
                const double m = d.dot(sp.inv * d);
                if (m >= 9.0) continue;
                // exp(-m/2) minus its tangent line at m = 9.
                const double alpha =
                    sp.opacity * (std::exp(-0.5 * m) - floor_e * (1.0 + 4.5 - 0.5 * m)) / (1.0 - 5.5 * floor_e);
                color += t * alpha * sp.color;
                depth += t * alpha * sp.z;
                t *= 1.0 - alpha;
            }
            for (int c = 0; c < 3; ++c) out.color.at(x, y, c) = std::clamp(color[c] + t * background[c], 0.0, 1.0);
            out.alpha.at(x, y) = 1.0 - t;
            out.depth.at(x, y) = 1.0 - t > 1e-3 ? depth / (1.0 - t) : 0.0;
        }
    }
    return out;
}

double oracle_ssim(const Image& a, const Image& b) {
    const int w = a.width(), h = a.height(), ch = a.channels();
    double win[11][11];
    double total = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
            total += win[i][j];
        }
    const double c1 = 0.0001, c2 = 0.0009;
    double sum = 0;
    for (int c = 0; c < ch; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < 11; ++i) {
                    for (int j = 0; j < 11; ++j) {
                        const int yy = y + i - 5, xx = x + j - 5;
                        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                        const double wt = win[i][j] / total;
                        const double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
                        ma += wt * va;
                        mb += wt * vb;
                        saa += wt * va * va;
                        sbb += wt * vb * vb;
                        sab += wt * va * vb;
                    }
                }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
    }
    return sum / (static_cast<double>(w) * h * ch);
}

Mask oracle_box_mask(const OrientedBBox& bbox, const Camera& camera) {
    const auto& k = camera.intrinsics();
    const Mat3d r = bbox.rotation_matrix();
    const Vec3d origin = camera.position();
    const Vec3d o_local = r.transpose() * (origin - bbox.center);
    Mask mask(k.width, k.height, 1);
    for (int y = 0; y < k.height; ++y) {
        for (int x = 0; x < k.width; ++x) {
            const Vec3d d_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
            const Vec3d d_local = r.transpose() * (camera.rotation().transpose() * d_cam);
            double t0 = -1e300, t1 = 1e300;
            bool hit = true;
            for (int a = 0; a < 3 && hit; ++a) {
                if (std::abs(d_local[a]) < 1e-15) {
                    if (std::abs(o_local[a]) > bbox.half_extents[a]) hit = false;
                    continue;
                }
                double ta = (-bbox.half_extents[a] - o_local[a]) / d_local[a];
                double tb = (bbox.half_extents[a] - o_local[a]) / d_local[a];
                if (ta > tb) std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                if (t0 > t1) hit = false;
            }
            if (hit && t1 > 0) mask.at(x, y) = 1.0;
        }
    }
    return mask;
}

bool oracle_point_in_bbox(const OrientedBBox& bbox, const Vec3d& p) {
    Mat4d m = Mat4d::Identity();
    m.topLeftCorner<3, 3>() = Eigen::Quaterniond(bbox.rotation[0], bbox.rotation[1], bbox.rotation[2],
                                                 bbox.rotation[3])
                                  .normalized()
                                  .toRotationMatrix();
    m.topRightCorner<3, 1>() = bbox.center;
    const Vec4d local = m.inverse() * Vec4d(p.x(), p.y(), p.z(), 1.0);
    for (int a = 0; a < 3; ++a)
        if (std::abs(local[a]) > bbox.half_extents[a]) return false;
    return true;
}

Camera random_camera(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> fov(45.0, 75.0);
    const Vec3d target(u(rng), u(rng), u(rng));
    Vec3d offset(u(rng), u(rng), u(rng));
    while (offset.norm() < 0.3) offset = Vec3d(u(rng), u(rng), u(rng));
    const Vec3d position = target + offset.normalized() * 4.0;
    Vec3d up(u(rng), u(rng), u(rng));
    while (up.cross(target - position).norm() < 0.5 * up.norm() * 4.0) up = Vec3d(u(rng), u(rng), u(rng));
    Intrinsics k = Intrinsics::from_fov(width, height, fov(rng));
    k.cx += 0.5 * u(rng);
    k.cy += 0.5 * u(rng);
    return Camera::look_at(k, position, target, up);
}

GaussianScene random_scene(std::mt19937_64& rng, const Camera& camera, const RandomSceneOptions& o) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& k = camera.intrinsics();
    GaussianScene scene(o.sh_degree);
    std::vector<double> depths;
    for (std::size_t i = 0; i < o.count; ++i) {
        double z = 0.0;
        for (bool ok = false; !ok;) {
            z = o.min_depth + (o.max_depth - o.min_depth) * unit(rng);
            ok = std::all_of(depths.begin(), depths.end(), [&](double d) { return std::abs(d - z) >= o.min_depth_gap; });
        }
        depths.push_back(z);
        const double px = k.cx + o.spread * 0.5 * k.width * u(rng);
        const double py = k.cy + o.spread * 0.5 * k.height * u(rng);
        const Vec3d p_cam((px - k.cx) / k.fx * z, (py - k.cy) / k.fy * z, z);
        const Vec3d p_world = camera.rotation().transpose() * (p_cam - camera.translation());
        Gaussian g;
        g.position = p_world.cast<float>();
        g.rotation = Vec4d(u(rng), u(rng), u(rng), u(rng)).normalized().cast<float>();
        for (int a = 0; a < 3; ++a) {
            g.log_scale[a] = static_cast<float>(std::log(o.min_scale + (o.max_scale - o.min_scale) * unit(rng)));
        }
        g.opacity_logit = static_cast<float>(2.0 * u(rng));
        g.sh.assign(scene.sh_stride(), 0.0f);
        for (int c = 0; c < 3; ++c) g.sh[c] = static_cast<float>(rgb_to_sh0(0.2 + 0.6 * unit(rng)));
        for (int kk = 3; kk < scene.sh_stride(); ++kk) g.sh[kk] = static_cast<float>(0.1 * u(rng));
        scene.push_back(g);
    }
    return scene;
}

GaussianScene random_io_scene(std::mt19937_64& rng, std::size_t count, int sh_degree) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    GaussianScene scene(sh_degree);
    scene.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Gaussian g;
        g.position = Vec3f(n(rng), n(rng), n(rng)) * 3.0f;
        g.rotation = Vec4f(n(rng), n(rng), n(rng), n(rng)).normalized();
        g.log_scale = Vec3f(n(rng), n(rng), n(rng)) - Vec3f::Constant(3.0f);
        g.opacity_logit = n(rng) * 2.0f;
        g.sh.resize(scene.sh_stride());
        for (float& v : g.sh) v = n(rng);
        scene.push_back(g);
    }
    return scene;
}

Image random_image(std::mt19937_64& rng, int width, int height, int channels) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(width, height, channels);
    for (double& v : img.data()) v = u(rng);
    return img;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("splatedit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path data_dir() { return SPLATEDIT_TEST_DATA_DIR; }

}  // namespace splatedit::testing
