#include "splatedit/synthetic.hpp"

#include "splatedit/errors.hpp"

#include <cmath>
#include <random>

namespace splatedit {

namespace {

constexpr double kHalfRoom = 3.0;
constexpr double kWallHeight = 2.5;

struct Builder {
    GaussianScene scene{0};
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> jitter{-0.03, 0.03};

    explicit Builder(std::uint64_t seed) : rng(seed) {}

    void add(const Vec3d& p, const Vec3d& sigma, const Vec3d& rgb, double opacity = 0.98) {
        Gaussian g;
        g.position = p.cast<float>();
        g.log_scale = sigma.array().log().matrix().cast<float>();
        g.opacity_logit = static_cast<float>(logit(opacity));
        g.sh.resize(3);
        for (int c = 0; c < 3; ++c) g.sh[c] = static_cast<float>(rgb_to_sh0(std::clamp(rgb[c] + jitter(rng), 0.0, 1.0)));
        scene.push_back(g);
    }
};

}  // namespace

SyntheticRoom make_synthetic_room(int image_size, std::uint64_t seed, int n_training_views) {
    if (image_size < 8) throw ParameterError("synthetic room: image size must be at least 8");
    if (n_training_views < 1) throw ParameterError("synthetic room: need at least one training view");
    Builder b(seed);

    // Floor: two-tone checkerboard of 0.75 m cells.
    const int floor_n = 28;
    const double floor_step = 2 * kHalfRoom / floor_n;
    for (int i = 0; i < floor_n; ++i) {
        for (int j = 0; j < floor_n; ++j) {
            const double x = -kHalfRoom + (i + 0.5) * floor_step, y = -kHalfRoom + (j + 0.5) * floor_step;
            const bool dark = (static_cast<int>(std::floor(x / 0.75)) + static_cast<int>(std::floor(y / 0.75))) & 1;
            const Vec3d rgb = dark ? Vec3d(0.45, 0.30, 0.18) : Vec3d(0.78, 0.62, 0.42);
            b.add({x, y, 0.0}, {0.6 * floor_step, 0.6 * floor_step, 0.01}, rgb);
        }
    }

    // Walls with a vertical shade gradient.
    const Vec3d wall_colors[4] = {{0.70, 0.78, 0.85}, {0.85, 0.80, 0.65}, {0.65, 0.80, 0.70}, {0.82, 0.70, 0.75}};
    const int wall_u = 20, wall_v = 8;
    const double step_u = 2 * kHalfRoom / wall_u, step_v = kWallHeight / wall_v;
    for (int w = 0; w < 4; ++w) {
        for (int i = 0; i < wall_u; ++i) {
            for (int j = 0; j < wall_v; ++j) {
                const double u = -kHalfRoom + (i + 0.5) * step_u, z = (j + 0.5) * step_v;
                const Vec3d rgb = wall_colors[w] * (0.75 + 0.25 * z / kWallHeight);
                const double s = 0.65 * std::max(step_u, step_v);
                switch (w) {
                    case 0: b.add({kHalfRoom, u, z}, {0.01, s, s}, rgb); break;
                    case 1: b.add({-kHalfRoom, u, z}, {0.01, s, s}, rgb); break;
                    case 2: b.add({u, kHalfRoom, z}, {s, 0.01, s}, rgb); break;
                    default: b.add({u, -kHalfRoom, z}, {s, 0.01, s}, rgb); break;
                }
            }
        }
    }

    // Furniture: ellipsoidal clusters away from the editing region.
    struct Piece {
        Vec3d center, half;
        Vec3d rgb;
        int count;
    };
    const Piece pieces[] = {
        {{1.9, 1.6, 0.45}, {0.5, 0.4, 0.45}, {0.25, 0.35, 0.60}, 160},
        {{-1.8, -1.5, 0.35}, {0.45, 0.6, 0.35}, {0.55, 0.20, 0.20}, 160},
        {{-1.9, 1.9, 0.8}, {0.3, 0.3, 0.8}, {0.30, 0.50, 0.25}, 140},
        {{2.0, -2.0, 0.3}, {0.35, 0.35, 0.3}, {0.80, 0.75, 0.70}, 100},
    };
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const Piece& piece : pieces) {
        for (int k = 0; k < piece.count;) {
            const Vec3d d(u(b.rng), u(b.rng), u(b.rng));
            if (d.squaredNorm() > 1.0) continue;
            const double shade = 0.8 + 0.2 * (d.z() + 1) * 0.5;
            b.add(piece.center + d.cwiseProduct(piece.half), Vec3d::Constant(0.25 * piece.half.minCoeff()),
                  piece.rgb * shade);
            ++k;
        }
    }

    SyntheticRoom room;
    room.scene = std::move(b.scene);
    room.bbox.center = Vec3d(0.0, 0.0, 0.4);
    room.bbox.half_extents = Vec3d(0.4, 0.4, 0.4);
    room.intrinsics = Intrinsics::from_fov(image_size, image_size, 60.0);
    for (int i = 0; i < n_training_views; ++i) {
        const double a = 2 * kPi * (i + 0.25) / n_training_views;
        const Vec3d pos(2.0 * std::cos(a), 2.0 * std::sin(a), 1.0);
        room.training_cameras.push_back(Camera::look_at(room.intrinsics, pos, room.bbox.center, Vec3d::UnitZ()));
    }
    return room;
}

std::vector<Camera> held_out_cameras(const OrientedBBox& bbox, const TrajectorySpec& spec,
                                     const Intrinsics& intrinsics, int count) {
    if (count < 1) throw ParameterError("held_out_cameras: count must be positive");
    const std::vector<double> azimuths = trajectory_azimuths(spec);
    std::vector<double> midpoints;
    for (std::size_t i = 0; i + 1 < azimuths.size(); ++i) midpoints.push_back(0.5 * (azimuths[i] + azimuths[i + 1]));
    if (midpoints.empty()) midpoints = azimuths;
    TrajectorySpec single = spec;
    single.elevation_degrees = spec.elevation_degrees + 5.0;
    const double radius = spec.radius.value_or(2.5 * bbox.half_extents.maxCoeff());
    const Mat3d r = bbox.rotation_matrix();
    const double height = radius * std::tan(deg_to_rad(single.elevation_degrees));
    std::vector<Camera> cams;
    for (int k = 0; k < count; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(k) * midpoints.size()) / count + midpoints.size() / (2 * count);
        const double phi = midpoints[std::min(idx, midpoints.size() - 1)];
        const Vec3d local(radius * std::cos(phi), radius * std::sin(phi), height);
        cams.push_back(Camera::look_at(intrinsics, bbox.center + r * local, bbox.center, r.col(2)));
    }
    return cams;
}

}  // namespace splatedit
