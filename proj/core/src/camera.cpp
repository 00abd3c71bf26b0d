#include "splatedit/camera.hpp"

#include "splatedit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace splatedit {

Intrinsics Intrinsics::from_fov(int width, int height, double fov_x_degrees) {
    if (width < 1 || height < 1) throw ParameterError("image size must be positive");
    if (!(fov_x_degrees > 0.0 && fov_x_degrees < 180.0)) throw ParameterError("fov must be in (0, 180)");
    Intrinsics k;
    k.width = width;
    k.height = height;
    k.fx = 0.5 * width / std::tan(0.5 * deg_to_rad(fov_x_degrees));
    k.fy = k.fx;
    k.cx = 0.5 * (width - 1);
    k.cy = 0.5 * (height - 1);
    return k;
}

Camera::Camera(const Intrinsics& intrinsics, const Mat3d& rotation, const Vec3d& translation)
    : intrinsics_(intrinsics), rotation_(rotation), translation_(translation) {
    if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) throw ParameterError("focal lengths must be positive");
    if (intrinsics.width < 1 || intrinsics.height < 1) throw ParameterError("image size must be >= 1");
    if (!rotation.allFinite() || !translation.allFinite()) throw ParameterError("non-finite camera pose");
    const double ortho = (rotation * rotation.transpose() - Mat3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-6) throw ParameterError("camera rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-6) throw ParameterError("camera rotation must have det +1");
}

Camera Camera::look_at(const Intrinsics& intrinsics, const Vec3d& position, const Vec3d& target,
                       const Vec3d& up) {
    const Vec3d forward = (target - position).normalized();
    const Vec3d right_raw = forward.cross(up);
    if (right_raw.norm() < 1e-12) throw ParameterError("look_at: up is parallel to the view direction");
    const Vec3d right = right_raw.normalized();
    const Vec3d down = forward.cross(right);
    Mat3d r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    return Camera(intrinsics, r, -r * position);
}

Mat4d Camera::matrix() const {
    Mat4d m = Mat4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
}

Camera Camera::with_intrinsics(const Intrinsics& intrinsics) const {
    return Camera(intrinsics, rotation_, translation_);
}

void OrientedBBox::validate() const {
    if (!center.allFinite() || !half_extents.allFinite() || !rotation.allFinite()) {
        throw ParameterError("bbox has non-finite values");
    }
    if ((half_extents.array() <= 0.0).any()) throw ParameterError("bbox half extents must be > 0");
    if (std::abs(rotation.norm() - 1.0) > 1e-6) throw ParameterError("bbox rotation must be a unit quaternion");
}

std::vector<Vec3d> OrientedBBox::corners() const {
    const Mat3d r = rotation_matrix();
    std::vector<Vec3d> out;
    out.reserve(8);
    for (int i = 0; i < 8; ++i) {
        const Vec3d local((i & 1) ? half_extents.x() : -half_extents.x(),
                          (i & 2) ? half_extents.y() : -half_extents.y(),
                          (i & 4) ? half_extents.z() : -half_extents.z());
        out.push_back(center + r * local);
    }
    return out;
}

bool point_in_bbox(const OrientedBBox& bbox, const Vec3d& p) {
    const Vec3d local = bbox.rotation_matrix().transpose() * (p - bbox.center);
    return (local.cwiseAbs().array() <= bbox.half_extents.array()).all();
}

std::vector<double> trajectory_azimuths(const TrajectorySpec& spec) {
    if (spec.n_views < 2) throw ParameterError("trajectory needs n_views >= 2");
    if (!(spec.arc_degrees > 0.0 && spec.arc_degrees <= 360.0)) {
        throw ParameterError("trajectory arc must be in (0, 360] degrees");
    }
    const double arc = deg_to_rad(spec.arc_degrees);
    double start = 0.0;
    switch (spec.side) {
        case TrajectorySide::left: start = -arc; break;
        case TrajectorySide::right: start = 0.0; break;
        case TrajectorySide::full: start = -0.5 * arc; break;
    }
    const double step = arc / (spec.n_views - 1);
    std::vector<double> az(spec.n_views);
    for (int i = 0; i < spec.n_views; ++i) az[i] = start + step * i;
    return az;
}

std::vector<Camera> make_trajectory(const OrientedBBox& bbox, const TrajectorySpec& spec,
                                    const Intrinsics& intrinsics) {
    bbox.validate();
    const double radius = spec.radius.value_or(2.5 * bbox.half_extents.maxCoeff());
    if (!(radius > 0.0)) throw ParameterError("trajectory radius must be > 0");
    if (!(std::abs(spec.elevation_degrees) < 90.0)) throw ParameterError("elevation must be in (-90, 90)");

    const Mat3d r = bbox.rotation_matrix();
    const Vec3d up = r.col(2);
    const double height = radius * std::tan(deg_to_rad(spec.elevation_degrees));
    std::vector<Camera> cams;
    for (double phi : trajectory_azimuths(spec)) {
        const Vec3d local(radius * std::cos(phi), radius * std::sin(phi), height);
        cams.push_back(Camera::look_at(intrinsics, bbox.center + r * local, bbox.center, up));
    }
    return cams;
}

std::size_t central_index(std::size_t n) {
    if (n == 0) throw ParameterError("central_camera: empty trajectory");
    return (n - 1) / 2;
}

Camera central_camera(std::span<const Camera> trajectory) {
    return trajectory[central_index(trajectory.size())];
}

namespace {

double cross(const Vec2d& o, const Vec2d& a, const Vec2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Vec2d> convex_hull(std::vector<Vec2d> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2d& a, const Vec2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (pts.size() < 3) return pts;
    std::vector<Vec2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

Mask project_bbox_mask(const OrientedBBox& bbox, const Camera& camera, MaskMode mode) {
    Mask mask(camera.width(), camera.height(), 1);
    const auto corners = bbox.corners();
    std::vector<Vec3d> cam(8);
    for (int i = 0; i < 8; ++i) cam[i] = camera.world_to_camera(corners[i]);

    // Clip the box against z = near: keep front corners plus edge crossings.
    std::vector<Vec2d> projected;
    for (int i = 0; i < 8; ++i)
        if (cam[i].z() >= kNearPlane) projected.push_back(camera.project(cam[i]));
    for (int i = 0; i < 8; ++i) {
        for (int bit : {1, 2, 4}) {
            const int j = i | bit;
            if (j == i) continue;
            const double zi = cam[i].z() - kNearPlane, zj = cam[j].z() - kNearPlane;
            if ((zi < 0) != (zj < 0)) {
                const double t = zi / (zi - zj);
                const Vec3d p = cam[i] + t * (cam[j] - cam[i]);
                projected.push_back(camera.project(Vec3d(p.x(), p.y(), kNearPlane)));
            }
        }
    }
    if (projected.size() < 3) return mask;
    const auto hull = convex_hull(projected);
    if (hull.size() < 3) return mask;

    double min_x = hull[0].x(), max_x = min_x, min_y = hull[0].y(), max_y = min_y;
    for (const auto& p : hull) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    auto lo = [](double v) { return static_cast<int>(std::ceil(std::clamp(v, -1.0, 1e9))); };
    auto hi = [](double v) { return static_cast<int>(std::floor(std::clamp(v, -1.0, 1e9))); };
    const int x0 = std::max(0, lo(min_x)), x1 = std::min(camera.width() - 1, hi(max_x));
    const int y0 = std::max(0, lo(min_y)), y1 = std::min(camera.height() - 1, hi(max_y));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (mode == MaskMode::rectangle) {
                mask.at(x, y) = 1.0;
                continue;
            }
            const Vec2d p(x, y);
            bool inside = true;
            for (std::size_t e = 0; e < hull.size() && inside; ++e) {
                inside = cross(hull[e], hull[(e + 1) % hull.size()], p) >= 0.0;
            }
            if (inside) mask.at(x, y) = 1.0;
        }
    }
    return mask;
}

}  // namespace splatedit
