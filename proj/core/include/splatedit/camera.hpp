#pragma once

#include "splatedit/image.hpp"
#include "splatedit/math.hpp"

#include <optional>
#include <span>
#include <vector>

namespace splatedit {

/// Pinhole intrinsics in pixels. Pixel (u, v) has its center at integer
/// coordinates, so an image of width W spans [-0.5, W - 0.5].
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    /// Square-pixel intrinsics with the principal point at the image center.
    static Intrinsics from_fov(int width, int height, double fov_x_degrees);

    bool operator==(const Intrinsics&) const = default;
};

/// Pinhole camera with an OpenCV-style world-to-camera transform:
/// +x right, +y down, +z forward into the scene.
class Camera {
public:
    Camera() = default;
    /// Throws ParameterError unless the rotation is orthonormal (1e-6) with
    /// det +1 and the intrinsics are positive.
    Camera(const Intrinsics& intrinsics, const Mat3d& rotation, const Vec3d& translation);

    /// Camera at `position` looking at `target`; `up` is a world direction
    /// that ends up pointing toward -y in the image.
    static Camera look_at(const Intrinsics& intrinsics, const Vec3d& position, const Vec3d& target,
                          const Vec3d& up);

    const Intrinsics& intrinsics() const { return intrinsics_; }
    int width() const { return intrinsics_.width; }
    int height() const { return intrinsics_.height; }
    const Mat3d& rotation() const { return rotation_; }
    const Vec3d& translation() const { return translation_; }

    Vec3d position() const { return -rotation_.transpose() * translation_; }
    /// World-space direction of the optical axis.
    Vec3d forward() const { return rotation_.row(2).transpose(); }

    Vec3d world_to_camera(const Vec3d& p) const { return rotation_ * p + translation_; }
    /// Pixel coordinates of a camera-space point with z > 0.
    Vec2d project(const Vec3d& p_cam) const {
        return {intrinsics_.fx * p_cam.x() / p_cam.z() + intrinsics_.cx,
                intrinsics_.fy * p_cam.y() / p_cam.z() + intrinsics_.cy};
    }

    /// Row-major 4x4 world-to-camera matrix.
    Mat4d matrix() const;

    /// Returns a copy with the same pose and new image size/focal lengths.
    Camera with_intrinsics(const Intrinsics& intrinsics) const;

    bool operator==(const Camera&) const = default;

private:
    Intrinsics intrinsics_;
    Mat3d rotation_ = Mat3d::Identity();
    Vec3d translation_ = Vec3d::Zero();
};

/// Oriented editing box. The local +z axis is the "vertical" axis the
/// editing trajectory revolves around.
struct OrientedBBox {
    Vec3d center = Vec3d::Zero();
    Vec3d half_extents = Vec3d::Ones();
    Vec4d rotation = Vec4d(1, 0, 0, 0);  ///< (w, x, y, z)

    /// Throws ParameterError on non-positive extents or a non-unit quaternion.
    void validate() const;
    Mat3d rotation_matrix() const { return quat_to_matrix(rotation); }
    std::vector<Vec3d> corners() const;

    bool operator==(const OrientedBBox&) const = default;
};

bool point_in_bbox(const OrientedBBox& bbox, const Vec3d& p);

enum class TrajectorySide { left, right, full };

struct TrajectorySpec {
    int n_views = 14;
    double arc_degrees = 120.0;
    /// Horizontal distance from the box center; defaults to 2.5 x max half extent.
    std::optional<double> radius;
    double elevation_degrees = 15.0;
    TrajectorySide side = TrajectorySide::full;
};

/// Azimuths (radians, box-local frame, measured from local +x toward +y) of
/// the trajectory cameras, strictly increasing.
std::vector<double> trajectory_azimuths(const TrajectorySpec& spec);

/// Cameras on a circular arc around the box's vertical axis, all aimed at the
/// box center. `left` sweeps [-arc, 0], `right` sweeps [0, arc] and `full`
/// is centered on azimuth 0.
std::vector<Camera> make_trajectory(const OrientedBBox& bbox, const TrajectorySpec& spec,
                                    const Intrinsics& intrinsics);

/// floor((n - 1) / 2); throws ParameterError when n == 0.
std::size_t central_index(std::size_t n);
Camera central_camera(std::span<const Camera> trajectory);

enum class MaskMode {
    hull,       ///< convex hull of the projected (near-clipped) corners
    rectangle,  ///< axis-aligned bounding rectangle of that hull
};

/// Near plane shared by the rasterizer and the mask projection.
inline constexpr double kNearPlane = 0.2;

/// Binary editing mask of the box as seen from `camera`: a pixel is set iff
/// its center lies inside the convex hull of the box corners' projections,
/// with the box clipped against the near plane first.
Mask project_bbox_mask(const OrientedBBox& bbox, const Camera& camera,
                       MaskMode mode = MaskMode::hull);

}  // namespace splatedit
