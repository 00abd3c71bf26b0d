#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/scene.hpp"

#include <cstdint>
#include <vector>

namespace splatedit {

/// Small procedural indoor scene with an empty region on the floor, used for
/// demos and end-to-end tests. World +z is up.
struct SyntheticRoom {
    GaussianScene scene;
    OrientedBBox bbox;  ///< empty floor region to insert into
    Intrinsics intrinsics;
    std::vector<Camera> training_cameras;
};

/// Roughly 2000 Gaussians: textured floor, four walls and a few furniture
/// blobs; `n_training_views` cameras on a ring looking at the box.
SyntheticRoom make_synthetic_room(int image_size = 128, std::uint64_t seed = 0, int n_training_views = 16);

/// `count` cameras on the editing circle between the trajectory viewpoints,
/// raised by 5 degrees, for held-out evaluation.
std::vector<Camera> held_out_cameras(const OrientedBBox& bbox, const TrajectorySpec& spec,
                                     const Intrinsics& intrinsics, int count);

}  // namespace splatedit
