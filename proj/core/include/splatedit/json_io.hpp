#pragma once

#include "splatedit/camera.hpp"
#include "splatedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace splatedit {

/// {"center":[3], "half_extents":[3], "rotation_wxyz":[4]}
nlohmann::json bbox_to_json(const OrientedBBox& bbox);
/// Throws ParameterError when the object violates the schema.
OrientedBBox bbox_from_json(const nlohmann::json& j);
OrientedBBox load_bbox(const std::filesystem::path& path);
void save_bbox(const OrientedBBox& bbox, const std::filesystem::path& path);

/// {"width","height","fx","fy","cx","cy","world_to_camera":[16 row-major]}
nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);

/// Camera set file entry; `image` optionally names a ground-truth image.
struct CameraEntry {
    Camera camera;
    std::string name;
    std::optional<std::string> image;
};
std::vector<CameraEntry> load_camera_set(const std::filesystem::path& path);
void save_camera_set(const std::vector<CameraEntry>& cameras, const std::filesystem::path& path);

/// {"points":[[x,y,z],...], "colors":[[r,g,b],...]}
nlohmann::json point_cloud_to_json(const PointCloudSample& cloud);
PointCloudSample point_cloud_from_json(const nlohmann::json& j);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const nlohmann::json& j, const std::filesystem::path& path);

/// 64-bit FNV-1a of a canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace splatedit
