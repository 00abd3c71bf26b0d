#include "splatedit/json_io.hpp"

#include "splatedit/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace splatedit {

using nlohmann::json;

namespace {

template <int N>
Eigen::Matrix<double, N, 1> read_vec(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
        throw ParameterError(std::string("field '") + key + "' must be an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) {
        if (!j.at(key)[i].is_number()) throw ParameterError(std::string("field '") + key + "' must hold numbers");
        v[i] = j.at(key)[i].get<double>();
    }
    return v;
}

template <typename T>
T read_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ParameterError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<T>();
}

}  // namespace

json bbox_to_json(const OrientedBBox& b) {
    return {{"center", {b.center.x(), b.center.y(), b.center.z()}},
            {"half_extents", {b.half_extents.x(), b.half_extents.y(), b.half_extents.z()}},
            {"rotation_wxyz", {b.rotation[0], b.rotation[1], b.rotation[2], b.rotation[3]}}};
}

OrientedBBox bbox_from_json(const json& j) {
    if (!j.is_object()) throw ParameterError("bbox must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key != "center" && key != "half_extents" && key != "rotation_wxyz") {
            throw ParameterError("unknown bbox field '" + key + "'");
        }
        (void)value;
    }
    OrientedBBox b;
    b.center = read_vec<3>(j, "center");
    b.half_extents = read_vec<3>(j, "half_extents");
    b.rotation = read_vec<4>(j, "rotation_wxyz");
    b.validate();
    return b;
}

OrientedBBox load_bbox(const std::filesystem::path& path) { return bbox_from_json(load_json(path)); }

void save_bbox(const OrientedBBox& bbox, const std::filesystem::path& path) { save_json(bbox_to_json(bbox), path); }

json camera_to_json(const Camera& c) {
    const auto& k = c.intrinsics();
    const Mat4d m = c.matrix();
    json mat = json::array();
    for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) mat.push_back(m(r, col));
    return {{"width", k.width}, {"height", k.height}, {"fx", k.fx}, {"fy", k.fy},
            {"cx", k.cx},       {"cy", k.cy},         {"world_to_camera", mat}};
}

Camera camera_from_json(const json& j) {
    if (!j.is_object()) throw ParameterError("camera must be a JSON object");
    Intrinsics k;
    k.width = read_number<int>(j, "width");
    k.height = read_number<int>(j, "height");
    k.fx = read_number<double>(j, "fx");
    k.fy = read_number<double>(j, "fy");
    k.cx = read_number<double>(j, "cx");
    k.cy = read_number<double>(j, "cy");
    const auto m = read_vec<16>(j, "world_to_camera");
    Mat3d r;
    Vec3d t;
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) r(row, col) = m[4 * row + col];
        t[row] = m[4 * row + 3];
    }
    if (m[12] != 0 || m[13] != 0 || m[14] != 0 || m[15] != 1) {
        throw ParameterError("world_to_camera last row must be [0, 0, 0, 1]");
    }
    return Camera(k, r, t);
}

std::vector<CameraEntry> load_camera_set(const std::filesystem::path& path) {
    const json j = load_json(path);
    if (!j.is_array()) throw ParameterError("camera set must be a JSON array: " + path.string());
    std::vector<CameraEntry> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        CameraEntry e;
        e.camera = camera_from_json(j[i]);
        e.name = j[i].value("name", "view_" + std::to_string(i));
        if (j[i].contains("image")) {
            std::filesystem::path img = j[i].at("image").get<std::string>();
            if (img.is_relative()) img = path.parent_path() / img;
            e.image = img.string();
        }
        out.push_back(std::move(e));
    }
    return out;
}

void save_camera_set(const std::vector<CameraEntry>& cameras, const std::filesystem::path& path) {
    json j = json::array();
    for (const auto& e : cameras) {
        json c = camera_to_json(e.camera);
        c["name"] = e.name;
        if (e.image) c["image"] = *e.image;
        j.push_back(c);
    }
    save_json(j, path);
}

json point_cloud_to_json(const PointCloudSample& cloud) {
    json points = json::array(), colors = json::array();
    for (const auto& p : cloud.points) points.push_back({p.x(), p.y(), p.z()});
    for (const auto& c : cloud.colors) colors.push_back({c.x(), c.y(), c.z()});
    return {{"points", points}, {"colors", colors}};
}

PointCloudSample point_cloud_from_json(const json& j) {
    if (!j.is_object() || !j.contains("points") || !j.contains("colors")) {
        throw ParameterError("point cloud needs 'points' and 'colors'");
    }
    PointCloudSample out;
    for (const auto& p : j.at("points")) out.points.emplace_back(p.at(0).get<float>(), p.at(1).get<float>(), p.at(2).get<float>());
    for (const auto& c : j.at("colors")) out.colors.emplace_back(c.at(0).get<float>(), c.at(1).get<float>(), c.at(2).get<float>());
    if (out.points.size() != out.colors.size()) throw ParameterError("point cloud points/colors length mismatch");
    return out;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path.string());
}

std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace splatedit
