#include "config.hpp"

#include <splatedit/errors.hpp>
#include <splatedit/json_io.hpp>

#include <map>

namespace splatedit::cli {

using nlohmann::json;

const char* to_string(TrajectorySide side) {
    switch (side) {
        case TrajectorySide::left: return "left";
        case TrajectorySide::right: return "right";
        case TrajectorySide::full: return "full";
    }
    return "full";
}

TrajectorySide side_from_string(const std::string& text) {
    if (text == "left") return TrajectorySide::left;
    if (text == "right") return TrajectorySide::right;
    if (text == "full") return TrajectorySide::full;
    throw ParameterError("trajectory side must be left, right or full, got '" + text + "'");
}

namespace {

Region region_from_string(const std::string& text) {
    if (text == "full") return Region::full;
    if (text == "masked") return Region::masked;
    if (text == "unmasked") return Region::unmasked;
    throw ParameterError("eval region must be full, masked or unmasked, got '" + text + "'");
}

std::string path_string(const std::filesystem::path& p) { return p.empty() ? std::string() : p.generic_string(); }

template <typename T>
T get(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ParameterError("config: '" + key + "' has the wrong type");
    }
}

}  // namespace

Intrinsics PipelineConfig::intrinsics() const { return Intrinsics::from_fov(width, height, fov_x_degrees); }

json config_to_json(const PipelineConfig& c) {
    json sides = json::array();
    for (auto s : c.sides) sides.push_back(to_string(s));
    json trajectory = {{"n_views", c.trajectory.n_views},
                       {"arc_degrees", c.trajectory.arc_degrees},
                       {"elevation_degrees", c.trajectory.elevation_degrees},
                       {"sides", sides}};
    trajectory["radius"] = c.trajectory.radius ? json(*c.trajectory.radius) : json(nullptr);
    return {{"scene", path_string(c.scene)},
            {"bbox", path_string(c.bbox)},
            {"cameras", path_string(c.cameras)},
            {"output_dir", path_string(c.output_dir)},
            {"image", {{"width", c.width}, {"height", c.height}, {"fov_x_degrees", c.fov_x_degrees}}},
            {"trajectory", trajectory},
            {"mask_mode", c.mask_mode == MaskMode::hull ? "hull" : "rectangle"},
            {"coarse_gaussians", c.coarse_gaussians},
            {"endpoint", c.endpoint},
            {"prompt", c.prompt},
            {"seed", c.seed},
            {"train", train_config_to_json(c.train)},
            {"mask_aware", c.mask_aware},
            {"log_interval", c.log_interval},
            {"checkpoint_interval", c.checkpoint_interval},
            {"eval_region", to_string(c.eval_region)},
            {"max_points", c.max_points}};
}

std::string PipelineConfig::hash() const {
    json j = config_to_json(*this);
    j.erase("output_dir");
    return config_hash(j);
}

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir, PipelineConfig c) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    auto path = [&](const json& v, const std::string& key) {
        const auto text = get<std::string>(v, key);
        if (text.empty()) return std::filesystem::path();
        std::filesystem::path p(text);
        return p.is_relative() ? base_dir / p : p;
    };
    auto object = [](const json& v, const std::string& key) -> const json& {
        if (!v.is_object()) throw ParameterError("config: '" + key + "' must be an object");
        return v;
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "scene") c.scene = path(v, key);
        else if (key == "bbox") c.bbox = path(v, key);
        else if (key == "cameras") c.cameras = path(v, key);
        else if (key == "output_dir") c.output_dir = path(v, key);
        else if (key == "image") {
            for (const auto& [k, w] : object(v, key).items()) {
                if (k == "width") c.width = get<int>(w, k);
                else if (k == "height") c.height = get<int>(w, k);
                else if (k == "fov_x_degrees") c.fov_x_degrees = get<double>(w, k);
                else throw ParameterError("config: unknown key 'image." + k + "'");
            }
        } else if (key == "trajectory") {
            for (const auto& [k, w] : object(v, key).items()) {
                if (k == "n_views") c.trajectory.n_views = get<int>(w, k);
                else if (k == "arc_degrees") c.trajectory.arc_degrees = get<double>(w, k);
                else if (k == "elevation_degrees") c.trajectory.elevation_degrees = get<double>(w, k);
                else if (k == "radius") {
                    if (w.is_null()) c.trajectory.radius.reset();
                    else c.trajectory.radius = get<double>(w, k);
                } else if (k == "sides") {
                    if (!w.is_array() || w.empty()) throw ParameterError("config: 'trajectory.sides' must be a non-empty array");
                    c.sides.clear();
                    for (const auto& s : w) c.sides.push_back(side_from_string(get<std::string>(s, k)));
                } else {
                    throw ParameterError("config: unknown key 'trajectory." + k + "'");
                }
            }
        } else if (key == "mask_mode") {
            const auto m = get<std::string>(v, key);
            if (m == "hull") c.mask_mode = MaskMode::hull;
            else if (m == "rectangle") c.mask_mode = MaskMode::rectangle;
            else throw ParameterError("config: mask_mode must be hull or rectangle");
        } else if (key == "coarse_gaussians") c.coarse_gaussians = get<std::size_t>(v, key);
        else if (key == "endpoint") c.endpoint = get<std::string>(v, key);
        else if (key == "prompt") c.prompt = get<std::string>(v, key);
        else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
        else if (key == "train") c.train = train_config_from_json(v, c.train);
        else if (key == "mask_aware") c.mask_aware = get<bool>(v, key);
        else if (key == "log_interval") c.log_interval = get<int>(v, key);
        else if (key == "checkpoint_interval") c.checkpoint_interval = get<int>(v, key);
        else if (key == "eval_region") c.eval_region = region_from_string(get<std::string>(v, key));
        else if (key == "max_points") c.max_points = get<std::size_t>(v, key);
        else throw ParameterError("config: unknown key '" + key + "'");
    }
    if (c.width < 1 || c.height < 1) throw ParameterError("config: image size must be positive");
    if (c.trajectory.n_views < 2) throw ParameterError("config: trajectory.n_views must be at least 2");
    if (!(c.trajectory.arc_degrees > 0.0 && c.trajectory.arc_degrees <= 360.0)) {
        throw ParameterError("config: trajectory.arc_degrees must lie in (0, 360]");
    }
    if (c.coarse_gaussians < 1) throw ParameterError("config: coarse_gaussians must be at least 1");
    if (c.max_points < 1) throw ParameterError("config: max_points must be at least 1");
    c.train.validate();
    return c;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ParameterError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ParameterError("override has an empty key segment: " + assignment);
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

}  // namespace splatedit::cli
