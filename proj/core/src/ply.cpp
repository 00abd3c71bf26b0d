#include "splatedit/ply.hpp"

#include "splatedit/errors.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace splatedit {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

namespace {

struct Property {
    std::string name;
    std::string type;
    std::size_t offset = 0;
    std::size_t size = 0;
};

std::size_t type_size(const std::string& type) {
    static const std::map<std::string, std::size_t> sizes = {
        {"char", 1},   {"uchar", 1},  {"int8", 1},    {"uint8", 1},   {"short", 2},
        {"ushort", 2}, {"int16", 2},  {"uint16", 2},  {"int", 4},     {"uint", 4},
        {"int32", 4},  {"uint32", 4}, {"float", 4},   {"float32", 4}, {"double", 8},
        {"float64", 8}};
    auto it = sizes.find(type);
    if (it == sizes.end()) throw FormatError("unsupported PLY property type '" + type + "'");
    return it->second;
}

double read_scalar(const char* p, const std::string& type) {
    if (type == "float" || type == "float32") {
        float v;
        std::memcpy(&v, p, 4);
        return v;
    }
    if (type == "double" || type == "float64") {
        double v;
        std::memcpy(&v, p, 8);
        return v;
    }
    throw FormatError("Gaussian PLY fields must be float or double, got '" + type + "'");
}

std::vector<std::string> canonical_fields(int sh_degree) {
    std::vector<std::string> f = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    const int rest = 3 * (sh_coeff_count(sh_degree) - 1);
    for (int i = 0; i < rest; ++i) f.push_back("f_rest_" + std::to_string(i));
    for (const char* n : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
        f.emplace_back(n);
    return f;
}

}  // namespace

GaussianScene load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PLY file: " + path.string());

    std::string line;
    std::getline(in, line);
    if (line != "ply") throw FormatError("not a PLY file: " + path.string());

    std::size_t vertex_count = 0;
    bool have_vertex = false;
    bool in_vertex = false;
    bool format_ok = false;
    std::vector<Property> props;
    std::size_t stride = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") {
                throw FormatError("PLY format must be binary_little_endian, got '" + fmt + "'");
            }
            format_ok = true;
        } else if (keyword == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                if (have_vertex) throw FormatError("duplicate vertex element");
                have_vertex = true;
                in_vertex = true;
                vertex_count = count;
            } else {
                if (!have_vertex) throw FormatError("element '" + name + "' precedes vertex element");
                in_vertex = false;  // trailing elements are never read
            }
        } else if (keyword == "property") {
            if (!in_vertex) continue;
            std::string type, name;
            ls >> type;
            if (type == "list") throw FormatError("list properties are not supported in vertex element");
            ls >> name;
            Property p{name, type, stride, type_size(type)};
            stride += p.size;
            props.push_back(p);
        } else if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
            continue;
        } else {
            throw FormatError("unexpected PLY header line: " + line);
        }
    }
    if (line != "end_header") throw FormatError("missing end_header");
    if (!format_ok) throw FormatError("missing format line");
    if (!have_vertex) throw FormatError("missing vertex element");

    std::map<std::string, const Property*> by_name;
    for (const auto& p : props) by_name[p.name] = &p;
    auto require = [&](const std::string& name) -> const Property& {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw FormatError("PLY is missing required field '" + name + "'");
        return *it->second;
    };

    int rest_count = 0;
    while (by_name.count("f_rest_" + std::to_string(rest_count))) ++rest_count;
    int degree = -1;
    for (int d = 0; d <= kMaxShDegree; ++d)
        if (3 * (sh_coeff_count(d) - 1) == rest_count) degree = d;
    if (degree < 0) {
        throw FormatError("PLY has " + std::to_string(rest_count) +
                          " f_rest_* fields, which matches no SH degree in [0, 3]");
    }

    std::vector<const Property*> fields;
    for (const auto& name : canonical_fields(degree)) {
        if (name == "nx" || name == "ny" || name == "nz") continue;
        fields.push_back(&require(name));
    }

    std::vector<char> payload(vertex_count * stride);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
        throw FormatError("PLY payload truncated: expected " + std::to_string(vertex_count) + " vertices");
    }

    GaussianScene scene(degree);
    scene.reserve(vertex_count);
    const int k_coeffs = sh_coeff_count(degree);
    std::vector<double> v(fields.size());
    for (std::size_t i = 0; i < vertex_count; ++i) {
        const char* row = payload.data() + i * stride;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            v[f] = read_scalar(row + fields[f]->offset, fields[f]->type);
            if (!std::isfinite(v[f])) {
                throw DataError("non-finite value in field '" + fields[f]->name + "'", i);
            }
        }
        Gaussian g;
        g.position = Vec3f(v[0], v[1], v[2]);
        g.sh.assign(3 * k_coeffs, 0.0f);
        for (int c = 0; c < 3; ++c) g.sh[c] = static_cast<float>(v[3 + c]);
        // f_rest is stored channel-major: all red coefficients, then green, then blue.
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < k_coeffs; ++k)
                g.sh[3 * k + c] = static_cast<float>(v[6 + c * (k_coeffs - 1) + (k - 1)]);
        const std::size_t base = 6 + 3 * (k_coeffs - 1);
        g.opacity_logit = static_cast<float>(v[base]);
        g.log_scale = Vec3f(v[base + 1], v[base + 2], v[base + 3]);
        g.rotation = Vec4f(v[base + 4], v[base + 5], v[base + 6], v[base + 7]);
        if (g.rotation.cast<double>().norm() == 0.0) throw DataError("zero-length quaternion", i);
        scene.push_back(g);
    }
    return scene;
}

void save_ply(const GaussianScene& scene, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write PLY file: " + path.string());

    const auto fields = canonical_fields(scene.sh_degree());
    out << "ply\nformat binary_little_endian 1.0\nelement vertex " << scene.size() << "\n";
    for (const auto& f : fields) out << "property float " << f << "\n";
    out << "end_header\n";

    const int k_coeffs = scene.sh_coeffs_per_gaussian();
    std::vector<float> row(fields.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto p = scene.positions()[i];
        const auto sh = scene.sh_of(i);
        std::size_t o = 0;
        row[o++] = p.x();
        row[o++] = p.y();
        row[o++] = p.z();
        row[o++] = 0.0f;
        row[o++] = 0.0f;
        row[o++] = 0.0f;
        for (int c = 0; c < 3; ++c) row[o++] = sh[c];
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < k_coeffs; ++k) row[o++] = sh[3 * k + c];
        row[o++] = scene.opacity_logits()[i];
        for (int a = 0; a < 3; ++a) row[o++] = scene.log_scales()[i][a];
        for (int a = 0; a < 4; ++a) row[o++] = scene.rotations()[i][a];
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing PLY file: " + path.string());
}

}  // namespace splatedit
