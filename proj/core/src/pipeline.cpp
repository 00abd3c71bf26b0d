#include "splatedit/pipeline.hpp"

#include "splatedit/errors.hpp"
#include "splatedit/image_io.hpp"
#include "splatedit/json_io.hpp"
#include "splatedit/rasterizer.hpp"

#include <cmath>
#include <random>

namespace splatedit {

void ViewBundle::validate() const {
    const int w = camera.width(), h = camera.height();
    auto check = [&](const Image& img, int channels, const char* what) {
        if (img.width() != w || img.height() != h || img.channels() != channels) {
            throw ParameterError(std::string("view bundle: ") + what + " does not match the camera");
        }
    };
    check(background, 3, "background");
    check(mask, 1, "mask");
    check(depth, 1, "depth");
    for (double v : mask.data())
        if (v != 0.0 && v != 1.0) throw ParameterError("view bundle: mask is not binary");
}

std::vector<ViewBundle> extract_view_bundles(const GaussianScene& original, const GaussianScene& coarse,
                                             const OrientedBBox& bbox, std::span<const Camera> cameras,
                                             const Vec3d& background, MaskMode mask_mode) {
    if (cameras.empty()) throw ParameterError("extract_view_bundles: no cameras");
    bbox.validate();
    original.validate();
    coarse.validate();
    std::vector<ViewBundle> bundles(cameras.size());
    std::size_t covered = 0;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        ViewBundle& b = bundles[i];
        b.camera = cameras[i];
        b.background = render_fast(original, cameras[i], background).color;
        b.mask = project_bbox_mask(bbox, cameras[i], mask_mode);
        b.depth = multiply(render_fast(coarse, cameras[i], background).depth, b.mask);
        if (mask_count(b.mask) > 0) ++covered;
    }
    if (covered == 0) throw EmptyRegionError("empty editing region: the box is not visible from any camera");
    return bundles;
}

GaussianScene seed_coarse_prior(const OrientedBBox& bbox, std::size_t n_gaussians, std::uint64_t seed,
                                int sh_degree) {
    if (n_gaussians < 1) throw ParameterError("seed_coarse_prior: n_gaussians must be at least 1");
    bbox.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const Mat3d rot = bbox.rotation_matrix();
    const float log_scale = static_cast<float>(std::log(0.05 * bbox.half_extents.minCoeff()));
    GaussianScene scene(sh_degree);
    scene.reserve(n_gaussians);
    Gaussian g;
    g.sh.assign(scene.sh_stride(), 0.0f);  // SH zero = mid gray
    g.log_scale = Vec3f::Constant(log_scale);
    g.opacity_logit = 0.0f;
    while (scene.size() < n_gaussians) {
        const Vec3d u(uniform(rng), uniform(rng), uniform(rng));
        if (u.squaredNorm() > 1.0) continue;
        const Vec3d p = bbox.center + rot * u.cwiseProduct(bbox.half_extents);
        g.position = p.cast<float>();
        if (!point_in_bbox(bbox, g.position.cast<double>())) continue;
        scene.push_back(g);
    }
    return scene;
}

const Image& conditioning_image(std::span<const ViewBundle> bundles, std::span<const Image> images) {
    if (bundles.size() != images.size()) {
        throw ParameterError("conditioning_image: response does not match the bundles");
    }
    return images[central_index(images.size())];
}

void save_bundle(const ViewBundle& bundle, const std::filesystem::path& dir, const std::string& name) {
    bundle.validate();
    std::filesystem::create_directories(dir);
    write_pfm(bundle.background, dir / (name + "_background.pfm"));
    write_png(bundle.background, PngKind::rgb8, dir / (name + "_background.png"));
    write_png(bundle.mask, PngKind::mask1, dir / (name + "_mask.png"));
    write_pfm(bundle.depth, dir / (name + "_depth.pfm"));
    save_json({{"camera", camera_to_json(bundle.camera)},
               {"background", name + "_background.pfm"},
               {"mask", name + "_mask.png"},
               {"depth", name + "_depth.pfm"}},
              dir / (name + ".json"));
}

ViewBundle load_bundle(const std::filesystem::path& manifest) {
    const auto j = load_json(manifest);
    const auto dir = manifest.parent_path();
    auto file = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ParameterError("bundle manifest " + manifest.string() + " lacks '" + key + "'");
        }
        return dir / j.at(key).get<std::string>();
    };
    ViewBundle b;
    b.camera = camera_from_json(j.at("camera"));
    b.background = read_pfm(file("background"));
    b.mask = read_png(file("mask"));
    b.depth = read_pfm(file("depth"));
    b.validate();
    return b;
}

}  // namespace splatedit
