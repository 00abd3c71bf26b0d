#include "splatedit/metrics.hpp"

#include "splatedit/errors.hpp"
#include "splatedit/rasterizer.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace splatedit {

namespace {

void check_region(const Image& a, const Image& b, const Mask& region) {
    if (!a.same_shape(b) || a.empty()) throw ParameterError("metric: image dimensions do not match");
    if (!region.empty() && (!region.same_size(a) || region.channels() != 1)) {
        throw ParameterError("metric: region mask does not match image size");
    }
}

std::string view_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "view_%03zu", i);
    return buf;
}

bool in_region(const Mask& region, std::size_t p) { return region.empty() || region.data()[p] > 0.5; }

Mask region_mask(Region region, const Mask& mask) {
    if (region == Region::full) return {};
    Mask out = mask;
    if (region == Region::unmasked) {
        for (double& v : out.data()) v = v > 0.5 ? 0.0 : 1.0;
    }
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b, const Mask& region) {
    check_region(a, b, region);
    const int ch = a.channels();
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        if (!in_region(region, p)) continue;
        for (int c = 0; c < ch; ++c) {
            const double d = a.data()[p * ch + c] - b.data()[p * ch + c];
            sum += d * d;
        }
        ++count;
    }
    if (count == 0) throw ParameterError("psnr: empty region");
    const double mse = sum / (static_cast<double>(count) * ch);
    if (mse <= 0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double masked_ssim(const Image& a, const Image& b, const Mask& region) {
    check_region(a, b, region);
    if (region.empty()) return ssim(a, b);
    const Image map = ssim_map(a, b);
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < map.pixel_count(); ++p) {
        if (!in_region(region, p)) continue;
        sum += map.data()[p];
        ++count;
    }
    if (count == 0) throw ParameterError("ssim: empty region");
    return sum / static_cast<double>(count);
}

const char* to_string(Region region) {
    switch (region) {
        case Region::full: return "full";
        case Region::masked: return "masked";
        case Region::unmasked: return "unmasked";
    }
    return "full";
}

void EvalReport::add(ViewMetrics view) {
    views.push_back(std::move(view));
    double p = 0, s = 0;
    for (const auto& v : views) {
        p += v.psnr;
        s += v.ssim;
    }
    mean_psnr = p / static_cast<double>(views.size());
    mean_ssim = s / static_cast<double>(views.size());
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : report.views) views.push_back({{"name", v.name}, {"psnr", v.psnr}, {"ssim", v.ssim}});
    return {{"scene_id", report.scene_id},
            {"config_hash", report.config_hash},
            {"region", to_string(report.region)},
            {"mean_psnr", report.mean_psnr},
            {"mean_ssim", report.mean_ssim},
            {"views", views}};
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "scene_id,config_hash,region,view,psnr,ssim\n";
    out << std::setprecision(9);
    auto row = [&](const std::string& name, double p, double s) {
        out << report.scene_id << ',' << report.config_hash << ',' << to_string(report.region) << ',' << name
            << ',' << p << ',' << s << '\n';
    };
    for (const auto& v : report.views) row(v.name, v.psnr, v.ssim);
    row("mean", report.mean_psnr, report.mean_ssim);
    return out.str();
}

EvalReport consistency_eval(const GaussianScene& scene, std::span<const SupervisionView> views,
                            const Vec3d& background, Region region, std::span<const Mask> masks) {
    if (views.empty()) throw ParameterError("consistency_eval: no views");
    if (region != Region::full && masks.size() != views.size()) {
        throw ParameterError("consistency_eval: one mask per view is required for region metrics");
    }
    EvalReport report;
    report.region = region;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Image rendered = render_fast(scene, views[i].camera, background).color;
        const Mask r = region == Region::full ? Mask{} : region_mask(region, masks[i]);
        report.add({view_name(i), psnr(rendered, views[i].target, r),
                    masked_ssim(rendered, views[i].target, r)});
    }
    return report;
}

EvalReport background_fidelity_eval(const GaussianScene& original, const GaussianScene& edited,
                                    std::span<const Camera> cameras, std::span<const Mask> masks,
                                    const Vec3d& background) {
    if (cameras.empty()) throw ParameterError("background_fidelity_eval: no cameras");
    if (masks.size() != cameras.size()) throw ParameterError("background_fidelity_eval: one mask per camera");
    EvalReport report;
    report.region = Region::unmasked;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const Image a = render_fast(original, cameras[i], background).color;
        const Image b = render_fast(edited, cameras[i], background).color;
        const Mask r = region_mask(Region::unmasked, masks[i]);
        report.add({view_name(i), psnr(a, b, r), masked_ssim(a, b, r)});
    }
    return report;
}

Image contact_sheet(const std::vector<std::vector<Image>>& rows, int gap) {
    if (rows.empty() || rows.front().empty()) throw ParameterError("contact_sheet: no images");
    const int w = rows.front().front().width(), h = rows.front().front().height();
    std::size_t cols = 0;
    for (const auto& row : rows) cols = std::max(cols, row.size());
    const int cw = static_cast<int>(cols) * (w + gap) - gap;
    const int chh = static_cast<int>(rows.size()) * (h + gap) - gap;
    Image sheet(cw, chh, 3, 1.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            const Image& img = rows[r][c];
            if (img.width() != w || img.height() != h || img.channels() != 3) {
                throw ParameterError("contact_sheet: images must be RGB and equally sized");
            }
            const int ox = static_cast<int>(c) * (w + gap), oy = static_cast<int>(r) * (h + gap);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    for (int k = 0; k < 3; ++k) sheet.at(ox + x, oy + y, k) = img.at(x, y, k);
        }
    }
    return sheet;
}

Image difference_image(const Image& a, const Image& b) {
    check_region(a, b, {});
    Image out(a.width(), a.height(), 3);
    const int ch = a.channels();
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        double d = 0;
        for (int c = 0; c < ch; ++c) d += std::abs(a.data()[p * ch + c] - b.data()[p * ch + c]);
        d = std::min(1.0, d / ch);
        for (int c = 0; c < 3; ++c) out.data()[p * 3 + c] = d;
    }
    return out;
}

}  // namespace splatedit
