#include "splatedit/loss.hpp"

#include "splatedit/errors.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace splatedit {

namespace {

std::array<double, kSsimWindow> gaussian_window() {
    std::array<double, kSsimWindow> w{};
    double sum = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        w[i] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Zero-padded separable blur of a single-channel plane (width x height).
void blur(const std::vector<double>& in, std::vector<double>& out, std::vector<double>& tmp, int width,
          int height) {
    static const auto w = gaussian_window();
    constexpr int r = kSsimWindow / 2;
    tmp.assign(in.size(), 0.0);
    out.assign(in.size(), 0.0);
    for (int y = 0; y < height; ++y) {
        const double* row = in.data() + static_cast<std::size_t>(y) * width;
        double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0;
            const int k0 = std::max(-r, -x), k1 = std::min(r, width - 1 - x);
            for (int k = k0; k <= k1; ++k) acc += w[k + r] * row[x + k];
            dst[x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        double* dst = out.data() + static_cast<std::size_t>(y) * width;
        const int k0 = std::max(-r, -y), k1 = std::min(r, height - 1 - y);
        for (int k = k0; k <= k1; ++k) {
            const double wk = w[k + r];
            const double* src = tmp.data() + static_cast<std::size_t>(y + k) * width;
            for (int x = 0; x < width; ++x) dst[x] += wk * src[x];
        }
    }
}

void check_shapes(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b) || a.empty()) {
        throw ParameterError(std::string(what) + ": image dimensions do not match");
    }
}

// SSIM over all channels; optionally the gradient of mean SSIM w.r.t. `a`.
double ssim_impl(const Image& a, const Image& b, Image* map_out, Image* grad_out) {
    const int width = a.width(), height = a.height(), channels = a.channels();
    const std::size_t np = a.pixel_count();
    const double norm = 1.0 / (static_cast<double>(np) * channels);
    std::vector<double> pa(np), pb(np), prod(np), tmp;
    std::vector<double> mu_a, mu_b, e_aa, e_bb, e_ab;
    std::vector<double> d_mu, d_var, d_cov, g1, g2, g3;
    if (map_out) *map_out = Image(width, height, 1);
    if (grad_out) *grad_out = Image(width, height, channels);
    double total = 0;
    for (int c = 0; c < channels; ++c) {
        for (std::size_t p = 0; p < np; ++p) {
            pa[p] = a.data()[p * channels + c];
            pb[p] = b.data()[p * channels + c];
        }
        blur(pa, mu_a, tmp, width, height);
        blur(pb, mu_b, tmp, width, height);
        for (std::size_t p = 0; p < np; ++p) prod[p] = pa[p] * pa[p];
        blur(prod, e_aa, tmp, width, height);
        for (std::size_t p = 0; p < np; ++p) prod[p] = pb[p] * pb[p];
        blur(prod, e_bb, tmp, width, height);
        for (std::size_t p = 0; p < np; ++p) prod[p] = pa[p] * pb[p];
        blur(prod, e_ab, tmp, width, height);

        if (grad_out) {
            d_mu.resize(np);
            d_var.resize(np);
            d_cov.resize(np);
        }
        for (std::size_t p = 0; p < np; ++p) {
            const double ma = mu_a[p], mb = mu_b[p];
            const double var_a = e_aa[p] - ma * ma;
            const double var_b = e_bb[p] - mb * mb;
            const double cov = e_ab[p] - ma * mb;
            const double a1 = 2 * ma * mb + kSsimC1;
            const double a2 = 2 * cov + kSsimC2;
            const double b1 = ma * ma + mb * mb + kSsimC1;
            const double b2 = var_a + var_b + kSsimC2;
            const double s = (a1 * a2) / (b1 * b2);
            total += s;
            if (map_out) map_out->data()[p] += s / channels;
            if (grad_out) {
                // Written so that the gradient is exactly zero when a == b.
                const double f = a1 / (b1 * b2);
                const double r = a2 / b2;
                const double direct = r * (2 * mb * b1 - 2 * ma * a1) / (b1 * b1);
                d_var[p] = -f * r;
                d_cov[p] = 2 * f;
                d_mu[p] = direct + d_var[p] * (-2 * ma) + d_cov[p] * (-mb);
            }
        }
        if (grad_out) {
            blur(d_mu, g1, tmp, width, height);
            blur(d_var, g2, tmp, width, height);
            blur(d_cov, g3, tmp, width, height);
            for (std::size_t p = 0; p < np; ++p) {
                grad_out->data()[p * channels + c] = norm * (g1[p] + 2 * pa[p] * g2[p] + pb[p] * g3[p]);
            }
        }
    }
    return total * norm;
}

}  // namespace

Image ssim_map(const Image& a, const Image& b) {
    check_shapes(a, b, "ssim");
    Image map;
    ssim_impl(a, b, &map, nullptr);
    return map;
}

double ssim(const Image& a, const Image& b) {
    check_shapes(a, b, "ssim");
    return ssim_impl(a, b, nullptr, nullptr);
}

LossResult l_gs(const Image& render, const Image& target, double lambda) {
    check_shapes(render, target, "l_gs");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("l_gs: lambda must be in [0, 1]");
    LossResult out;
    Image ssim_grad;
    const double s = ssim_impl(render, target, nullptr, lambda > 0.0 ? &ssim_grad : nullptr);
    out.grad = Image(render.width(), render.height(), render.channels());
    const auto r = render.data();
    const auto t = target.data();
    auto g = out.grad.data();
    const double inv_n = 1.0 / static_cast<double>(r.size());
    double l1 = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - t[i];
        l1 += std::abs(d);
        const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
        g[i] = (1.0 - lambda) * sign * inv_n;
        if (lambda > 0.0) g[i] -= lambda * ssim_grad.data()[i];
    }
    out.l1 = l1 * inv_n;
    out.ssim_term = 1.0 - s;
    out.loss = (1.0 - lambda) * out.l1 + lambda * out.ssim_term;
    return out;
}

LossResult l_rec(const Image& render, const SupervisionView& view, double lambda) {
    if (!view.is_training_view()) return l_gs(render, view.target, lambda);
    if (!view.mask.same_size(render) || view.mask.channels() != 1) {
        throw ParameterError("l_rec: mask does not match the render size");
    }
    Image keep(view.mask.width(), view.mask.height(), 1);
    for (std::size_t i = 0; i < keep.size(); ++i) keep.data()[i] = 1.0 - view.mask.data()[i];
    LossResult out = l_gs(multiply(render, keep), multiply(view.target, keep), lambda);
    out.grad = multiply(out.grad, keep);
    return out;
}

}  // namespace splatedit
