#include "svgtk/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "svgtk/augment.hpp"
#include "svgtk/errors.hpp"

namespace svgtk {

namespace {

void check_dims(const RasterImage& a, const RasterImage& b) {
    if (a.width != b.width || a.height != b.height) throw DimensionMismatch();
}

std::vector<double> luminance_plane(const RasterImage& img) {
    std::vector<double> y(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::uint8_t* p = img.pixels.data() + 3 * i;
        y[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return y;
}

// separable valid-mode Gaussian filter
std::vector<double> gauss_valid(const std::vector<double>& src, int w, int h,
                                const std::array<double, 11>& k) {
    const int ow = w - 10, oh = h - 10;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < 11; ++i) s += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < 11; ++i) s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    return out;
}

std::array<double, 11> gaussian_kernel() {
    std::array<double, 11> k{};
    double sum = 0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        k[i] = std::exp(-d * d / (2 * 1.5 * 1.5));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

}  // namespace

double ssim(const RasterImage& a, const RasterImage& b) {
    check_dims(a, b);
    if (a.width < 11 || a.height < 11) throw Error("images must be at least 11x11 for SSIM");
    static const std::array<double, 11> kernel = gaussian_kernel();
    const auto xa = luminance_plane(a);
    const auto xb = luminance_plane(b);
    const int w = a.width, h = a.height;
    const std::size_t n = xa.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = xa[i] * xa[i];
        bb[i] = xb[i] * xb[i];
        ab[i] = xa[i] * xb[i];
    }
    const auto mu_a = gauss_valid(xa, w, h, kernel);
    const auto mu_b = gauss_valid(xb, w, h, kernel);
    const auto m_aa = gauss_valid(aa, w, h, kernel);
    const auto m_bb = gauss_valid(bb, w, h, kernel);
    const auto m_ab = gauss_valid(ab, w, h, kernel);

    constexpr double c1 = (0.01 * 255) * (0.01 * 255);
    constexpr double c2 = (0.03 * 255) * (0.03 * 255);
    double total = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        total += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

double psnr(const RasterImage& a, const RasterImage& b) {
    check_dims(a, b);
    double se = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        se += d * d;
    }
    if (se == 0) return 99.0;
    const double mse = se / static_cast<double>(a.pixels.size());
    return std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace {

struct Planes {
    int w, h;
    std::vector<double> data;  // 3 interleaved channels, doubles

    static Planes from(const RasterImage& img) {
        Planes p{img.width, img.height, {}};
        p.data.assign(img.pixels.begin(), img.pixels.end());
        return p;
    }

    Planes downsample2() const {
        Planes out{(w + 1) / 2, (h + 1) / 2, {}};
        out.data.resize(static_cast<std::size_t>(out.w) * out.h * 3);
        for (int y = 0; y < out.h; ++y) {
            const int y0 = 2 * y, y1 = std::min(2 * y + 1, h - 1);
            for (int x = 0; x < out.w; ++x) {
                const int x0 = 2 * x, x1 = std::min(2 * x + 1, w - 1);
                for (int c = 0; c < 3; ++c) {
                    const auto at = [&](int xx, int yy) {
                        return data[3 * (static_cast<std::size_t>(yy) * w + xx) + c];
                    };
                    out.data[3 * (static_cast<std::size_t>(y) * out.w + x) + c] =
                        (at(x0, y0) + at(x1, y0) + at(x0, y1) + at(x1, y1)) / 4.0;
                }
            }
        }
        return out;
    }
};

double mean_abs_diff(const Planes& a, const Planes& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.data.size()) / 255.0;
}

}  // namespace

double pyramid_distance(const RasterImage& a, const RasterImage& b) {
    check_dims(a, b);
    Planes pa = Planes::from(a);
    Planes pb = Planes::from(b);
    double total = mean_abs_diff(pa, pb);
    for (int level = 1; level < 4; ++level) {
        pa = pa.downsample2();
        pb = pb.downsample2();
        total += mean_abs_diff(pa, pb);
    }
    return total / 4.0;
}

PathSemanticsResult path_semantics(const SvgDocument& doc, const ScorerInterface& scorer,
                                   std::string_view prompt, double fraction, Rng& rng,
                                   int render_size) {
    if (doc.elements.empty()) throw EmptyDocument();
    PathSemanticsResult out;
    out.score_full = scorer.score(render(doc, render_size), prompt);
    const SvgDocument dropped = drop_paths(doc, fraction, rng);
    out.score_dropped = scorer.score(render(dropped, render_size), prompt);
    out.drop = out.score_full - out.score_dropped;
    return out;
}

}  // namespace svgtk
