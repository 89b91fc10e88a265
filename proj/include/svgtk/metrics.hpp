#pragma once

#include <string_view>

#include "svgtk/raster.hpp"
#include "svgtk/rng.hpp"
#include "svgtk/svg_model.hpp"

namespace svgtk {

/// Seam for LPIPS-like image-image distances. distance(a, a) == 0; symmetric.
struct PerceptualInterface {
    virtual ~PerceptualInterface() = default;
    virtual double distance(const RasterImage& a, const RasterImage& b) const = 0;
};

/// Seam for CLIP-like image-text scorers (higher is better, deterministic).
struct ScorerInterface {
    virtual ~ScorerInterface() = default;
    virtual double score(const RasterImage& image, std::string_view prompt) const = 0;
};

/// Mean local SSIM over the luminance plane (11x11 Gaussian window with
/// sigma 1.5, k1 = 0.01, k2 = 0.03, valid-window convolution).
double ssim(const RasterImage& a, const RasterImage& b);

/// 10*log10(255^2 / MSE) over all RGB samples; identical images return the
/// 99 dB cap.
double psnr(const RasterImage& a, const RasterImage& b);

/// Mean absolute difference averaged over 4 pyramid levels (full, 1/2, 1/4,
/// 1/8 via edge-clamped 2x2 box downsampling), normalized to [0, 1].
double pyramid_distance(const RasterImage& a, const RasterImage& b);

struct PyramidPerceptual final : PerceptualInterface {
    double distance(const RasterImage& a, const RasterImage& b) const override {
        return pyramid_distance(a, b);
    }
};

/// Reference-image proxy scorer: score = -pyramid_distance(image, reference).
/// Lets candidate selection and Path Semantics run without a neural model.
struct ReferenceImageScorer final : ScorerInterface {
    RasterImage reference;
    explicit ReferenceImageScorer(RasterImage ref) : reference(std::move(ref)) {}
    double score(const RasterImage& image, std::string_view) const override {
        return -pyramid_distance(image, reference);
    }
};

struct PathSemanticsResult {
    double score_full = 0;
    double score_dropped = 0;
    double drop = 0;  // score_full - score_dropped
};

/// Renders the document, renders it again with `fraction` of its top-level
/// elements removed, and reports the scorer drop.
PathSemanticsResult path_semantics(const SvgDocument& doc, const ScorerInterface& scorer,
                                   std::string_view prompt, double fraction, Rng& rng,
                                   int render_size = 384);

}  // namespace svgtk
