#pragma once

#include <optional>
#include <string>

#include "svgtk/normalize.hpp"
#include "svgtk/raster.hpp"
#include "svgtk/rng.hpp"
#include "svgtk/svg_model.hpp"

namespace svgtk {

struct AugmentConfig {
    double rotation_range_deg = 15.0;  // sampled in [-r, r]
    double translate_range = 0.1;      // fraction of canvas, sampled in [-t, t]
    double scale_min = 0.8;
    double scale_max = 1.2;
    double hue_shift_deg = 30.0;  // sampled in [-h, h]
    double path_drop_fraction = 0.3;
    double condition_dropout_p = 0.10;

    void validate() const;
};

/// Samples one rotation, translation and scale, applies the composed affine
/// about the canvas center to every element, then re-quantizes. Draw order is
/// rotation, tx, ty, scale.
SvgDocument augment_geometry(const SvgDocument& doc, const AugmentConfig& cfg, Rng& rng,
                             const QuantizationConfig& qcfg = {});

/// Samples one hue shift and rotates every solid paint and gradient stop in
/// HSL space. Grayscale colors are hue-invariant; shift 0 is the identity.
SvgDocument augment_color(const SvgDocument& doc, const AugmentConfig& cfg, Rng& rng);

Rgb shift_hue(Rgb color, double degrees);

/// Removes exactly max(1, round_half_up(fraction*k)) of the k top-level
/// drawable elements, chosen uniformly without replacement; fraction 0 removes
/// none. Survivor order is preserved.
SvgDocument drop_paths(const SvgDocument& doc, double fraction, Rng& rng);

struct Conditions {
    std::optional<std::string> text;
    std::optional<RasterImage> image;
};

struct DropoutResult {
    Conditions conditions;
    bool text_dropped = false;
    bool image_dropped = false;
};

/// Independently nulls the text and image conditions with probability p each
/// (text drawn first).
DropoutResult condition_dropout(Conditions sample, double p, Rng& rng);

}  // namespace svgtk
