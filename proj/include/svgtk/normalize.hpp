#pragma once

#include <utility>

#include "svgtk/svg_model.hpp"

namespace svgtk {

struct QuantizationConfig {
    int canvas_size = 800;
    int scalar_decimals = 2;

    int coord_levels() const { return canvas_size + 1; }
    double scalar_step() const;

    void validate() const;  // canvas_size >= 2, scalar_decimals in [0,4]
};

struct NormalizationReport {
    int pruned_elements = 0;
    int converted_commands = 0;
    int out_of_range_clamps = 0;
    bool letterboxed = false;
};

/// Removes zero-opacity elements, paintless elements, zero-area primitives,
/// degenerate paths and unreferenced gradients; renames surviving gradients to
/// canonical ids g0, g1, ... Render-exact.
std::pair<SvgDocument, NormalizationReport> prune_invisible(const SvgDocument& doc);

/// Line -> 2-point fill-less Polygon, Polyline -> open Path. Idempotent.
SvgDocument restrict_vocabulary(const SvgDocument& doc);

/// Uniform-scale letterbox mapping of the source viewbox onto
/// [0, canvas_size]^2; coordinates, radii, stroke widths, gradient geometry
/// and group transforms move with it.
SvgDocument normalize_viewbox(const SvgDocument& doc, const QuantizationConfig& cfg);

/// Coordinates round half-away-from-zero to the integer grid and clamp to
/// [0, canvas_size]; arc rotations become integer degrees in [0, 360);
/// scalars round to scalar_decimals places. Idempotent.
SvgDocument quantize(const SvgDocument& doc, const QuantizationConfig& cfg);
SvgDocument quantize(const SvgDocument& doc, const QuantizationConfig& cfg,
                     NormalizationReport& report);

/// prune -> restrict -> normalize_viewbox -> quantize, plus a final prune of
/// anything quantization collapsed to zero area (keeps re-application a
/// fixed point).
std::pair<SvgDocument, NormalizationReport> normalize_pipeline(const SvgDocument& doc,
                                                               const QuantizationConfig& cfg);

}  // namespace svgtk
