#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svgtk/svg_model.hpp"

namespace svgtk {

/// Row-major 8-bit RGB image, white background by convention.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width*height*3

    static RasterImage blank(int w, int h, Rgb color = {255, 255, 255});

    std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

struct Polyline {
    std::vector<Vec2> points;
    bool closed = false;
};

/// Flattens one absolute-form command list into polylines. Curves subdivide
/// until the control polygon sits within `tolerance` of the chord; arcs are
/// sampled at a sagitta-bounded angular step. Z closes the current subpath.
std::vector<Polyline> flatten_path(std::span<const PathCommand> commands, double tolerance = 0.25);

/// SVG F.6.5 endpoint-to-center conversion (with radius scale-up). Exposed for
/// oracle tests.
struct ArcCenter {
    Vec2 center;
    double rx, ry;
    double phi_rad;     // x-axis rotation
    double theta1_rad;  // start angle
    double dtheta_rad;  // signed sweep
};
ArcCenter arc_endpoint_to_center(Vec2 from, const PathCommand& arc);

/// Deterministic scanline renderer: paints elements in document order onto
/// white at size x size, 4x4 supersampled, nonzero/evenodd winding, letterboxed
/// uniform viewBox mapping. Radial gradients paint as their disk-mean stop
/// color; everything else is exact at supersample resolution.
RasterImage render(const SvgDocument& doc, int size = 384);

enum class ImageFormat { Ppm, Png };

/// PPM is binary P6; PNG uses fixed encoder settings (filter 0, zlib level 6)
/// so identical images produce identical bytes.
void write_image(const RasterImage& img, const std::string& path, ImageFormat format);
std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format);

RasterImage read_ppm(const std::string& path);

}  // namespace svgtk
