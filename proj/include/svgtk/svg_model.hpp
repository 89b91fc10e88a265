#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svgtk/errors.hpp"
#include "svgtk/geometry.hpp"

namespace svgtk {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Parses #RGB, #RRGGBB, rgb(r,g,b) and the CSS named colors.
std::optional<Rgb> parse_color(std::string_view text);
/// Canonical form, always #RRGGBB upper-case hex.
std::string format_color(Rgb c);

enum class PaintKind { None, Solid, Gradient };

struct Paint {
    PaintKind kind = PaintKind::None;
    Rgb color{};
    std::string gradient_id;

    static Paint none() { return {}; }
    static Paint solid(Rgb c) { return {PaintKind::Solid, c, {}}; }
    static Paint gradient(std::string id) { return {PaintKind::Gradient, {}, std::move(id)}; }

    friend bool operator==(const Paint&, const Paint&) = default;
};

enum class FillRule { NonZero, EvenOdd };

struct Style {
    Paint fill = Paint::solid({0, 0, 0});
    Paint stroke = Paint::none();
    double stroke_width = 1.0;
    double opacity = 1.0;
    FillRule fill_rule = FillRule::NonZero;

    friend bool operator==(const Style&, const Style&) = default;
};

enum class PathOp { Move, Line, Cubic, Quad, Arc, Close };

/// Absolute-form path command. Point slots by op:
///   Move/Line: pts[0] = endpoint
///   Cubic:     pts[0] = c1, pts[1] = c2, pts[2] = endpoint
///   Quad:      pts[0] = ctrl, pts[1] = endpoint
///   Arc:       rx, ry, x_rotation_deg, large_arc, sweep; pts[0] = endpoint
struct PathCommand {
    PathOp op = PathOp::Move;
    std::array<Vec2, 3> pts{};
    double rx = 0, ry = 0, x_rotation_deg = 0;
    int large_arc = 0, sweep = 0;

    static PathCommand move(Vec2 p) { return {PathOp::Move, {p, {}, {}}}; }
    static PathCommand line(Vec2 p) { return {PathOp::Line, {p, {}, {}}}; }
    static PathCommand cubic(Vec2 c1, Vec2 c2, Vec2 p) { return {PathOp::Cubic, {c1, c2, p}}; }
    static PathCommand quad(Vec2 c, Vec2 p) { return {PathOp::Quad, {c, p, {}}}; }
    static PathCommand arc(double rx, double ry, double rot, int large, int sweep, Vec2 p) {
        PathCommand cmd{PathOp::Arc, {p, {}, {}}};
        cmd.rx = rx; cmd.ry = ry; cmd.x_rotation_deg = rot;
        cmd.large_arc = large; cmd.sweep = sweep;
        return cmd;
    }
    static PathCommand close() { return {PathOp::Close, {}}; }

    Vec2 endpoint() const {
        switch (op) {
            case PathOp::Cubic: return pts[2];
            case PathOp::Quad: return pts[1];
            default: return pts[0];
        }
    }

    friend bool operator==(const PathCommand&, const PathCommand&) = default;
};

enum class GradientKind { Linear, Radial };

struct GradientStop {
    double offset = 0.0;
    Rgb color{};
    double opacity = 1.0;
    friend bool operator==(const GradientStop&, const GradientStop&) = default;
};

struct GradientDef {
    std::string id;
    GradientKind kind = GradientKind::Linear;
    Vec2 p1{}, p2{};    // linear: endpoints; radial: p1 = center
    double radius = 0;  // radial only
    std::vector<GradientStop> stops;
    friend bool operator==(const GradientDef&, const GradientDef&) = default;
};

/// Line and Polyline exist only between parse and normalize.restrict_vocabulary;
/// normalized documents contain the first six kinds.
enum class ElementKind { Path, Ellipse, Circle, Polygon, Rect, Group, Line, Polyline };

struct Element {
    ElementKind kind = ElementKind::Path;
    Style style;

    std::vector<PathCommand> path;  // Path
    Vec2 center{};                  // Circle, Ellipse
    double rx = 0, ry = 0;          // Circle uses rx only
    Vec2 origin{};                  // Rect top-left
    double width = 0, height = 0;   // Rect
    std::vector<Vec2> points;       // Polygon, Polyline, Line (2 points)
    Transform transform;            // Group only
    std::vector<Element> children;  // Group only

    static Element make_path(std::vector<PathCommand> cmds, Style s = {});
    static Element make_rect(Vec2 origin, double w, double h, Style s = {});
    static Element make_circle(Vec2 c, double r, Style s = {});
    static Element make_ellipse(Vec2 c, double rx, double ry, Style s = {});
    static Element make_polygon(std::vector<Vec2> pts, Style s = {});
    static Element make_polyline(std::vector<Vec2> pts, Style s = {});
    static Element make_line(Vec2 a, Vec2 b, Style s = {});
    static Element make_group(Transform t, std::vector<Element> kids);

    friend bool operator==(const Element&, const Element&) = default;
};

struct ViewBox {
    double min_x = 0, min_y = 0, width = 0, height = 0;
    friend bool operator==(const ViewBox&, const ViewBox&) = default;
};

/// Layered vector scene. Element order is paint order (later occludes earlier).
struct SvgDocument {
    ViewBox viewbox{0, 0, 0, 0};
    std::vector<GradientDef> defs;
    std::vector<Element> elements;

    /// Throws InvalidDocument when an invariant is broken (positive viewbox,
    /// gradient references resolve, paths start with M, flags in {0,1}, ...).
    void validate() const;

    const GradientDef* find_gradient(std::string_view id) const;

    friend bool operator==(const SvgDocument&, const SvgDocument&) = default;
};

/// Parses the supported SVG 1.1 subset. All path commands come out absolute,
/// with H/V/S/T and relative forms rewritten into {M,L,C,Q,A,Z}. A transform
/// on a non-group element is preserved by wrapping the element in a group.
SvgDocument parse_svg(std::string_view text);

/// Canonical deterministic serialization; parse_svg(serialize_svg(d)) == d.
std::string serialize_svg(const SvgDocument& doc);

/// Composes every group transform into child coordinates; the result has no
/// Group elements and renders identically. Rect/Ellipse/Circle under rotation
/// or shear become Polygon/Path as needed.
SvgDocument bake_transforms(const SvgDocument& doc);

/// Shortest decimal that round-trips the value; integers print without a point.
std::string format_number(double v);

}  // namespace svgtk
