#include "svgtk/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "svgtk/bake.hpp"
#include "svgtk/errors.hpp"

namespace svgtk {

double QuantizationConfig::scalar_step() const {
    double s = 1.0;
    for (int i = 0; i < scalar_decimals; ++i) s /= 10.0;
    return s;
}

void QuantizationConfig::validate() const {
    if (canvas_size < 2) throw Error("canvas_size must be at least 2");
    if (scalar_decimals < 0 || scalar_decimals > 4)
        throw Error("scalar_decimals must be in [0, 4]");
}

// ---------------------------------------------------------------------------
// prune

namespace {

bool effectively_strokeless(const Style& s) {
    return s.stroke.kind == PaintKind::None || s.stroke_width <= 0.0;
}

bool path_is_degenerate(const Element& el) {
    // invisible only if every point (control points included) coincides
    Vec2 first{};
    bool have_first = false;
    for (const auto& c : el.path) {
        int npts = 0;
        switch (c.op) {
            case PathOp::Move:
            case PathOp::Line:
            case PathOp::Arc: npts = 1; break;
            case PathOp::Quad: npts = 2; break;
            case PathOp::Cubic: npts = 3; break;
            case PathOp::Close: npts = 0; break;
        }
        for (int i = 0; i < npts; ++i) {
            if (!have_first) {
                first = c.pts[i];
                have_first = true;
            } else if (!(c.pts[i] == first)) {
                return false;
            }
        }
    }
    return true;
}

bool element_invisible(const Element& el) {
    if (el.style.opacity == 0.0) return true;
    if (el.kind == ElementKind::Group) return false;
    const bool paintless = el.style.fill.kind == PaintKind::None && effectively_strokeless(el.style);
    if (paintless) return true;
    switch (el.kind) {
        case ElementKind::Rect: return el.width == 0.0 || el.height == 0.0;
        case ElementKind::Circle: return el.rx == 0.0;
        case ElementKind::Ellipse: return el.rx == 0.0 || el.ry == 0.0;
        case ElementKind::Path: return effectively_strokeless(el.style) && path_is_degenerate(el);
        default: return false;
    }
}

int count_drawables(const Element& el) {
    if (el.kind != ElementKind::Group) return 1;
    int n = 1;  // the group itself
    for (const auto& k : el.children) n += count_drawables(k);
    return n;
}

std::vector<Element> prune_children(const std::vector<Element>& in, NormalizationReport& report) {
    std::vector<Element> out;
    for (const auto& el : in) {
        if (element_invisible(el)) {
            report.pruned_elements += count_drawables(el);
            continue;
        }
        if (el.kind == ElementKind::Group) {
            Element g = el;
            g.children = prune_children(el.children, report);
            if (g.children.empty()) {
                report.pruned_elements += 1;
                continue;
            }
            out.push_back(std::move(g));
        } else {
            out.push_back(el);
        }
    }
    return out;
}

void collect_refs(const Element& el, std::set<std::string>& refs) {
    if (el.style.fill.kind == PaintKind::Gradient) refs.insert(el.style.fill.gradient_id);
    if (el.style.stroke.kind == PaintKind::Gradient) refs.insert(el.style.stroke.gradient_id);
    for (const auto& k : el.children) collect_refs(k, refs);
}

void rewrite_refs(Element& el, const std::map<std::string, std::string>& renames) {
    if (el.style.fill.kind == PaintKind::Gradient)
        el.style.fill.gradient_id = renames.at(el.style.fill.gradient_id);
    if (el.style.stroke.kind == PaintKind::Gradient)
        el.style.stroke.gradient_id = renames.at(el.style.stroke.gradient_id);
    for (auto& k : el.children) rewrite_refs(k, renames);
}

}  // namespace

std::pair<SvgDocument, NormalizationReport> prune_invisible(const SvgDocument& doc) {
    doc.validate();
    NormalizationReport report;
    SvgDocument out;
    out.viewbox = doc.viewbox;
    out.elements = prune_children(doc.elements, report);

    std::set<std::string> refs;
    for (const auto& el : out.elements) collect_refs(el, refs);
    std::map<std::string, std::string> renames;
    for (const auto& def : doc.defs) {
        if (!refs.count(def.id)) continue;
        GradientDef kept = def;
        kept.id = "g" + std::to_string(out.defs.size());
        renames.emplace(def.id, kept.id);
        out.defs.push_back(std::move(kept));
    }
    for (auto& el : out.elements) rewrite_refs(el, renames);
    return {std::move(out), report};
}

// ---------------------------------------------------------------------------
// restrict

namespace {

Element restrict_element(const Element& el, NormalizationReport& report) {
    switch (el.kind) {
        case ElementKind::Line: {
            report.converted_commands += 1;
            Style s = el.style;
            s.fill = Paint::none();
            return Element::make_polygon(el.points, std::move(s));
        }
        case ElementKind::Polyline: {
            report.converted_commands += 1;
            std::vector<PathCommand> cmds;
            cmds.reserve(el.points.size());
            for (std::size_t i = 0; i < el.points.size(); ++i) {
                cmds.push_back(i == 0 ? PathCommand::move(el.points[i])
                                      : PathCommand::line(el.points[i]));
            }
            return Element::make_path(std::move(cmds), el.style);
        }
        case ElementKind::Group: {
            Element g = el;
            for (auto& k : g.children) k = restrict_element(k, report);
            return g;
        }
        default:
            return el;
    }
}

SvgDocument restrict_impl(const SvgDocument& doc, NormalizationReport& report) {
    SvgDocument out = doc;
    for (auto& el : out.elements) el = restrict_element(el, report);
    return out;
}

}  // namespace

SvgDocument restrict_vocabulary(const SvgDocument& doc) {
    NormalizationReport report;
    return restrict_impl(doc, report);
}

// ---------------------------------------------------------------------------
// viewbox

SvgDocument normalize_viewbox(const SvgDocument& doc, const QuantizationConfig& cfg) {
    cfg.validate();
    const ViewBox& vb = doc.viewbox;
    if (!(vb.width > 0.0) || !(vb.height > 0.0)) throw DegenerateViewbox();
    const double canvas = cfg.canvas_size;
    const double scale = canvas / std::max(vb.width, vb.height);
    const Transform map =
        Transform::translate((canvas - vb.width * scale) / 2.0,
                             (canvas - vb.height * scale) / 2.0) *
        Transform::scale(scale, scale) * Transform::translate(-vb.min_x, -vb.min_y);
    const Transform inv = map.inverse();

    SvgDocument out;
    out.viewbox = {0, 0, canvas, canvas};
    for (const auto& def : doc.defs) out.defs.push_back(detail::bake_gradient(def, map, false));

    auto walk = [&](auto&& self, const Element& el) -> Element {
        if (el.kind == ElementKind::Group) {
            Element g = el;
            g.transform = map * el.transform * inv;  // conjugate: children move too
            for (auto& k : g.children) k = self(self, k);
            return g;
        }
        return detail::bake_element(el, map, false);
    };
    for (const auto& el : doc.elements) out.elements.push_back(walk(walk, el));
    return out;
}

// ---------------------------------------------------------------------------
// quantize

namespace {

struct Quantizer {
    const QuantizationConfig& cfg;
    NormalizationReport& report;

    double coord(double v) {
        double q = std::round(v);  // round() is half-away-from-zero
        if (q < 0.0 || q > cfg.canvas_size) {
            report.out_of_range_clamps += 1;
            q = std::clamp(q, 0.0, static_cast<double>(cfg.canvas_size));
        }
        return q;
    }

    Vec2 point(Vec2 p) { return {coord(p.x), coord(p.y)}; }

    double scalar(double v, double lo, double hi) {
        double scale = 1.0;
        for (int i = 0; i < cfg.scalar_decimals; ++i) scale *= 10.0;
        double q = std::round(v * scale) / scale;
        if (q < lo || q > hi) {
            report.out_of_range_clamps += 1;
            q = std::clamp(q, lo, hi);
        }
        return q;
    }

    double rotation_deg(double v) {
        double m = std::fmod(v, 360.0);
        if (m < 0) m += 360.0;
        double q = std::round(m);
        return q == 360.0 ? 0.0 : q;
    }

    void style(Style& s) {
        s.stroke_width = scalar(s.stroke_width, 0.0, cfg.canvas_size);
        s.opacity = scalar(s.opacity, 0.0, 1.0);
    }

    void element(Element& el) {
        style(el.style);
        switch (el.kind) {
            case ElementKind::Path:
                for (auto& c : el.path) {
                    switch (c.op) {
                        case PathOp::Move:
                        case PathOp::Line: c.pts[0] = point(c.pts[0]); break;
                        case PathOp::Cubic:
                            c.pts[0] = point(c.pts[0]);
                            c.pts[1] = point(c.pts[1]);
                            c.pts[2] = point(c.pts[2]);
                            break;
                        case PathOp::Quad:
                            c.pts[0] = point(c.pts[0]);
                            c.pts[1] = point(c.pts[1]);
                            break;
                        case PathOp::Arc:
                            c.rx = coord(c.rx);
                            c.ry = coord(c.ry);
                            c.x_rotation_deg = rotation_deg(c.x_rotation_deg);
                            c.pts[0] = point(c.pts[0]);
                            break;
                        case PathOp::Close: break;
                    }
                }
                break;
            case ElementKind::Rect:
                el.origin = point(el.origin);
                el.width = coord(el.width);
                el.height = coord(el.height);
                break;
            case ElementKind::Circle:
                el.center = point(el.center);
                el.rx = coord(el.rx);
                break;
            case ElementKind::Ellipse:
                el.center = point(el.center);
                el.rx = coord(el.rx);
                el.ry = coord(el.ry);
                break;
            case ElementKind::Polygon:
            case ElementKind::Polyline:
            case ElementKind::Line:
                for (auto& p : el.points) p = point(p);
                break;
            case ElementKind::Group: {
                const double c = cfg.canvas_size;
                el.transform.a = scalar(el.transform.a, -c, c);
                el.transform.b = scalar(el.transform.b, -c, c);
                el.transform.c = scalar(el.transform.c, -c, c);
                el.transform.d = scalar(el.transform.d, -c, c);
                el.transform.e = scalar(el.transform.e, -c, c);
                el.transform.f = scalar(el.transform.f, -c, c);
                for (auto& k : el.children) element(k);
                break;
            }
        }
    }

    void gradient(GradientDef& def) {
        def.p1 = point(def.p1);
        if (def.kind == GradientKind::Linear) def.p2 = point(def.p2);
        else def.radius = coord(def.radius);
        double prev = 0.0;
        for (auto& s : def.stops) {
            s.offset = std::max(prev, scalar(s.offset, 0.0, 1.0));
            prev = s.offset;
            s.opacity = scalar(s.opacity, 0.0, 1.0);
        }
    }
};

}  // namespace

SvgDocument quantize(const SvgDocument& doc, const QuantizationConfig& cfg,
                     NormalizationReport& report) {
    cfg.validate();
    SvgDocument out = doc;
    Quantizer q{cfg, report};
    for (auto& def : out.defs) q.gradient(def);
    for (auto& el : out.elements) q.element(el);
    return out;
}

SvgDocument quantize(const SvgDocument& doc, const QuantizationConfig& cfg) {
    NormalizationReport report;
    return quantize(doc, cfg, report);
}

// ---------------------------------------------------------------------------
// pipeline

std::pair<SvgDocument, NormalizationReport> normalize_pipeline(const SvgDocument& doc,
                                                               const QuantizationConfig& cfg) {
    cfg.validate();
    auto [pruned, report] = prune_invisible(doc);
    SvgDocument restricted = restrict_impl(pruned, report);
    SvgDocument scaled = normalize_viewbox(restricted, cfg);
    SvgDocument quantized = quantize(scaled, cfg, report);
    // quantization may collapse geometry to zero area; prune once more so the
    // pipeline is a fixed point
    auto [final_doc, post_report] = prune_invisible(quantized);
    report.pruned_elements += post_report.pruned_elements;
    report.letterboxed = doc.viewbox.width != doc.viewbox.height;
    return {std::move(final_doc), report};
}

}  // namespace svgtk
