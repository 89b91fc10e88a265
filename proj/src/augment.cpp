#include "svgtk/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svgtk/bake.hpp"
#include "svgtk/errors.hpp"

namespace svgtk {

void AugmentConfig::validate() const {
    if (rotation_range_deg < 0 || translate_range < 0 || hue_shift_deg < 0)
        throw Error("augment ranges must be non-negative");
    if (scale_min > scale_max || scale_min <= 0) throw Error("bad scale range");
    if (path_drop_fraction < 0 || path_drop_fraction >= 1)
        throw Error("path_drop_fraction must be in [0, 1)");
    if (condition_dropout_p < 0 || condition_dropout_p > 1)
        throw Error("condition_dropout_p must be in [0, 1]");
}

SvgDocument augment_geometry(const SvgDocument& doc, const AugmentConfig& cfg, Rng& rng,
                             const QuantizationConfig& qcfg) {
    cfg.validate();
    const double theta = rng.uniform(-cfg.rotation_range_deg, cfg.rotation_range_deg);
    const double canvas = doc.viewbox.width;
    const double tx = rng.uniform(-cfg.translate_range, cfg.translate_range) * canvas;
    const double ty = rng.uniform(-cfg.translate_range, cfg.translate_range) * canvas;
    const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
    const Vec2 center{doc.viewbox.min_x + doc.viewbox.width / 2,
                      doc.viewbox.min_y + doc.viewbox.height / 2};
    const Transform map = Transform::translate(center.x + tx, center.y + ty) *
                          Transform::rotate_deg(theta) * Transform::scale(s, s) *
                          Transform::translate(-center.x, -center.y);

    SvgDocument out;
    out.viewbox = doc.viewbox;
    for (const auto& def : doc.defs) out.defs.push_back(detail::bake_gradient(def, map, false));
    const Transform inv = map.is_identity() ? map : map.inverse();
    auto walk = [&](auto&& self, const Element& el) -> Element {
        if (el.kind == ElementKind::Group) {
            Element g = el;
            g.transform = map * el.transform * inv;
            for (auto& k : g.children) k = self(self, k);
            return g;
        }
        return detail::bake_element(el, map, false);
    };
    for (const auto& el : doc.elements) out.elements.push_back(walk(walk, el));
    return quantize(out, qcfg);
}

// ---------------------------------------------------------------------------
// color

namespace {

struct Hsl {
    double h, s, l;  // h in [0, 360), s and l in [0, 1]
};

Hsl rgb_to_hsl(Rgb c) {
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double l = (mx + mn) / 2;
    if (mx == mn) return {0, 0, l};
    const double d = mx - mn;
    const double s = l > 0.5 ? d / (2 - mx - mn) : d / (mx + mn);
    double h;
    if (mx == r) h = (g - b) / d + (g < b ? 6 : 0);
    else if (mx == g) h = (b - r) / d + 2;
    else h = (r - g) / d + 4;
    return {h * 60, s, l};
}

Rgb hsl_to_rgb(Hsl in) {
    const double c = (1 - std::abs(2 * in.l - 1)) * in.s;
    const double hp = in.h / 60.0;
    const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = in.l - c / 2;
    auto to8 = [](double v) {
        return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
    };
    return {to8(r + m), to8(g + m), to8(b + m)};
}

}  // namespace

Rgb shift_hue(Rgb color, double degrees) {
    if (degrees == 0.0) return color;
    Hsl hsl = rgb_to_hsl(color);
    if (hsl.s == 0.0) return color;  // grayscale has no hue
    hsl.h = std::fmod(hsl.h + degrees, 360.0);
    if (hsl.h < 0) hsl.h += 360.0;
    return hsl_to_rgb(hsl);
}

SvgDocument augment_color(const SvgDocument& doc, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    const double shift = rng.uniform(-cfg.hue_shift_deg, cfg.hue_shift_deg);
    SvgDocument out = doc;
    for (auto& def : out.defs)
        for (auto& stop : def.stops) stop.color = shift_hue(stop.color, shift);
    auto walk = [&](auto&& self, Element& el) -> void {
        if (el.style.fill.kind == PaintKind::Solid)
            el.style.fill.color = shift_hue(el.style.fill.color, shift);
        if (el.style.stroke.kind == PaintKind::Solid)
            el.style.stroke.color = shift_hue(el.style.stroke.color, shift);
        for (auto& k : el.children) self(self, k);
    };
    for (auto& el : out.elements) walk(walk, el);
    return out;
}

// ---------------------------------------------------------------------------
// structural

SvgDocument drop_paths(const SvgDocument& doc, double fraction, Rng& rng) {
    if (doc.elements.empty()) throw EmptyDocument();
    if (fraction < 0 || fraction >= 1) throw Error("drop fraction must be in [0, 1)");
    const std::size_t k = doc.elements.size();
    const std::size_t n_drop =
        fraction == 0.0
            ? 0
            : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * k + 0.5)));
    if (n_drop == 0) return doc;

    // partial Fisher-Yates picks n_drop distinct indices
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<bool> dropped(k, false);
    for (std::size_t i = 0; i < n_drop; ++i) {
        const std::size_t j = i + rng.uniform_int(k - i);
        std::swap(idx[i], idx[j]);
        dropped[idx[i]] = true;
    }
    SvgDocument out;
    out.viewbox = doc.viewbox;
    out.defs = doc.defs;
    for (std::size_t i = 0; i < k; ++i)
        if (!dropped[i]) out.elements.push_back(doc.elements[i]);
    return out;
}

DropoutResult condition_dropout(Conditions sample, double p, Rng& rng) {
    if (p < 0 || p > 1) throw Error("dropout probability must be in [0, 1]");
    DropoutResult out;
    const bool drop_text = rng.uniform() < p;
    const bool drop_image = rng.uniform() < p;
    out.text_dropped = drop_text && sample.text.has_value();
    out.image_dropped = drop_image && sample.image.has_value();
    if (drop_text) sample.text.reset();
    if (drop_image) sample.image.reset();
    out.conditions = std::move(sample);
    return out;
}

}  // namespace svgtk
