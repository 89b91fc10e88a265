#include "svgtk/raster.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "svgtk/bake.hpp"
#include "svgtk/errors.hpp"

namespace svgtk {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kSub = 4;  // 4x4 supersamples per pixel
}  // namespace

RasterImage RasterImage::blank(int w, int h, Rgb color) {
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = color.r;
        img.pixels[i + 1] = color.g;
        img.pixels[i + 2] = color.b;
    }
    return img;
}

// ---------------------------------------------------------------------------
// flattening

namespace {

void flatten_cubic(std::vector<Vec2>& out, Vec2 p0, Vec2 c1, Vec2 c2, Vec2 p1, double tol,
                   int depth) {
    // Convex hull bound: if both controls are within tol of the chord, the
    // whole curve is.
    const Vec2 d = p1 - p0;
    const double len2 = dot(d, d);
    auto chord_dist2 = [&](Vec2 q) {
        if (len2 == 0.0) return dot(q - p0, q - p0);
        const double t = std::clamp(dot(q - p0, d) / len2, 0.0, 1.0);
        const Vec2 proj = p0 + t * d;
        return dot(q - proj, q - proj);
    };
    if (depth >= 24 ||
        (chord_dist2(c1) <= tol * tol && chord_dist2(c2) <= tol * tol)) {
        out.push_back(p1);
        return;
    }
    const Vec2 p01 = 0.5 * (p0 + c1), p12 = 0.5 * (c1 + c2), p23 = 0.5 * (c2 + p1);
    const Vec2 p012 = 0.5 * (p01 + p12), p123 = 0.5 * (p12 + p23);
    const Vec2 mid = 0.5 * (p012 + p123);
    flatten_cubic(out, p0, p01, p012, mid, tol, depth + 1);
    flatten_cubic(out, mid, p123, p23, p1, tol, depth + 1);
}

void flatten_quad(std::vector<Vec2>& out, Vec2 p0, Vec2 c, Vec2 p1, double tol, int depth) {
    const Vec2 d = p1 - p0;
    const double len2 = dot(d, d);
    double dist2;
    if (len2 == 0.0) {
        dist2 = dot(c - p0, c - p0);
    } else {
        const double t = std::clamp(dot(c - p0, d) / len2, 0.0, 1.0);
        const Vec2 proj = p0 + t * d;
        dist2 = dot(c - proj, c - proj);
    }
    if (depth >= 24 || dist2 <= tol * tol) {
        out.push_back(p1);
        return;
    }
    const Vec2 p01 = 0.5 * (p0 + c), p12 = 0.5 * (c + p1);
    const Vec2 mid = 0.5 * (p01 + p12);
    flatten_quad(out, p0, p01, mid, tol, depth + 1);
    flatten_quad(out, mid, p12, p1, tol, depth + 1);
}

}  // namespace

ArcCenter arc_endpoint_to_center(Vec2 from, const PathCommand& arc) {
    const Vec2 to = arc.pts[0];
    double rx = std::abs(arc.rx), ry = std::abs(arc.ry);
    const double phi = arc.x_rotation_deg * kPi / 180.0;
    const double cp = std::cos(phi), sp = std::sin(phi);

    // F.6.5 step 1: midpoint frame
    const Vec2 half = 0.5 * (from - to);
    const double x1p = cp * half.x + sp * half.y;
    const double y1p = -sp * half.x + cp * half.y;

    // F.6.6: scale radii up if the endpoints cannot be bridged
    const double lam = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
    if (lam > 1.0) {
        const double s = std::sqrt(lam);
        rx *= s;
        ry *= s;
    }

    // F.6.5 step 2: center in the rotated frame
    const double num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p;
    const double den = rx * rx * y1p * y1p + ry * ry * x1p * x1p;
    double coef = den == 0.0 ? 0.0 : std::sqrt(std::max(0.0, num / den));
    if (arc.large_arc == arc.sweep) coef = -coef;
    const double cxp = coef * rx * y1p / ry;
    const double cyp = -coef * ry * x1p / rx;

    ArcCenter out;
    out.rx = rx;
    out.ry = ry;
    out.phi_rad = phi;
    out.center = {cp * cxp - sp * cyp + 0.5 * (from.x + to.x),
                  sp * cxp + cp * cyp + 0.5 * (from.y + to.y)};

    auto angle = [](double ux, double uy, double vx, double vy) {
        const double d = std::atan2(vy, vx) - std::atan2(uy, ux);
        return d;
    };
    out.theta1_rad = std::atan2((y1p - cyp) / ry, (x1p - cxp) / rx);
    double dt = angle((x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry);
    while (dt > 2 * kPi) dt -= 2 * kPi;
    while (dt < -2 * kPi) dt += 2 * kPi;
    if (arc.sweep == 0 && dt > 0) dt -= 2 * kPi;
    if (arc.sweep == 1 && dt < 0) dt += 2 * kPi;
    out.dtheta_rad = dt;
    return out;
}

namespace {

void flatten_arc(std::vector<Vec2>& out, Vec2 from, const PathCommand& arc, double tol) {
    if (arc.rx == 0.0 || arc.ry == 0.0 || from == arc.pts[0]) {
        out.push_back(arc.pts[0]);  // degenerate arcs are lines per SVG
        return;
    }
    const ArcCenter c = arc_endpoint_to_center(from, arc);
    const double rmax = std::max(c.rx, c.ry);
    // sagitta r(1-cos(step/2)) <= tol
    const double cos_arg = std::clamp(1.0 - tol / rmax, -1.0, 1.0);
    const double max_step = 2.0 * std::acos(cos_arg);
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(c.dtheta_rad) /
                                                         std::max(1e-3, max_step))));
    const double cp = std::cos(c.phi_rad), sp = std::sin(c.phi_rad);
    for (int i = 1; i < n; ++i) {
        const double th = c.theta1_rad + c.dtheta_rad * i / n;
        const double ex = c.rx * std::cos(th), ey = c.ry * std::sin(th);
        out.push_back({c.center.x + cp * ex - sp * ey, c.center.y + sp * ex + cp * ey});
    }
    out.push_back(arc.pts[0]);  // land exactly on the endpoint
}

}  // namespace

std::vector<Polyline> flatten_path(std::span<const PathCommand> commands, double tolerance) {
    if (tolerance <= 0.0) throw BadCommandOrder("tolerance must be positive");
    if (commands.empty() || commands.front().op != PathOp::Move)
        throw BadCommandOrder("command list must begin with M");
    std::vector<Polyline> out;
    Polyline cur;
    Vec2 pos{0, 0};
    Vec2 start{0, 0};
    auto finish = [&](bool closed) {
        if (!cur.points.empty()) {
            cur.closed = closed;
            out.push_back(std::move(cur));
            cur = {};
        }
    };
    auto begin_draw = [&]() {
        // after Z, drawing resumes from the subpath start
        if (cur.points.empty()) cur.points.push_back(pos);
    };
    for (const auto& cmd : commands) {
        switch (cmd.op) {
            case PathOp::Move:
                finish(false);
                pos = start = cmd.pts[0];
                cur.points.push_back(pos);
                break;
            case PathOp::Line:
                begin_draw();
                cur.points.push_back(cmd.pts[0]);
                pos = cmd.pts[0];
                break;
            case PathOp::Cubic:
                begin_draw();
                flatten_cubic(cur.points, pos, cmd.pts[0], cmd.pts[1], cmd.pts[2], tolerance, 0);
                pos = cmd.pts[2];
                break;
            case PathOp::Quad:
                begin_draw();
                flatten_quad(cur.points, pos, cmd.pts[0], cmd.pts[1], tolerance, 0);
                pos = cmd.pts[1];
                break;
            case PathOp::Arc:
                begin_draw();
                flatten_arc(cur.points, pos, cmd, tolerance);
                pos = cmd.pts[0];
                break;
            case PathOp::Close:
                finish(true);
                pos = start;
                break;
        }
    }
    finish(false);
    return out;
}

// ---------------------------------------------------------------------------
// paint sources

namespace {

struct StopRamp {
    std::vector<GradientStop> stops;

    // piecewise-linear color/alpha lookup with pad extension
    void eval(double t, double& r, double& g, double& b, double& a) const {
        if (stops.size() == 1 || t <= stops.front().offset) {
            const auto& s = t <= stops.front().offset ? stops.front() : stops.back();
            r = s.color.r; g = s.color.g; b = s.color.b; a = s.opacity;
            return;
        }
        if (t >= stops.back().offset) {
            const auto& s = stops.back();
            r = s.color.r; g = s.color.g; b = s.color.b; a = s.opacity;
            return;
        }
        for (std::size_t i = 1; i < stops.size(); ++i) {
            if (t <= stops[i].offset) {
                const auto& s0 = stops[i - 1];
                const auto& s1 = stops[i];
                const double span = s1.offset - s0.offset;
                const double u = span == 0.0 ? 1.0 : (t - s0.offset) / span;
                r = s0.color.r + (s1.color.r - s0.color.r) * u;
                g = s0.color.g + (s1.color.g - s0.color.g) * u;
                b = s0.color.b + (s1.color.b - s0.color.b) * u;
                a = s0.opacity + (s1.opacity - s0.opacity) * u;
                return;
            }
        }
        const auto& s = stops.back();
        r = s.color.r; g = s.color.g; b = s.color.b; a = s.opacity;
    }
};

// Disk-average of a radial ramp: weight 2t dt over the unit radius.
void radial_mean(const StopRamp& ramp, double& r, double& g, double& b, double& a) {
    // premultiplied accumulation over [0,1] split at stop offsets
    std::vector<double> cuts{0.0};
    for (const auto& s : ramp.stops) {
        if (s.offset > cuts.back()) cuts.push_back(std::min(1.0, s.offset));
    }
    if (cuts.back() < 1.0) cuts.push_back(1.0);
    double pr = 0, pg = 0, pb = 0, pa = 0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double t0 = cuts[i - 1], t1 = cuts[i];
        double r0, g0, b0, a0, r1, g1, b1, a1;
        ramp.eval(t0, r0, g0, b0, a0);
        ramp.eval(t1, r1, g1, b1, a1);
        // integral of 2t * linear(t) over [t0, t1]
        const double i_const = t1 * t1 - t0 * t0;
        const double i_ramp =
            2.0 * ((t1 * t1 * t1 - t0 * t0 * t0) / 3.0 - t0 * (t1 * t1 - t0 * t0) / 2.0);
        const double w = t1 == t0 ? 0.0 : 1.0 / (t1 - t0);
        auto seg = [&](double f0, double f1) { return f0 * i_const + (f1 - f0) * w * i_ramp; };
        pr += seg(a0 * r0, a1 * r1);
        pg += seg(a0 * g0, a1 * g1);
        pb += seg(a0 * b0, a1 * b1);
        pa += seg(a0, a1);
    }
    a = pa;
    if (pa > 0) {
        r = pr / pa; g = pg / pa; b = pb / pa;
    } else {
        r = g = b = 0;
    }
}

// Per-supersample color source for one paint operation.
struct PaintSource {
    enum class Kind { Solid, Linear } kind = Kind::Solid;
    double r = 0, g = 0, b = 0, a = 1;  // solid / radial-mean
    Vec2 p1{}, p2{};                    // linear anchors (device space)
    double inv_len2 = 0;
    StopRamp ramp;

    void sample(double x, double y, double& sr, double& sg, double& sb, double& sa) const {
        if (kind == Kind::Solid) {
            sr = r; sg = g; sb = b; sa = a;
            return;
        }
        const double t =
            std::clamp(((x - p1.x) * (p2.x - p1.x) + (y - p1.y) * (p2.y - p1.y)) * inv_len2, 0.0,
                       1.0);
        ramp.eval(t, sr, sg, sb, sa);
    }
};

PaintSource make_source(const Paint& paint, const SvgDocument& defs_doc) {
    PaintSource src;
    if (paint.kind == PaintKind::Solid) {
        src.r = paint.color.r; src.g = paint.color.g; src.b = paint.color.b;
        return src;
    }
    const GradientDef* def = defs_doc.find_gradient(paint.gradient_id);
    StopRamp ramp{def->stops};
    if (def->kind == GradientKind::Radial) {
        radial_mean(ramp, src.r, src.g, src.b, src.a);
        return src;
    }
    const Vec2 d = def->p2 - def->p1;
    const double len2 = dot(d, d);
    if (len2 == 0.0) {
        const auto& s = def->stops.back();
        src.r = s.color.r; src.g = s.color.g; src.b = s.color.b; src.a = s.opacity;
        return src;
    }
    src.kind = PaintSource::Kind::Linear;
    src.p1 = def->p1;
    src.p2 = def->p2;
    src.inv_len2 = 1.0 / len2;
    src.ramp = std::move(ramp);
    return src;
}

// ---------------------------------------------------------------------------
// scanline fill

struct Edge {
    double y0, y1;   // y0 < y1
    double x0, dxdy; // x at y0, slope
    int dir;
};

struct PaintOp {
    std::vector<Edge> edges;
    FillRule rule = FillRule::NonZero;
    PaintSource source;
    double opacity = 1.0;
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;

    void add_edge(Vec2 a, Vec2 b) {
        min_x = std::min({min_x, a.x, b.x});
        max_x = std::max({max_x, a.x, b.x});
        min_y = std::min({min_y, a.y, b.y});
        max_y = std::max({max_y, a.y, b.y});
        if (a.y == b.y) return;
        Edge e;
        e.dir = a.y < b.y ? 1 : -1;
        if (a.y > b.y) std::swap(a, b);
        e.y0 = a.y;
        e.y1 = b.y;
        e.x0 = a.x;
        e.dxdy = (b.x - a.x) / (b.y - a.y);
        edges.push_back(e);
    }

    void add_polygon(std::span<const Vec2> pts) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) add_edge(pts[i], pts[i + 1]);
        if (pts.size() >= 2 && !(pts.front() == pts.back())) add_edge(pts.back(), pts.front());
    }
};

void rasterize_op(RasterImage& img, const PaintOp& op) {
    if (op.edges.empty() || op.opacity <= 0.0) return;
    const int w = img.width, h = img.height;
    const int px0 = std::clamp(static_cast<int>(std::floor(op.min_x)), 0, w);
    const int px1 = std::clamp(static_cast<int>(std::ceil(op.max_x)), 0, w);
    const int py0 = std::clamp(static_cast<int>(std::floor(op.min_y)), 0, h);
    const int py1 = std::clamp(static_cast<int>(std::ceil(op.max_y)), 0, h);
    if (px0 >= px1 || py0 >= py1) return;

    const int row_w = px1 - px0;
    std::vector<double> acc_a(row_w), acc_r(row_w), acc_g(row_w), acc_b(row_w);
    std::vector<std::pair<double, int>> crossings;
    crossings.reserve(op.edges.size());

    const bool solid = op.source.kind == PaintSource::Kind::Solid;
    for (int py = py0; py < py1; ++py) {
        std::fill(acc_a.begin(), acc_a.end(), 0.0);
        if (!solid) {
            std::fill(acc_r.begin(), acc_r.end(), 0.0);
            std::fill(acc_g.begin(), acc_g.end(), 0.0);
            std::fill(acc_b.begin(), acc_b.end(), 0.0);
        }
        for (int sy = 0; sy < kSub; ++sy) {
            const double ys = py + (2 * sy + 1) / (2.0 * kSub);
            crossings.clear();
            for (const auto& e : op.edges) {
                if (ys < e.y0 || ys >= e.y1) continue;  // half-open: no vertex double count
                crossings.emplace_back(e.x0 + (ys - e.y0) * e.dxdy, e.dir);
            }
            if (crossings.empty()) continue;
            std::sort(crossings.begin(), crossings.end());
            int winding = 0;
            for (std::size_t i = 0; i < crossings.size(); ++i) {
                const int prev = winding;
                winding += crossings[i].second;
                const bool was_in = op.rule == FillRule::NonZero ? prev != 0 : (prev & 1) != 0;
                const bool now_in =
                    op.rule == FillRule::NonZero ? winding != 0 : (winding & 1) != 0;
                if (!(now_in && !was_in)) continue;
                // span start; find its end
                const double xs = crossings[i].first;
                double xe = xs;
                int wind2 = winding;
                std::size_t j = i + 1;
                for (; j < crossings.size(); ++j) {
                    wind2 += crossings[j].second;
                    const bool in2 =
                        op.rule == FillRule::NonZero ? wind2 != 0 : (wind2 & 1) != 0;
                    if (!in2) {
                        xe = crossings[j].first;
                        break;
                    }
                }
                if (j == crossings.size()) xe = crossings.empty() ? xs : crossings.back().first;
                winding = wind2;
                i = j;
                // subsample columns with center in [xs, xe)
                const double lo = std::max(xs, static_cast<double>(px0));
                const double hi = std::min(xe, static_cast<double>(px1));
                if (hi <= lo) continue;
                long k = static_cast<long>(std::ceil(lo * kSub - 0.5));
                const long kend = static_cast<long>(std::ceil(hi * kSub - 0.5));
                if (solid) {
                    while (k < kend) {
                        const long px = k / kSub;
                        const long krun = std::min(kend, (px + 1) * kSub);
                        acc_a[px - px0] += static_cast<double>(krun - k);
                        k = krun;
                    }
                } else {
                    for (; k < kend; ++k) {
                        const double xsamp = (k + 0.5) / kSub;
                        double sr, sg, sb, sa;
                        op.source.sample(xsamp, ys, sr, sg, sb, sa);
                        const long col = k / kSub - px0;
                        acc_a[col] += sa;
                        acc_r[col] += sa * sr;
                        acc_g[col] += sa * sg;
                        acc_b[col] += sa * sb;
                    }
                }
            }
        }
        // composite the pixel row
        for (int px = 0; px < row_w; ++px) {
            double alpha_sum = acc_a[px];
            if (alpha_sum <= 0.0) continue;
            double pr, pg, pb;
            if (solid) {
                const double sa = op.source.a;
                pr = acc_a[px] * sa * op.source.r;
                pg = acc_a[px] * sa * op.source.g;
                pb = acc_a[px] * sa * op.source.b;
                alpha_sum *= sa;
            } else {
                pr = acc_r[px];
                pg = acc_g[px];
                pb = acc_b[px];
            }
            const double o = op.opacity;
            std::uint8_t* dst = img.at(px + px0, py);
            const double total = kSub * kSub;
            for (int ch = 0; ch < 3; ++ch) {
                const double src_pm = (ch == 0 ? pr : ch == 1 ? pg : pb) * o;
                const double cover = alpha_sum * o;
                const double v = (src_pm + (total - cover) * dst[ch]) / total;
                dst[ch] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// stroke expansion: one quad per segment + one disc per vertex, all with the
// same winding sign so nonzero filling yields their union (round caps/joins)

void append_disc(PaintOp& op, Vec2 c, double radius, double tol) {
    if (radius <= 0) return;
    const double cos_arg = std::clamp(1.0 - tol / radius, -1.0, 1.0);
    const int n = std::max(4, static_cast<int>(std::ceil(2 * kPi / std::max(1e-3, 2 * std::acos(cos_arg)))));
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double th = 2 * kPi * i / n;
        pts.push_back({c.x + radius * std::cos(th), c.y + radius * std::sin(th)});
    }
    op.add_polygon(pts);
}

void append_stroke(PaintOp& op, const Polyline& pl, double width, double tol) {
    const double hw = width / 2;
    if (hw <= 0) return;
    std::vector<Vec2> pts = pl.points;
    if (pl.closed && pts.size() >= 2 && !(pts.front() == pts.back())) pts.push_back(pts.front());
    if (pts.size() == 1) {
        append_disc(op, pts[0], hw, tol);  // zero-length subpath: round dot
        return;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        const Vec2 d = b - a;
        const double len = length(d);
        if (len == 0.0) continue;
        const Vec2 n{d.y / len * hw, -d.x / len * hw};
        op.add_polygon(std::array<Vec2, 4>{a + n, b + n, b - n, a - n});
    }
    for (const auto& p : pts) append_disc(op, p, hw, tol);
}

}  // namespace

// ---------------------------------------------------------------------------
// render

RasterImage render(const SvgDocument& doc, int size) {
    doc.validate();
    RasterImage img = RasterImage::blank(size, size);
    const ViewBox& vb = doc.viewbox;
    const double scale = size / std::max(vb.width, vb.height);
    const Transform viewport =
        Transform::translate((size - vb.width * scale) / 2.0, (size - vb.height * scale) / 2.0) *
        Transform::scale(scale, scale) * Transform::translate(-vb.min_x, -vb.min_y);
    const double tol = 0.25 * scale;  // 0.25 user units in device space

    // Gradient defs keyed by (id, group transform) are baked lazily; the two
    // bake steps (group, then viewport) mirror bake_transforms so that
    // render(bake_transforms(d)) is bit-identical to render(d).
    SvgDocument device_defs;
    device_defs.viewbox = {0, 0, static_cast<double>(size), static_cast<double>(size)};
    auto device_gradient = [&](const std::string& id, const Transform& group) -> std::string {
        const std::string key = id + "|" + std::to_string(device_defs.defs.size());
        GradientDef g = detail::bake_gradient(*doc.find_gradient(id), group, true);
        g = detail::bake_gradient(g, viewport, true);
        g.id = key;
        device_defs.defs.push_back(std::move(g));
        return key;
    };

    auto paint_element = [&](const Element& leaf, const Transform& group) {
        Element dev = detail::bake_element(leaf, group, true);
        dev = detail::bake_element(dev, viewport, true);
        Style style = dev.style;
        if (style.fill.kind == PaintKind::Gradient)
            style.fill.gradient_id = device_gradient(leaf.style.fill.gradient_id, group);

        // geometry to polylines
        std::vector<Polyline> polys;
        switch (dev.kind) {
            case ElementKind::Path:
                polys = flatten_path(dev.path, tol);
                break;
            case ElementKind::Rect: {
                Polyline p;
                p.closed = true;
                p.points = {dev.origin,
                            dev.origin + Vec2{dev.width, 0},
                            dev.origin + Vec2{dev.width, dev.height},
                            dev.origin + Vec2{0, dev.height}};
                polys.push_back(std::move(p));
                break;
            }
            case ElementKind::Circle:
            case ElementKind::Ellipse: {
                const double rx = dev.rx, ry = dev.kind == ElementKind::Circle ? dev.rx : dev.ry;
                if (rx > 0 && ry > 0) {
                    std::vector<PathCommand> cmds{
                        PathCommand::move(dev.center - Vec2{rx, 0}),
                        PathCommand::arc(rx, ry, 0, 0, 1, dev.center + Vec2{rx, 0}),
                        PathCommand::arc(rx, ry, 0, 0, 1, dev.center - Vec2{rx, 0}),
                        PathCommand::close()};
                    polys = flatten_path(cmds, tol);
                }
                break;
            }
            case ElementKind::Polygon: {
                Polyline p;
                p.closed = true;
                p.points = dev.points;
                polys.push_back(std::move(p));
                break;
            }
            case ElementKind::Polyline:
            case ElementKind::Line: {
                Polyline p;
                p.points = dev.points;
                polys.push_back(std::move(p));
                break;
            }
            case ElementKind::Group:
                return;
        }
        if (polys.empty()) return;

        if (style.fill.kind != PaintKind::None) {
            PaintOp op;
            op.rule = style.fill_rule;
            op.opacity = style.opacity;
            op.source = make_source(style.fill, device_defs);
            for (const auto& pl : polys)
                if (pl.points.size() >= 3) op.add_polygon(pl.points);
            rasterize_op(img, op);
        }
        if (style.stroke.kind != PaintKind::None && style.stroke_width > 0) {
            PaintOp op;
            op.rule = FillRule::NonZero;
            op.opacity = style.opacity;
            op.source = make_source(style.stroke, device_defs);
            for (const auto& pl : polys) append_stroke(op, pl, style.stroke_width, tol);
            rasterize_op(img, op);
        }
    };

    auto walk = [&](auto&& self, const Element& el, const Transform& group) -> void {
        if (el.kind == ElementKind::Group) {
            const Transform combined = group * el.transform;
            for (const auto& k : el.children) self(self, k, combined);
            return;
        }
        paint_element(el, group);
    };
    for (const auto& el : doc.elements) walk(walk, el, Transform::identity());
    return img;
}

// ---------------------------------------------------------------------------
// image files

std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format) {
    std::vector<std::uint8_t> out;
    if (format == ImageFormat::Ppm) {
        std::string header =
            "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
        out.assign(header.begin(), header.end());
        out.insert(out.end(), img.pixels.begin(), img.pixels.end());
        return out;
    }
    // PNG, color type 2 (RGB8), filter 0 on every row, fixed zlib level
    const auto be32 = [](std::vector<std::uint8_t>& v, std::uint32_t x) {
        v.push_back(static_cast<std::uint8_t>(x >> 24));
        v.push_back(static_cast<std::uint8_t>(x >> 16));
        v.push_back(static_cast<std::uint8_t>(x >> 8));
        v.push_back(static_cast<std::uint8_t>(x));
    };
    auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
        be32(out, static_cast<std::uint32_t>(data.size()));
        const std::size_t crc_start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        const auto crc = crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
        be32(out, static_cast<std::uint32_t>(crc));
    };
    const std::uint8_t sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    out.insert(out.end(), sig, sig + 8);
    std::vector<std::uint8_t> ihdr;
    be32(ihdr, static_cast<std::uint32_t>(img.width));
    be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
    chunk("IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * img.width));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), img.at(0, y), img.at(0, y) + 3 * img.width);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("zlib compression failed");
    compressed.resize(bound);
    chunk("IDAT", compressed);
    chunk("IEND", {});
    return out;
}

void write_image(const RasterImage& img, const std::string& path, ImageFormat format) {
    const auto bytes = encode_image(img, format);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path + "'");
}

RasterImage read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string magic;
    f >> magic;
    if (magic != "P6") throw IoError("'" + path + "' is not a P6 PPM");
    auto next_int = [&]() {
        int c;
        for (;;) {
            c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int v;
        if (!(f >> v)) throw IoError("bad PPM header in '" + path + "'");
        return v;
    };
    const int w = next_int(), h = next_int(), maxval = next_int();
    if (maxval != 255 || w <= 0 || h <= 0) throw IoError("unsupported PPM in '" + path + "'");
    f.get();  // single whitespace after maxval
    RasterImage img = RasterImage::blank(w, h);
    f.read(reinterpret_cast<char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw IoError("truncated PPM '" + path + "'");
    return img;
}

}  // namespace svgtk
