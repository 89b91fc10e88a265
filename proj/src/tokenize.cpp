#include "svgtk/tokenize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "svgtk/errors.hpp"

namespace svgtk {

// ---------------------------------------------------------------------------
// token text literals

namespace {

constexpr const char* kMarkerText[] = {"<img>", "</img>", "<svg>", "</svg>", "<eos>"};
constexpr const char* kCmdText[] = {
    "<M>", "<L>", "<C>", "<Q>", "<A>", "<Z>",
    "<ellipse>", "<circle>", "<polygon>", "<rect>",
    "<g>", "</g>", "<defs>", "</defs>",
    "<linearGradient>", "<radialGradient>", "<stop>",
    "<path>", "</path>",
};
constexpr const char* kAttrText[] = {
    "<fill>", "<stroke>", "<stroke-width>", "<opacity>",
    "<evenodd>", "<transform>", "<gradref>", "<id>",
};

std::string format_scalar_value(std::int32_t raw, const QuantizationConfig& cfg) {
    return format_number(raw * cfg.scalar_step());
}

}  // namespace

std::string token_to_string(const Token& t) {
    switch (t.kind) {
        case Token::Kind::Marker: return kMarkerText[t.value];
        case Token::Kind::Command: return kCmdText[t.value];
        case Token::Kind::Attr: return kAttrText[t.value];
        case Token::Kind::Flag: return t.value ? "<f1>" : "<f0>";
        case Token::Kind::Coord: return "<p" + std::to_string(t.value) + ">";
        case Token::Kind::Color: return "<c" + std::to_string(t.value) + ">";
        case Token::Kind::Scalar: return "<s:" + std::to_string(t.value) + ">";
        case Token::Kind::Image: return "<i" + std::to_string(t.value) + ">";
    }
    return "<?>";
}

std::size_t TokenSequence::svg_token_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens)
        if (t.kind != Token::Kind::Marker && t.kind != Token::Kind::Image) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// vocabulary

Vocabulary::Vocabulary(const QuantizationConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    coords_ = cfg.canvas_size + 1;
    int pow10 = 1;
    for (int i = 0; i < cfg.scalar_decimals; ++i) pow10 *= 10;
    scalar_raw_max_ = cfg.canvas_size * pow10;
    scalars_ = 2 * scalar_raw_max_ + 1;
    off_markers_ = 0;
    off_commands_ = off_markers_ + kMarkerCount;
    off_attrs_ = off_commands_ + kCmdCount;
    off_flags_ = off_attrs_ + kAttrCount;
    off_coords_ = off_flags_ + 2;
    off_colors_ = off_coords_ + coords_;
    off_scalars_ = off_colors_ + 256;
    off_images_ = off_scalars_ + scalars_;
    total_ = off_images_ + kImageCodebookSize;
}

int Vocabulary::token_to_id(const Token& t) const {
    auto check = [&](bool ok) {
        if (!ok) throw Error("token payload out of vocabulary range: " + token_to_string(t));
    };
    switch (t.kind) {
        case Token::Kind::Marker:
            check(t.value >= 0 && t.value < kMarkerCount);
            return off_markers_ + t.value;
        case Token::Kind::Command:
            check(t.value >= 0 && t.value < kCmdCount);
            return off_commands_ + t.value;
        case Token::Kind::Attr:
            check(t.value >= 0 && t.value < kAttrCount);
            return off_attrs_ + t.value;
        case Token::Kind::Flag:
            check(t.value == 0 || t.value == 1);
            return off_flags_ + t.value;
        case Token::Kind::Coord:
            check(t.value >= 0 && t.value < coords_);
            return off_coords_ + t.value;
        case Token::Kind::Color:
            check(t.value >= 0 && t.value < 256);
            return off_colors_ + t.value;
        case Token::Kind::Scalar:
            check(t.value >= -scalar_raw_max_ && t.value <= scalar_raw_max_);
            return off_scalars_ + t.value + scalar_raw_max_;
        case Token::Kind::Image:
            check(t.value >= 0 && t.value < kImageCodebookSize);
            return off_images_ + t.value;
    }
    throw Error("bad token kind");
}

Token Vocabulary::id_to_token(int id) const {
    if (id < 0 || id >= total_) throw Error("token id out of range: " + std::to_string(id));
    if (id < off_commands_) return Token::marker(static_cast<Marker>(id - off_markers_));
    if (id < off_attrs_) return Token::command(static_cast<Cmd>(id - off_commands_));
    if (id < off_flags_) return Token::attr(static_cast<Attr>(id - off_attrs_));
    if (id < off_coords_) return Token::flag(id - off_flags_);
    if (id < off_colors_) return Token::coord(id - off_coords_);
    if (id < off_scalars_) return Token::color(id - off_colors_);
    if (id < off_images_) return Token::scalar_raw(id - off_scalars_ - scalar_raw_max_);
    return Token::image(id - off_images_);
}

bool Vocabulary::is_image_id(int id) const { return id >= off_images_ && id < total_; }
bool Vocabulary::is_coord_id(int id) const { return id >= off_coords_ && id < off_colors_; }

Vocabulary build_vocabulary(const QuantizationConfig& cfg) { return Vocabulary(cfg); }

// ---------------------------------------------------------------------------
// tokenize

namespace {

struct Emitter {
    const QuantizationConfig& cfg;
    const SvgDocument& doc;
    std::vector<Token> out;

    [[noreturn]] void reject(const std::string& why) { throw NotNormalized(why); }

    void coord(double v, const char* what) {
        if (v != std::floor(v) || v < 0.0 || v > cfg.canvas_size)
            reject(std::string(what) + " " + format_number(v) + " is not on the coordinate grid");
        out.push_back(Token::coord(static_cast<int>(v)));
    }
    void point(Vec2 p, const char* what) {
        coord(p.x, what);
        coord(p.y, what);
    }
    void scalar(double v, const char* what) {
        double scale = 1.0;
        for (int i = 0; i < cfg.scalar_decimals; ++i) scale *= 10.0;
        const double raw = std::round(v * scale);
        if (std::abs(raw - v * scale) > 1e-6 || std::abs(v) > cfg.canvas_size)
            reject(std::string(what) + " " + format_number(v) + " is not at scalar precision");
        out.push_back(Token::scalar_raw(static_cast<std::int32_t>(raw)));
    }
    void color(Rgb c) {
        out.push_back(Token::color(c.r));
        out.push_back(Token::color(c.g));
        out.push_back(Token::color(c.b));
    }
    void cmd(Cmd c) { out.push_back(Token::command(c)); }
    void attr(Attr a) { out.push_back(Token::attr(a)); }

    int gradient_index(const std::string& id) {
        for (std::size_t i = 0; i < doc.defs.size(); ++i) {
            if (doc.defs[i].id == id) {
                if (id != "g" + std::to_string(i))
                    reject("gradient id '" + id + "' is not canonical (expected g" +
                           std::to_string(i) + ")");
                return static_cast<int>(i);
            }
        }
        reject("gradient reference '" + id + "' not found");
    }

    // fixed key order: FILL, STROKE, STROKE_WIDTH, OPACITY, FILL_RULE_EVENODD,
    // TRANSFORM, GRAD_REF, ID; defaults are omitted
    void attrs(const Style& s, const Transform* transform) {
        static const Style defaults;
        if (s.fill.kind == PaintKind::None) {
            attr(Attr::Fill);
            out.push_back(Token::flag(0));
        } else if (s.fill.kind == PaintKind::Solid && !(s.fill == defaults.fill)) {
            attr(Attr::Fill);
            color(s.fill.color);
        }
        if (s.stroke.kind == PaintKind::Solid) {
            attr(Attr::Stroke);
            color(s.stroke.color);
            if (s.stroke_width != 1.0) {
                attr(Attr::StrokeWidth);
                scalar(s.stroke_width, "stroke width");
            }
        }
        if (s.opacity != 1.0) {
            attr(Attr::Opacity);
            scalar(s.opacity, "opacity");
        }
        if (s.fill_rule == FillRule::EvenOdd) attr(Attr::FillRuleEvenOdd);
        if (transform && !transform->is_identity()) {
            attr(Attr::Transform);
            scalar(transform->a, "transform entry");
            scalar(transform->b, "transform entry");
            scalar(transform->c, "transform entry");
            scalar(transform->d, "transform entry");
            scalar(transform->e, "transform entry");
            scalar(transform->f, "transform entry");
        }
        if (s.fill.kind == PaintKind::Gradient) {
            attr(Attr::GradRef);
            out.push_back(Token::coord(gradient_index(s.fill.gradient_id)));
        }
    }

    void path_commands(const std::vector<PathCommand>& cmds) {
        for (const auto& c : cmds) {
            switch (c.op) {
                case PathOp::Move:
                    cmd(Cmd::M);
                    point(c.pts[0], "path point");
                    break;
                case PathOp::Line:
                    cmd(Cmd::L);
                    point(c.pts[0], "path point");
                    break;
                case PathOp::Cubic:
                    cmd(Cmd::C);
                    point(c.pts[0], "control point");
                    point(c.pts[1], "control point");
                    point(c.pts[2], "path point");
                    break;
                case PathOp::Quad:
                    cmd(Cmd::Q);
                    point(c.pts[0], "control point");
                    point(c.pts[1], "path point");
                    break;
                case PathOp::Arc:
                    cmd(Cmd::A);
                    coord(c.rx, "arc radius");
                    coord(c.ry, "arc radius");
                    coord(c.x_rotation_deg, "arc rotation");
                    out.push_back(Token::flag(c.large_arc));
                    out.push_back(Token::flag(c.sweep));
                    point(c.pts[0], "path point");
                    break;
                case PathOp::Close:
                    cmd(Cmd::Z);
                    break;
            }
        }
    }

    void element(const Element& el) {
        switch (el.kind) {
            case ElementKind::Path:
                cmd(Cmd::PathOpen);
                attrs(el.style, nullptr);
                path_commands(el.path);
                cmd(Cmd::PathClose);
                break;
            case ElementKind::Rect:
                cmd(Cmd::Rect);
                attrs(el.style, nullptr);
                point(el.origin, "rect origin");
                coord(el.width, "rect size");
                coord(el.height, "rect size");
                break;
            case ElementKind::Circle:
                cmd(Cmd::Circle);
                attrs(el.style, nullptr);
                point(el.center, "circle center");
                coord(el.rx, "circle radius");
                break;
            case ElementKind::Ellipse:
                cmd(Cmd::Ellipse);
                attrs(el.style, nullptr);
                point(el.center, "ellipse center");
                coord(el.rx, "ellipse radius");
                coord(el.ry, "ellipse radius");
                break;
            case ElementKind::Polygon:
                cmd(Cmd::Polygon);
                attrs(el.style, nullptr);
                for (const auto& p : el.points) point(p, "polygon point");
                break;
            case ElementKind::Group:
                cmd(Cmd::GroupOpen);
                attrs(el.style, &el.transform);
                for (const auto& k : el.children) element(k);
                cmd(Cmd::GroupClose);
                break;
            case ElementKind::Line:
            case ElementKind::Polyline:
                reject("Line/Polyline are outside the token vocabulary (run restrict_vocabulary)");
        }
    }

    void gradient(const GradientDef& def, int index) {
        if (def.id != "g" + std::to_string(index))
            reject("gradient id '" + def.id + "' is not canonical");
        cmd(def.kind == GradientKind::Linear ? Cmd::GradLinear : Cmd::GradRadial);
        attr(Attr::Id);
        out.push_back(Token::coord(index));
        point(def.p1, "gradient anchor");
        if (def.kind == GradientKind::Linear) {
            point(def.p2, "gradient anchor");
        } else {
            coord(def.radius, "gradient radius");
        }
        for (const auto& s : def.stops) {
            cmd(Cmd::Stop);
            scalar(s.offset, "stop offset");
            color(s.color);
            if (s.opacity != 1.0) scalar(s.opacity, "stop opacity");
        }
    }
};

}  // namespace

TokenSequence tokenize(const SvgDocument& doc, const QuantizationConfig& cfg) {
    cfg.validate();
    doc.validate();
    if (doc.viewbox.min_x != 0 || doc.viewbox.min_y != 0 || doc.viewbox.width != cfg.canvas_size ||
        doc.viewbox.height != cfg.canvas_size)
        throw NotNormalized("viewbox is not the canonical canvas");
    Emitter em{cfg, doc};
    if (!doc.defs.empty()) {
        em.cmd(Cmd::DefsOpen);
        for (std::size_t i = 0; i < doc.defs.size(); ++i)
            em.gradient(doc.defs[i], static_cast<int>(i));
        em.cmd(Cmd::DefsClose);
    }
    for (const auto& el : doc.elements) em.element(el);
    return TokenSequence{std::move(em.out)};
}

// ---------------------------------------------------------------------------
// detokenize

namespace {

struct Parser {
    const std::vector<Token>& toks;
    const QuantizationConfig& cfg;
    bool lenient;
    std::size_t pos = 0;

    struct Abort {};  // lenient unwind: keep the longest valid prefix

    // completed state
    std::vector<GradientDef> defs;
    std::vector<Element> top;
    struct GroupFrame {
        Transform transform;
        std::vector<Element> kids;
    };
    std::vector<GroupFrame> groups;

    // in-progress state, visible to finalize() after an Abort
    bool in_path = false;
    Style path_style;
    std::vector<PathCommand> path_cmds;
    bool in_polygon = false;
    Style poly_style;
    std::vector<Vec2> poly_points;
    std::optional<GradientDef> cur_grad;

    bool defs_done = false;
    bool content_started = false;

    [[noreturn]] void fail(std::size_t at, const std::string& expected) {
        if (lenient) throw Abort{};
        throw GrammarViolation(at, expected,
                               at < toks.size() ? token_to_string(toks[at]) : "end of sequence");
    }
    [[noreturn]] void fail(const std::string& expected) { fail(pos, expected); }

    const Token* peek() const { return pos < toks.size() ? &toks[pos] : nullptr; }
    bool peek_kind(Token::Kind k) const {
        const Token* t = peek();
        return t && t->kind == k;
    }
    bool peek_cmd(Cmd c) const {
        const Token* t = peek();
        return t && t->kind == Token::Kind::Command && t->value == static_cast<int>(c);
    }

    Token take(Token::Kind k, const char* what) {
        const Token* t = peek();
        if (!t || t->kind != k) fail(what);
        ++pos;
        return *t;
    }
    int take_coord(const char* what = "coordinate token") {
        return take(Token::Kind::Coord, what).value;
    }
    Rgb take_color3() {
        const int r = take(Token::Kind::Color, "color channel token").value;
        const int g = take(Token::Kind::Color, "color channel token").value;
        const int b = take(Token::Kind::Color, "color channel token").value;
        return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                static_cast<std::uint8_t>(b)};
    }
    double take_scalar(double lo, double hi, const char* what) {
        const Token t = take(Token::Kind::Scalar, what);
        double v = t.value * cfg.scalar_step();
        if (v < lo || v > hi) {
            if (!lenient)
                fail(pos - 1, std::string(what) + " in [" + format_number(lo) + ", " +
                                  format_number(hi) + "]");
            v = std::clamp(v, lo, hi);
        }
        return v;
    }
    int take_flag(const char* what) {
        const Token t = take(Token::Kind::Flag, what);
        return t.value ? 1 : 0;
    }

    std::vector<Element>& sink() { return groups.empty() ? top : groups.back().kids; }

    // ----- attributes -----
    struct ParsedAttrs {
        Style style;
        Transform transform;
        int grad_ref = -1;
    };

    ParsedAttrs parse_attrs(bool is_group) {
        ParsedAttrs out;
        int last_key = -1;
        bool saw_fill = false;
        while (peek_kind(Token::Kind::Attr)) {
            const std::size_t key_pos = pos;
            const Attr key = static_cast<Attr>(peek()->value);
            if (!lenient && static_cast<int>(key) <= last_key)
                fail(key_pos, "attribute keys in canonical order");
            last_key = static_cast<int>(key);
            ++pos;
            switch (key) {
                case Attr::Fill:
                    saw_fill = true;
                    if (peek_kind(Token::Kind::Flag)) {
                        const int f = take_flag("fill none flag");
                        if (f != 0 && !lenient) fail(pos - 1, "flag 0 after <fill>");
                        out.style.fill = Paint::none();
                    } else {
                        out.style.fill = Paint::solid(take_color3());
                    }
                    break;
                case Attr::Stroke:
                    out.style.stroke = Paint::solid(take_color3());
                    break;
                case Attr::StrokeWidth:
                    out.style.stroke_width =
                        take_scalar(0.0, cfg.canvas_size, "stroke-width scalar");
                    break;
                case Attr::Opacity:
                    out.style.opacity = take_scalar(0.0, 1.0, "opacity scalar");
                    break;
                case Attr::FillRuleEvenOdd:
                    out.style.fill_rule = FillRule::EvenOdd;
                    break;
                case Attr::Transform: {
                    if (!is_group && !lenient) fail(key_pos, "transform only on groups");
                    const double c = cfg.canvas_size;
                    Transform t;
                    t.a = take_scalar(-c, c, "transform scalar");
                    t.b = take_scalar(-c, c, "transform scalar");
                    t.c = take_scalar(-c, c, "transform scalar");
                    t.d = take_scalar(-c, c, "transform scalar");
                    t.e = take_scalar(-c, c, "transform scalar");
                    t.f = take_scalar(-c, c, "transform scalar");
                    if (is_group) out.transform = t;
                    break;
                }
                case Attr::GradRef:
                    if (saw_fill && !lenient) fail(key_pos, "fill and gradref are exclusive");
                    out.grad_ref = take_coord("gradient index");
                    if (!lenient && out.grad_ref >= static_cast<int>(defs.size()))
                        fail(pos - 1, "gradient index below " + std::to_string(defs.size()));
                    out.style.fill = Paint::gradient("g" + std::to_string(out.grad_ref));
                    break;
                case Attr::Id:
                    fail(key_pos, "id only inside gradient definitions");
            }
        }
        return out;
    }

    // ----- constructs -----

    void parse_path() {
        ++pos;  // <path>
        in_path = true;
        path_cmds.clear();
        path_style = parse_attrs(false).style;
        for (;;) {
            if (peek_cmd(Cmd::PathClose)) {
                ++pos;
                break;
            }
            const Token* t = peek();
            if (!t || t->kind != Token::Kind::Command) fail("path command or </path>");
            const Cmd c = static_cast<Cmd>(t->value);
            const std::size_t cmd_pos = pos;
            if (path_cmds.empty() && c != Cmd::M && !lenient) fail(cmd_pos, "<M> as first command");
            switch (c) {
                case Cmd::M: {
                    ++pos;
                    const double x = take_coord(), y = take_coord();
                    path_cmds.push_back(PathCommand::move({x, y}));
                    break;
                }
                case Cmd::L: {
                    ++pos;
                    const double x = take_coord(), y = take_coord();
                    path_cmds.push_back(PathCommand::line({x, y}));
                    break;
                }
                case Cmd::C: {
                    ++pos;
                    const double x1 = take_coord(), y1 = take_coord();
                    const double x2 = take_coord(), y2 = take_coord();
                    const double x = take_coord(), y = take_coord();
                    path_cmds.push_back(PathCommand::cubic({x1, y1}, {x2, y2}, {x, y}));
                    break;
                }
                case Cmd::Q: {
                    ++pos;
                    const double x1 = take_coord(), y1 = take_coord();
                    const double x = take_coord(), y = take_coord();
                    path_cmds.push_back(PathCommand::quad({x1, y1}, {x, y}));
                    break;
                }
                case Cmd::A: {
                    ++pos;
                    const double rx = take_coord("arc radius");
                    const double ry = take_coord("arc radius");
                    const double rot = take_coord("arc rotation");
                    const int large = take_flag("large-arc flag");
                    const int sweep = take_flag("sweep flag");
                    const double x = take_coord(), y = take_coord();
                    path_cmds.push_back(PathCommand::arc(rx, ry, rot, large, sweep, {x, y}));
                    break;
                }
                case Cmd::Z:
                    ++pos;
                    path_cmds.push_back(PathCommand::close());
                    break;
                default:
                    fail(cmd_pos, "path command or </path>");
            }
        }
        finish_path();
    }

    void finish_path() {
        if (!in_path) return;
        in_path = false;
        if (path_cmds.empty() || path_cmds.front().op != PathOp::Move) {
            if (!lenient) throw GrammarViolation(pos, "non-empty path starting with <M>", "path end");
            return;  // lenient: drop pathless shell
        }
        sink().push_back(Element::make_path(std::move(path_cmds), path_style));
        path_cmds = {};
    }

    void parse_polygon() {
        ++pos;  // <polygon>
        in_polygon = true;
        poly_points.clear();
        poly_style = parse_attrs(false).style;
        while (peek_kind(Token::Kind::Coord)) {
            const double x = take_coord();
            if (!peek_kind(Token::Kind::Coord)) {
                if (!lenient) fail("y coordinate to complete the point");
                break;  // lenient: drop the dangling x
            }
            const double y = take_coord();
            poly_points.push_back({x, y});
        }
        finish_polygon();
    }

    void finish_polygon() {
        if (!in_polygon) return;
        in_polygon = false;
        sink().push_back(Element::make_polygon(std::move(poly_points), poly_style));
        poly_points = {};
    }

    void parse_rect() {
        ++pos;
        const Style s = parse_attrs(false).style;
        const double x = take_coord(), y = take_coord();
        const double w = take_coord("rect width"), h = take_coord("rect height");
        sink().push_back(Element::make_rect({x, y}, w, h, s));
    }

    void parse_circle() {
        ++pos;
        const Style s = parse_attrs(false).style;
        const double cx = take_coord(), cy = take_coord();
        const double r = take_coord("circle radius");
        sink().push_back(Element::make_circle({cx, cy}, r, s));
    }

    void parse_ellipse() {
        ++pos;
        const Style s = parse_attrs(false).style;
        const double cx = take_coord(), cy = take_coord();
        const double rx = take_coord("ellipse radius"), ry = take_coord("ellipse radius");
        sink().push_back(Element::make_ellipse({cx, cy}, rx, ry, s));
    }

    void parse_stop() {
        ++pos;  // <stop>
        GradientStop stop;
        stop.offset = take_scalar(0.0, 1.0, "stop offset scalar");
        if (!cur_grad->stops.empty()) {
            const double prev = cur_grad->stops.back().offset;
            if (stop.offset < prev) {
                if (!lenient) fail(pos - 1, "non-decreasing stop offsets");
                stop.offset = prev;
            }
        }
        stop.color = take_color3();
        if (peek_kind(Token::Kind::Scalar)) stop.opacity = take_scalar(0.0, 1.0, "stop opacity");
        cur_grad->stops.push_back(stop);
    }

    void finish_gradient() {
        if (!cur_grad) return;
        if (cur_grad->stops.empty()) {
            if (!lenient) fail("at least one gradient stop");
            cur_grad.reset();  // lenient: an empty gradient cannot render
            return;
        }
        defs.push_back(std::move(*cur_grad));
        cur_grad.reset();
    }

    void parse_gradient(bool linear) {
        finish_gradient();
        ++pos;  // <linearGradient> / <radialGradient>
        cur_grad.emplace();
        cur_grad->kind = linear ? GradientKind::Linear : GradientKind::Radial;
        const Token* a = peek();
        if (!a || a->kind != Token::Kind::Attr || a->value != static_cast<int>(Attr::Id))
            fail("<id> attribute");
        ++pos;
        const int idx = take_coord("gradient index");
        if (!lenient && idx != static_cast<int>(defs.size()))
            fail(pos - 1, "canonical gradient index " + std::to_string(defs.size()));
        cur_grad->id = "g" + std::to_string(idx);
        const double x1 = take_coord("gradient anchor"), y1 = take_coord("gradient anchor");
        cur_grad->p1 = {x1, y1};
        if (linear) {
            const double x2 = take_coord("gradient anchor"), y2 = take_coord("gradient anchor");
            cur_grad->p2 = {x2, y2};
        } else {
            cur_grad->radius = take_coord("gradient radius");
        }
        while (peek_cmd(Cmd::Stop)) parse_stop();
    }

    void parse_defs() {
        if (!lenient && (defs_done || content_started))
            fail("defs block before any element");
        ++pos;  // <defs>
        for (;;) {
            if (peek_cmd(Cmd::DefsClose)) {
                finish_gradient();
                ++pos;
                break;
            }
            if (peek_cmd(Cmd::GradLinear)) parse_gradient(true);
            else if (peek_cmd(Cmd::GradRadial)) parse_gradient(false);
            else fail("gradient definition or </defs>");
        }
        defs_done = true;
    }

    // ----- top-level loop -----

    void skip_image_block() {
        ++pos;  // <img>
        while (peek()) {
            if (peek_kind(Token::Kind::Image)) {
                ++pos;
                continue;
            }
            const Token* t = peek();
            if (t->kind == Token::Kind::Marker && t->value == static_cast<int>(Marker::ImgClose)) {
                ++pos;
                return;
            }
            fail("image token or </img>");
        }
        fail("</img>");
    }

    void run() {
        const Token* t = peek();
        if (t && t->kind == Token::Kind::Marker && t->value == static_cast<int>(Marker::ImgOpen))
            skip_image_block();
        t = peek();
        if (t && t->kind == Token::Kind::Marker && t->value == static_cast<int>(Marker::SvgOpen))
            ++pos;
        while ((t = peek())) {
            if (t->kind == Token::Kind::Marker) {
                if (t->value == static_cast<int>(Marker::SvgClose) ||
                    t->value == static_cast<int>(Marker::Eos)) {
                    ++pos;
                    if (peek()) {
                        const Token* e = peek();
                        const bool eos = e->kind == Token::Kind::Marker &&
                                         e->value == static_cast<int>(Marker::Eos);
                        if (eos) ++pos;
                        if (peek()) fail("end of sequence after close marker");
                    }
                    return;
                }
                fail("element, defs block or close marker");
            }
            if (t->kind != Token::Kind::Command) fail("element or defs block");
            switch (static_cast<Cmd>(t->value)) {
                case Cmd::DefsOpen: parse_defs(); break;
                case Cmd::PathOpen: content_started = true; parse_path(); break;
                case Cmd::Rect: content_started = true; parse_rect(); break;
                case Cmd::Circle: content_started = true; parse_circle(); break;
                case Cmd::Ellipse: content_started = true; parse_ellipse(); break;
                case Cmd::Polygon: content_started = true; parse_polygon(); break;
                case Cmd::GroupOpen: {
                    content_started = true;
                    ++pos;
                    GroupFrame frame;
                    frame.transform = parse_attrs(true).transform;
                    groups.push_back(std::move(frame));
                    break;
                }
                case Cmd::GroupClose: {
                    if (groups.empty()) fail("element (no group is open)");
                    ++pos;
                    GroupFrame frame = std::move(groups.back());
                    groups.pop_back();
                    sink().push_back(Element::make_group(frame.transform, std::move(frame.kids)));
                    break;
                }
                default:
                    fail("element or defs block");
            }
        }
    }

    SvgDocument finalize() {
        // auto-close whatever is still open (lenient path; strict never gets
        // here with open constructs)
        finish_gradient();
        finish_path();
        finish_polygon();
        while (!groups.empty()) {
            GroupFrame frame = std::move(groups.back());
            groups.pop_back();
            sink().push_back(Element::make_group(frame.transform, std::move(frame.kids)));
        }
        SvgDocument doc;
        doc.viewbox = {0, 0, static_cast<double>(cfg.canvas_size),
                       static_cast<double>(cfg.canvas_size)};
        doc.defs = std::move(defs);
        doc.elements = std::move(top);
        fix_refs(doc.elements, doc);
        return doc;
    }

    void fix_refs(std::vector<Element>& els, const SvgDocument& doc) {
        for (auto& el : els) {
            if (el.style.fill.kind == PaintKind::Gradient &&
                !doc.find_gradient(el.style.fill.gradient_id))
                el.style.fill = Paint::none();  // not-yet-emitted gradient
            fix_refs(el.children, doc);
        }
    }
};

}  // namespace

SvgDocument detokenize(const TokenSequence& seq, DetokenizeMode mode,
                       const QuantizationConfig& cfg) {
    cfg.validate();
    Parser parser{seq.tokens, cfg, mode == DetokenizeMode::Lenient};
    if (mode == DetokenizeMode::Lenient) {
        try {
            parser.run();
        } catch (const Parser::Abort&) {
            // keep the longest valid prefix
        }
    } else {
        parser.run();
        if (parser.in_path || parser.in_polygon || parser.cur_grad || !parser.groups.empty())
            throw GrammarViolation(parser.pos, "closed construct", "end of sequence");
    }
    SvgDocument doc = parser.finalize();
    doc.validate();
    return doc;
}

// ---------------------------------------------------------------------------
// text / id forms

std::string tokens_to_text(const TokenSequence& seq) {
    std::string out;
    // scalar literals carry their decimal value; cfg only matters for scaling
    const QuantizationConfig cfg{};
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        if (i) out += ' ';
        const Token& t = seq.tokens[i];
        if (t.kind == Token::Kind::Scalar) {
            out += "<s" + format_scalar_value(t.value, cfg) + ">";
        } else {
            out += token_to_string(t);
        }
    }
    return out;
}

TokenSequence tokens_from_text(std::string_view text) {
    const QuantizationConfig cfg{};
    TokenSequence seq;
    std::size_t i = 0;
    auto error = [&](const std::string& what) -> void { throw Error("bad token text: " + what); };
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        auto end = text.find('>', i);
        if (text[i] != '<' || end == std::string_view::npos) error("expected <...> literal");
        std::string_view lit = text.substr(i, end - i + 1);
        i = end + 1;
        bool matched = false;
        for (int m = 0; m < kMarkerCount && !matched; ++m)
            if (lit == kMarkerText[m]) {
                seq.tokens.push_back(Token::marker(static_cast<Marker>(m)));
                matched = true;
            }
        for (int c = 0; c < kCmdCount && !matched; ++c)
            if (lit == kCmdText[c]) {
                seq.tokens.push_back(Token::command(static_cast<Cmd>(c)));
                matched = true;
            }
        for (int a = 0; a < kAttrCount && !matched; ++a)
            if (lit == kAttrText[a]) {
                seq.tokens.push_back(Token::attr(static_cast<Attr>(a)));
                matched = true;
            }
        if (matched) continue;
        if (lit.size() < 4) error(std::string(lit));
        const char tag = lit[1];
        std::string_view payload = lit.substr(2, lit.size() - 3);
        switch (tag) {
            case 'f':
            case 'p':
            case 'c':
            case 'i': {
                int v = 0;
                auto res = std::from_chars(payload.data(), payload.data() + payload.size(), v);
                if (res.ec != std::errc() || res.ptr != payload.data() + payload.size())
                    error(std::string(lit));
                if (tag == 'f') seq.tokens.push_back(Token::flag(v));
                else if (tag == 'p') seq.tokens.push_back(Token::coord(v));
                else if (tag == 'c') seq.tokens.push_back(Token::color(v));
                else seq.tokens.push_back(Token::image(v));
                break;
            }
            case 's': {
                double v = 0;
                auto res = std::from_chars(payload.data(), payload.data() + payload.size(), v);
                if (res.ec != std::errc() || res.ptr != payload.data() + payload.size())
                    error(std::string(lit));
                double scale = 1.0;
                for (int k = 0; k < cfg.scalar_decimals; ++k) scale *= 10.0;
                seq.tokens.push_back(
                    Token::scalar_raw(static_cast<std::int32_t>(std::llround(v * scale))));
                break;
            }
            default:
                error(std::string(lit));
        }
    }
    return seq;
}

std::string tokens_to_ids(const TokenSequence& seq, const Vocabulary& vocab) {
    std::string out;
    for (const auto& t : seq.tokens) {
        out += std::to_string(vocab.token_to_id(t));
        out += '\n';
    }
    return out;
}

TokenSequence tokens_from_ids(std::string_view text, const Vocabulary& vocab) {
    TokenSequence seq;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        int v = 0;
        auto res = std::from_chars(text.data() + i, text.data() + text.size(), v);
        if (res.ec != std::errc()) throw Error("bad token id file");
        i = static_cast<std::size_t>(res.ptr - text.data());
        seq.tokens.push_back(vocab.id_to_token(v));
    }
    return seq;
}

}  // namespace svgtk
