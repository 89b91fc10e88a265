#include "svgtk/svg_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "svgtk/bake.hpp"

namespace svgtk {

// ---------------------------------------------------------------------------
// numbers

std::string format_number(double v) {
    if (v == 0.0) return "0";  // also normalizes -0
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// colors

namespace {

struct NamedColor {
    const char* name;
    std::uint32_t rgb;
};

// CSS extended color keywords (148 entries, including the gray/grey aliases
// and rebeccapurple).
constexpr NamedColor kNamedColors[] = {
    {"aliceblue", 0xF0F8FF}, {"antiquewhite", 0xFAEBD7}, {"aqua", 0x00FFFF},
    {"aquamarine", 0x7FFFD4}, {"azure", 0xF0FFFF}, {"beige", 0xF5F5DC},
    {"bisque", 0xFFE4C4}, {"black", 0x000000}, {"blanchedalmond", 0xFFEBCD},
    {"blue", 0x0000FF}, {"blueviolet", 0x8A2BE2}, {"brown", 0xA52A2A},
    {"burlywood", 0xDEB887}, {"cadetblue", 0x5F9EA0}, {"chartreuse", 0x7FFF00},
    {"chocolate", 0xD2691E}, {"coral", 0xFF7F50}, {"cornflowerblue", 0x6495ED},
    {"cornsilk", 0xFFF8DC}, {"crimson", 0xDC143C}, {"cyan", 0x00FFFF},
    {"darkblue", 0x00008B}, {"darkcyan", 0x008B8B}, {"darkgoldenrod", 0xB8860B},
    {"darkgray", 0xA9A9A9}, {"darkgreen", 0x006400}, {"darkgrey", 0xA9A9A9},
    {"darkkhaki", 0xBDB76B}, {"darkmagenta", 0x8B008B}, {"darkolivegreen", 0x556B2F},
    {"darkorange", 0xFF8C00}, {"darkorchid", 0x9932CC}, {"darkred", 0x8B0000},
    {"darksalmon", 0xE9967A}, {"darkseagreen", 0x8FBC8F}, {"darkslateblue", 0x483D8B},
    {"darkslategray", 0x2F4F4F}, {"darkslategrey", 0x2F4F4F}, {"darkturquoise", 0x00CED1},
    {"darkviolet", 0x9400D3}, {"deeppink", 0xFF1493}, {"deepskyblue", 0x00BFFF},
    {"dimgray", 0x696969}, {"dimgrey", 0x696969}, {"dodgerblue", 0x1E90FF},
    {"firebrick", 0xB22222}, {"floralwhite", 0xFFFAF0}, {"forestgreen", 0x228B22},
    {"fuchsia", 0xFF00FF}, {"gainsboro", 0xDCDCDC}, {"ghostwhite", 0xF8F8FF},
    {"gold", 0xFFD700}, {"goldenrod", 0xDAA520}, {"gray", 0x808080},
    {"green", 0x008000}, {"greenyellow", 0xADFF2F}, {"grey", 0x808080},
    {"honeydew", 0xF0FFF0}, {"hotpink", 0xFF69B4}, {"indianred", 0xCD5C5C},
    {"indigo", 0x4B0082}, {"ivory", 0xFFFFF0}, {"khaki", 0xF0E68C},
    {"lavender", 0xE6E6FA}, {"lavenderblush", 0xFFF0F5}, {"lawngreen", 0x7CFC00},
    {"lemonchiffon", 0xFFFACD}, {"lightblue", 0xADD8E6}, {"lightcoral", 0xF08080},
    {"lightcyan", 0xE0FFFF}, {"lightgoldenrodyellow", 0xFAFAD2}, {"lightgray", 0xD3D3D3},
    {"lightgreen", 0x90EE90}, {"lightgrey", 0xD3D3D3}, {"lightpink", 0xFFB6C1},
    {"lightsalmon", 0xFFA07A}, {"lightseagreen", 0x20B2AA}, {"lightskyblue", 0x87CEFA},
    {"lightslategray", 0x778899}, {"lightslategrey", 0x778899}, {"lightsteelblue", 0xB0C4DE},
    {"lightyellow", 0xFFFFE0}, {"lime", 0x00FF00}, {"limegreen", 0x32CD32},
    {"linen", 0xFAF0E6}, {"magenta", 0xFF00FF}, {"maroon", 0x800000},
    {"mediumaquamarine", 0x66CDAA}, {"mediumblue", 0x0000CD}, {"mediumorchid", 0xBA55D3},
    {"mediumpurple", 0x9370DB}, {"mediumseagreen", 0x3CB371}, {"mediumslateblue", 0x7B68EE},
    {"mediumspringgreen", 0x00FA9A}, {"mediumturquoise", 0x48D1CC}, {"mediumvioletred", 0xC71585},
    {"midnightblue", 0x191970}, {"mintcream", 0xF5FFFA}, {"mistyrose", 0xFFE4E1},
    {"moccasin", 0xFFE4B5}, {"navajowhite", 0xFFDEAD}, {"navy", 0x000080},
    {"oldlace", 0xFDF5E6}, {"olive", 0x808000}, {"olivedrab", 0x6B8E23},
    {"orange", 0xFFA500}, {"orangered", 0xFF4500}, {"orchid", 0xDA70D6},
    {"palegoldenrod", 0xEEE8AA}, {"palegreen", 0x98FB98}, {"paleturquoise", 0xAFEEEE},
    {"palevioletred", 0xDB7093}, {"papayawhip", 0xFFEFD5}, {"peachpuff", 0xFFDAB9},
    {"peru", 0xCD853F}, {"pink", 0xFFC0CB}, {"plum", 0xDDA0DD},
    {"powderblue", 0xB0E0E6}, {"purple", 0x800080}, {"rebeccapurple", 0x663399},
    {"red", 0xFF0000}, {"rosybrown", 0xBC8F8F}, {"royalblue", 0x4169E1},
    {"saddlebrown", 0x8B4513}, {"salmon", 0xFA8072}, {"sandybrown", 0xF4A460},
    {"seagreen", 0x2E8B57}, {"seashell", 0xFFF5EE}, {"sienna", 0xA0522D},
    {"silver", 0xC0C0C0}, {"skyblue", 0x87CEEB}, {"slateblue", 0x6A5ACD},
    {"slategray", 0x708090}, {"slategrey", 0x708090}, {"snow", 0xFFFAFA},
    {"springgreen", 0x00FF7F}, {"steelblue", 0x4682B4}, {"tan", 0xD2B48C},
    {"teal", 0x008080}, {"thistle", 0xD8BFD8}, {"tomato", 0xFF6347},
    {"turquoise", 0x40E0D0}, {"violet", 0xEE82EE}, {"wheat", 0xF5DEB3},
    {"white", 0xFFFFFF}, {"whitesmoke", 0xF5F5F5}, {"yellow", 0xFFFF00},
    {"yellowgreen", 0x9ACD32},
};

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<Rgb> parse_color(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text[0] == '#') {
        if (text.size() == 4) {
            int r = hex_digit(text[1]), g = hex_digit(text[2]), b = hex_digit(text[3]);
            if (r < 0 || g < 0 || b < 0) return std::nullopt;
            return Rgb{static_cast<std::uint8_t>(r * 17), static_cast<std::uint8_t>(g * 17),
                       static_cast<std::uint8_t>(b * 17)};
        }
        if (text.size() == 7) {
            int v[6];
            for (int i = 0; i < 6; ++i) {
                v[i] = hex_digit(text[1 + i]);
                if (v[i] < 0) return std::nullopt;
            }
            return Rgb{static_cast<std::uint8_t>(v[0] * 16 + v[1]),
                       static_cast<std::uint8_t>(v[2] * 16 + v[3]),
                       static_cast<std::uint8_t>(v[4] * 16 + v[5])};
        }
        return std::nullopt;
    }
    if (text.starts_with("rgb(") && text.ends_with(")")) {
        std::string inner(text.substr(4, text.size() - 5));
        for (char& c : inner)
            if (c == ',') c = ' ';
        std::istringstream ss(inner);
        int r, g, b;
        if (!(ss >> r >> g >> b)) return std::nullopt;
        std::string rest;
        if (ss >> rest) return std::nullopt;
        if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) return std::nullopt;
        return Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                   static_cast<std::uint8_t>(b)};
    }
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& nc : kNamedColors) {
        if (lower == nc.name) {
            return Rgb{static_cast<std::uint8_t>(nc.rgb >> 16),
                       static_cast<std::uint8_t>((nc.rgb >> 8) & 0xFF),
                       static_cast<std::uint8_t>(nc.rgb & 0xFF)};
        }
    }
    return std::nullopt;
}

std::string format_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

// ---------------------------------------------------------------------------
// element factories / validation

Element Element::make_path(std::vector<PathCommand> cmds, Style s) {
    Element e;
    e.kind = ElementKind::Path;
    e.path = std::move(cmds);
    e.style = std::move(s);
    return e;
}
Element Element::make_rect(Vec2 origin, double w, double h, Style s) {
    Element e;
    e.kind = ElementKind::Rect;
    e.origin = origin; e.width = w; e.height = h;
    e.style = std::move(s);
    return e;
}
Element Element::make_circle(Vec2 c, double r, Style s) {
    Element e;
    e.kind = ElementKind::Circle;
    e.center = c; e.rx = r;
    e.style = std::move(s);
    return e;
}
Element Element::make_ellipse(Vec2 c, double rx, double ry, Style s) {
    Element e;
    e.kind = ElementKind::Ellipse;
    e.center = c; e.rx = rx; e.ry = ry;
    e.style = std::move(s);
    return e;
}
Element Element::make_polygon(std::vector<Vec2> pts, Style s) {
    Element e;
    e.kind = ElementKind::Polygon;
    e.points = std::move(pts);
    e.style = std::move(s);
    return e;
}
Element Element::make_polyline(std::vector<Vec2> pts, Style s) {
    Element e;
    e.kind = ElementKind::Polyline;
    e.points = std::move(pts);
    e.style = std::move(s);
    return e;
}
Element Element::make_line(Vec2 a, Vec2 b, Style s) {
    Element e;
    e.kind = ElementKind::Line;
    e.points = {a, b};
    e.style = std::move(s);
    return e;
}
Element Element::make_group(Transform t, std::vector<Element> kids) {
    Element e;
    e.kind = ElementKind::Group;
    e.transform = t;
    e.children = std::move(kids);
    return e;
}

const GradientDef* SvgDocument::find_gradient(std::string_view id) const {
    for (const auto& d : defs)
        if (d.id == id) return &d;
    return nullptr;
}

namespace {

void validate_element(const SvgDocument& doc, const Element& el) {
    if (el.kind != ElementKind::Group) {
        if (!el.children.empty()) throw InvalidDocument("non-group element with children");
        if (!el.transform.is_identity()) throw InvalidDocument("non-group element with transform");
    }
    if (el.style.opacity < 0.0 || el.style.opacity > 1.0)
        throw InvalidDocument("opacity outside [0,1]");
    if (el.style.stroke_width < 0.0) throw InvalidDocument("negative stroke width");
    for (const Paint* p : {&el.style.fill, &el.style.stroke}) {
        if (p->kind == PaintKind::Gradient && !doc.find_gradient(p->gradient_id))
            throw InvalidDocument("unresolved gradient reference '" + p->gradient_id + "'");
    }
    switch (el.kind) {
        case ElementKind::Path:
            if (el.path.empty() || el.path.front().op != PathOp::Move)
                throw InvalidDocument("path must begin with M");
            for (const auto& c : el.path) {
                if (c.op == PathOp::Arc) {
                    if (c.rx < 0 || c.ry < 0) throw InvalidDocument("negative arc radius");
                    if ((c.large_arc != 0 && c.large_arc != 1) || (c.sweep != 0 && c.sweep != 1))
                        throw InvalidDocument("arc flag not in {0,1}");
                }
            }
            break;
        case ElementKind::Circle:
            if (el.rx < 0) throw InvalidDocument("negative radius");
            break;
        case ElementKind::Ellipse:
            if (el.rx < 0 || el.ry < 0) throw InvalidDocument("negative radius");
            break;
        case ElementKind::Rect:
            if (el.width < 0 || el.height < 0) throw InvalidDocument("negative rect size");
            break;
        case ElementKind::Line:
            if (el.points.size() != 2) throw InvalidDocument("line needs exactly 2 points");
            break;
        case ElementKind::Group:
            for (const auto& k : el.children) validate_element(doc, k);
            break;
        default:
            break;
    }
}

}  // namespace

void SvgDocument::validate() const {
    if (!(viewbox.width > 0.0) || !(viewbox.height > 0.0))
        throw InvalidDocument("viewBox must have positive width and height");
    for (const auto& d : defs) {
        if (d.stops.empty()) throw InvalidDocument("gradient '" + d.id + "' has no stops");
        double prev = 0.0;
        for (std::size_t i = 0; i < d.stops.size(); ++i) {
            const auto& st = d.stops[i];
            if (st.offset < 0.0 || st.offset > 1.0)
                throw InvalidDocument("gradient stop offset outside [0,1]");
            if (i > 0 && st.offset < prev)
                throw InvalidDocument("gradient stop offsets must be non-decreasing");
            if (st.opacity < 0.0 || st.opacity > 1.0)
                throw InvalidDocument("gradient stop opacity outside [0,1]");
            prev = st.offset;
        }
    }
    for (const auto& el : elements) validate_element(*this, el);
}

// ---------------------------------------------------------------------------
// minimal XML reader (elements, attributes, comments; no namespaces beyond
// literal names, no external entities)

namespace {

struct XmlAttr {
    std::string name, value;
};

struct XmlNode {
    std::string name;
    std::vector<XmlAttr> attrs;
    std::vector<XmlNode> children;

    const std::string* attr(std::string_view n) const {
        for (const auto& a : attrs)
            if (a.name == n) return &a.value;
        return nullptr;
    }
};

struct XmlReader {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw MalformedXml(msg + " (offset " + std::to_string(pos) + ")");
    }

    bool eof() const { return pos >= s.size(); }
    char peek() const { return pos < s.size() ? s[pos] : '\0'; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool try_skip(std::string_view lit) {
        if (s.substr(pos, lit.size()) == lit) {
            pos += lit.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view lit) {
        if (!try_skip(lit)) fail("expected '" + std::string(lit) + "'");
    }

    void skip_until(std::string_view lit) {
        auto at = s.find(lit, pos);
        if (at == std::string_view::npos) fail("unterminated construct");
        pos = at + lit.size();
    }

    // comments, processing instructions, doctype
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (try_skip("<!--")) { skip_until("-->"); continue; }
            if (try_skip("<?")) { skip_until("?>"); continue; }
            if (try_skip("<!DOCTYPE")) { skip_until(">"); continue; }
            break;
        }
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
               c == '.';
    }

    std::string read_name() {
        std::size_t start = pos;
        while (!eof() && is_name_char(s[pos])) ++pos;
        if (pos == start) fail("expected name");
        return std::string(s.substr(start, pos - start));
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size();) {
            if (raw[i] != '&') {
                out += raw[i++];
                continue;
            }
            auto semi = raw.find(';', i);
            if (semi == std::string_view::npos) fail("unterminated entity");
            std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (ent.starts_with("#")) {
                int code = 0;
                bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
                std::string_view digits = ent.substr(hex ? 2 : 1);
                auto res = std::from_chars(digits.data(), digits.data() + digits.size(), code,
                                           hex ? 16 : 10);
                if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() ||
                    code <= 0 || code > 127)
                    fail("bad character reference");
                out += static_cast<char>(code);
            } else {
                fail("unknown entity '&" + std::string(ent) + ";'");
            }
            i = semi + 1;
        }
        return out;
    }

    XmlNode read_element() {
        expect("<");
        XmlNode node;
        node.name = read_name();
        for (;;) {
            skip_ws();
            if (try_skip("/>")) return node;
            if (try_skip(">")) break;
            XmlAttr attr;
            attr.name = read_name();
            skip_ws();
            expect("=");
            skip_ws();
            char quote = peek();
            if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
            ++pos;
            std::size_t start = pos;
            while (!eof() && s[pos] != quote) ++pos;
            if (eof()) fail("unterminated attribute value");
            attr.value = decode_entities(s.substr(start, pos - start));
            ++pos;
            node.attrs.push_back(std::move(attr));
        }
        // children / text until matching close tag
        for (;;) {
            std::size_t text_start = pos;
            while (!eof() && s[pos] != '<') ++pos;
            std::string_view text = s.substr(text_start, pos - text_start);
            if (!trim(text).empty()) fail("unexpected text content in <" + node.name + ">");
            if (eof()) fail("unterminated element <" + node.name + ">");
            if (try_skip("<!--")) { skip_until("-->"); continue; }
            if (s.substr(pos, 2) == "</") {
                pos += 2;
                std::string close = read_name();
                if (close != node.name)
                    fail("mismatched close tag </" + close + "> for <" + node.name + ">");
                skip_ws();
                expect(">");
                return node;
            }
            node.children.push_back(read_element());
        }
    }

    XmlNode read_document() {
        skip_misc();
        if (eof() || peek() != '<') fail("expected root element");
        XmlNode root = read_element();
        skip_misc();
        skip_ws();
        if (!eof()) fail("trailing content after root element");
        return root;
    }
};

// ---------------------------------------------------------------------------
// path data

struct PathReader {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw BadPathData(pos, msg); }

    void skip_sep() {
        while (pos < s.size() &&
               (std::isspace(static_cast<unsigned char>(s[pos])) || s[pos] == ','))
            ++pos;
    }

    bool eof() {
        skip_sep();
        return pos >= s.size();
    }

    double number() {
        skip_sep();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        std::size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos, ++digits;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                ++pos, ++digits;
        }
        if (digits == 0) fail("expected number");
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
            std::size_t mark = pos++;
            if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
            std::size_t exp_digits = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                ++pos, ++exp_digits;
            if (exp_digits == 0) pos = mark;  // 'e' was not an exponent
        }
        double value = 0;
        auto res = std::from_chars(s.data() + start, s.data() + pos, value);
        if (res.ec != std::errc()) fail("unparsable number");
        return value;
    }

    int flag() {
        skip_sep();
        if (pos >= s.size() || (s[pos] != '0' && s[pos] != '1')) fail("expected flag 0 or 1");
        return s[pos++] - '0';
    }

    Vec2 point() {
        double x = number();
        double y = number();
        return {x, y};
    }
};

std::vector<PathCommand> parse_path_data(std::string_view d) {
    std::vector<PathCommand> out;
    PathReader r{d};
    Vec2 cur{0, 0};
    Vec2 subpath_start{0, 0};
    Vec2 prev_cubic_ctrl{0, 0};
    Vec2 prev_quad_ctrl{0, 0};
    bool prev_was_cubic = false, prev_was_quad = false;
    char cmd = 0;

    r.skip_sep();
    while (!r.eof()) {
        char c = r.s[r.pos];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cmd = c;
            ++r.pos;
        } else if (cmd == 0) {
            r.fail("path must start with a command letter");
        } else if (cmd == 'M') {
            cmd = 'L';  // implicit lineto after moveto
        } else if (cmd == 'm') {
            cmd = 'l';
        } else if (cmd == 'Z' || cmd == 'z') {
            r.fail("coordinates after Z");
        }
        const bool rel = std::islower(static_cast<unsigned char>(cmd));
        const Vec2 base = rel ? cur : Vec2{0, 0};
        bool was_cubic = false, was_quad = false;
        switch (std::toupper(static_cast<unsigned char>(cmd))) {
            case 'M': {
                Vec2 p = base + r.point();
                out.push_back(PathCommand::move(p));
                cur = subpath_start = p;
                break;
            }
            case 'L': {
                Vec2 p = base + r.point();
                out.push_back(PathCommand::line(p));
                cur = p;
                break;
            }
            case 'H': {
                double x = r.number() + (rel ? cur.x : 0.0);
                out.push_back(PathCommand::line({x, cur.y}));
                cur = {x, cur.y};
                break;
            }
            case 'V': {
                double y = r.number() + (rel ? cur.y : 0.0);
                out.push_back(PathCommand::line({cur.x, y}));
                cur = {cur.x, y};
                break;
            }
            case 'C': {
                Vec2 c1 = base + r.point();
                Vec2 c2 = base + r.point();
                Vec2 p = base + r.point();
                out.push_back(PathCommand::cubic(c1, c2, p));
                prev_cubic_ctrl = c2;
                was_cubic = true;
                cur = p;
                break;
            }
            case 'S': {
                Vec2 c1 = prev_was_cubic ? cur + (cur - prev_cubic_ctrl) : cur;
                Vec2 c2 = base + r.point();
                Vec2 p = base + r.point();
                out.push_back(PathCommand::cubic(c1, c2, p));
                prev_cubic_ctrl = c2;
                was_cubic = true;
                cur = p;
                break;
            }
            case 'Q': {
                Vec2 q = base + r.point();
                Vec2 p = base + r.point();
                out.push_back(PathCommand::quad(q, p));
                prev_quad_ctrl = q;
                was_quad = true;
                cur = p;
                break;
            }
            case 'T': {
                Vec2 q = prev_was_quad ? cur + (cur - prev_quad_ctrl) : cur;
                Vec2 p = base + r.point();
                out.push_back(PathCommand::quad(q, p));
                prev_quad_ctrl = q;
                was_quad = true;
                cur = p;
                break;
            }
            case 'A': {
                double rx = r.number();
                double ry = r.number();
                double rot = r.number();
                int large = r.flag();
                int sweep = r.flag();
                Vec2 p = base + r.point();
                if (rx < 0 || ry < 0) r.fail("negative arc radius");
                out.push_back(PathCommand::arc(rx, ry, rot, large, sweep, p));
                cur = p;
                break;
            }
            case 'Z': {
                out.push_back(PathCommand::close());
                cur = subpath_start;
                break;
            }
            default:
                r.fail(std::string("unknown command '") + cmd + "'");
        }
        prev_was_cubic = was_cubic;
        prev_was_quad = was_quad;
        r.skip_sep();
    }
    if (out.empty() || out.front().op != PathOp::Move)
        throw BadPathData(0, "path must begin with M");
    return out;
}

// ---------------------------------------------------------------------------
// transform lists

Transform parse_transform(std::string_view text) {
    Transform result;
    PathReader r{text};
    r.skip_sep();
    while (!r.eof()) {
        std::size_t start = r.pos;
        while (r.pos < r.s.size() && std::isalpha(static_cast<unsigned char>(r.s[r.pos]))) ++r.pos;
        std::string fn(r.s.substr(start, r.pos - start));
        r.skip_sep();
        if (r.pos >= r.s.size() || r.s[r.pos] != '(')
            throw MalformedXml("bad transform '" + std::string(text) + "'");
        ++r.pos;
        std::vector<double> args;
        r.skip_sep();
        while (r.pos < r.s.size() && r.s[r.pos] != ')') {
            args.push_back(r.number());
            r.skip_sep();
        }
        if (r.pos >= r.s.size()) throw MalformedXml("unterminated transform");
        ++r.pos;
        Transform t;
        if (fn == "matrix" && args.size() == 6) {
            t = {args[0], args[1], args[2], args[3], args[4], args[5]};
        } else if (fn == "translate" && (args.size() == 1 || args.size() == 2)) {
            t = Transform::translate(args[0], args.size() == 2 ? args[1] : 0.0);
        } else if (fn == "scale" && (args.size() == 1 || args.size() == 2)) {
            t = Transform::scale(args[0], args.size() == 2 ? args[1] : args[0]);
        } else if (fn == "rotate" && args.size() == 1) {
            t = Transform::rotate_deg(args[0]);
        } else if (fn == "rotate" && args.size() == 3) {
            t = Transform::rotate_deg_about(args[0], {args[1], args[2]});
        } else if (fn == "skewX" && args.size() == 1) {
            t = {1, 0, std::tan(args[0] * 3.14159265358979323846 / 180.0), 1, 0, 0};
        } else if (fn == "skewY" && args.size() == 1) {
            t = {1, std::tan(args[0] * 3.14159265358979323846 / 180.0), 0, 1, 0, 0};
        } else {
            throw MalformedXml("bad transform function '" + fn + "'");
        }
        result = result * t;
        r.skip_sep();
    }
    return result;
}

// ---------------------------------------------------------------------------
// document building

const std::set<std::string_view> kIgnoredSvgAttrs = {
    "xmlns", "xmlns:xlink", "version", "baseProfile", "width", "height",
};

double parse_length(const std::string& v, const char* what) {
    std::string_view sv = trim(v);
    if (sv.ends_with("px")) sv.remove_suffix(2);
    double value = 0;
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
        throw MalformedXml(std::string("bad length for ") + what + ": '" + v + "'");
    return value;
}

double parse_plain_number(const std::string& v, const char* what) {
    std::string_view sv = trim(v);
    double value = 0;
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
        throw MalformedXml(std::string("bad number for ") + what + ": '" + v + "'");
    return value;
}

Paint parse_paint(const std::string& v, const char* what) {
    std::string_view sv = trim(v);
    if (sv == "none" || sv == "transparent") return Paint::none();
    if (sv.starts_with("url(#") && sv.ends_with(")"))
        return Paint::gradient(std::string(sv.substr(5, sv.size() - 6)));
    if (auto c = parse_color(sv)) return Paint::solid(*c);
    throw UnsupportedAttribute(std::string(what) + "='" + v + "'");
}

Style parse_style_attrs(const XmlNode& node) {
    Style style;
    for (const auto& a : node.attrs) {
        if (a.name == "fill") style.fill = parse_paint(a.value, "fill");
        else if (a.name == "stroke") style.stroke = parse_paint(a.value, "stroke");
        else if (a.name == "stroke-width") style.stroke_width = parse_plain_number(a.value, "stroke-width");
        else if (a.name == "opacity") style.opacity = parse_plain_number(a.value, "opacity");
        else if (a.name == "fill-rule") {
            if (a.value == "evenodd") style.fill_rule = FillRule::EvenOdd;
            else if (a.value == "nonzero") style.fill_rule = FillRule::NonZero;
            else throw UnsupportedAttribute("fill-rule='" + a.value + "'");
        } else if (a.name == "stroke-linecap" || a.name == "stroke-linejoin") {
            if (a.value != "round")
                throw UnsupportedAttribute(a.name + "='" + a.value + "' (only round is supported)");
        }
    }
    if (style.stroke_width < 0) throw UnsupportedAttribute("negative stroke-width");
    if (style.opacity < 0 || style.opacity > 1) throw UnsupportedAttribute("opacity outside [0,1]");
    if (style.stroke.kind == PaintKind::Gradient)
        throw UnsupportedAttribute("gradient strokes are not supported");
    return style;
}

// Attributes a given element may carry; anything else is an error rather than
// a silent drop.
void check_attrs(const XmlNode& node, std::initializer_list<std::string_view> allowed) {
    static const std::set<std::string_view> kStyleAttrs = {
        "fill", "stroke", "stroke-width", "opacity", "fill-rule",
        "stroke-linecap", "stroke-linejoin", "id", "transform",
    };
    for (const auto& a : node.attrs) {
        if (kStyleAttrs.count(a.name)) continue;
        bool ok = false;
        for (auto al : allowed)
            if (a.name == al) { ok = true; break; }
        if (!ok) throw UnsupportedAttribute(a.name + " on <" + node.name + ">");
    }
}

std::vector<Vec2> parse_points(const std::string& v) {
    PathReader r{v};
    std::vector<Vec2> pts;
    while (!r.eof()) pts.push_back(r.point());
    return pts;
}

GradientStop parse_stop(const XmlNode& node) {
    if (node.name != "stop") throw UnsupportedElement(node.name);
    check_attrs(node, {"offset", "stop-color", "stop-opacity"});
    GradientStop stop;
    if (const auto* v = node.attr("offset")) {
        std::string_view sv = trim(*v);
        bool pct = sv.ends_with("%");
        if (pct) sv.remove_suffix(1);
        double num = 0;
        auto res = std::from_chars(sv.data(), sv.data() + sv.size(), num);
        if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
            throw MalformedXml("bad stop offset '" + *v + "'");
        stop.offset = pct ? num / 100.0 : num;
    }
    if (const auto* v = node.attr("stop-color")) {
        auto c = parse_color(*v);
        if (!c) throw UnsupportedAttribute("stop-color='" + *v + "'");
        stop.color = *c;
    }
    if (const auto* v = node.attr("stop-opacity"))
        stop.opacity = parse_plain_number(*v, "stop-opacity");
    return stop;
}

GradientDef parse_gradient(const XmlNode& node) {
    GradientDef def;
    const auto* id = node.attr("id");
    if (!id || id->empty()) throw MalformedXml("gradient without id");
    def.id = *id;
    const auto* units = node.attr("gradientUnits");
    if (!units || *units != "userSpaceOnUse")
        throw UnsupportedAttribute("gradients require gradientUnits=\"userSpaceOnUse\"");
    if (const auto* sm = node.attr("spreadMethod"); sm && *sm != "pad")
        throw UnsupportedAttribute("spreadMethod='" + *sm + "'");
    auto coord = [&](const char* name) {
        const auto* v = node.attr(name);
        if (!v) throw MalformedXml(std::string("gradient missing ") + name);
        return parse_plain_number(*v, name);
    };
    if (node.name == "linearGradient") {
        check_attrs(node, {"x1", "y1", "x2", "y2", "gradientUnits", "spreadMethod"});
        def.kind = GradientKind::Linear;
        def.p1 = {coord("x1"), coord("y1")};
        def.p2 = {coord("x2"), coord("y2")};
    } else {
        check_attrs(node, {"cx", "cy", "r", "gradientUnits", "spreadMethod"});
        def.kind = GradientKind::Radial;
        def.p1 = {coord("cx"), coord("cy")};
        def.radius = coord("r");
    }
    for (const auto& child : node.children) def.stops.push_back(parse_stop(child));
    if (def.stops.empty()) throw MalformedXml("gradient '" + def.id + "' has no stops");
    return def;
}

const std::set<std::string_view> kSupportedShapes = {
    "path", "rect", "circle", "ellipse", "polygon", "polyline", "line", "g",
};

Element build_element(const XmlNode& node);

std::vector<Element> build_children(const XmlNode& node) {
    std::vector<Element> out;
    for (const auto& child : node.children) {
        if (child.name == "defs") throw UnsupportedElement("defs (must be a direct child of <svg>)");
        out.push_back(build_element(child));
    }
    return out;
}

Element build_element(const XmlNode& node) {
    if (!kSupportedShapes.count(node.name)) throw UnsupportedElement(node.name);

    Transform transform;
    if (const auto* t = node.attr("transform")) transform = parse_transform(*t);

    Element el;
    if (node.name == "g") {
        // Groups carry structure only; style inheritance is out of this subset.
        for (const auto& a : node.attrs)
            if (a.name != "transform" && a.name != "id")
                throw UnsupportedAttribute(a.name + " on <g>");
        return Element::make_group(transform, build_children(node));
    }
    if (!node.children.empty())
        throw MalformedXml("shape element <" + node.name + "> cannot have children");

    Style style = parse_style_attrs(node);
    auto num = [&](const char* name, double fallback) {
        const auto* v = node.attr(name);
        return v ? parse_plain_number(*v, name) : fallback;
    };
    if (node.name == "path") {
        check_attrs(node, {"d"});
        const auto* d = node.attr("d");
        if (!d) throw MalformedXml("<path> without d attribute");
        el = Element::make_path(parse_path_data(*d), style);
    } else if (node.name == "rect") {
        check_attrs(node, {"x", "y", "width", "height"});
        el = Element::make_rect({num("x", 0), num("y", 0)}, num("width", 0), num("height", 0),
                                style);
        if (el.width < 0 || el.height < 0) throw MalformedXml("negative rect size");
    } else if (node.name == "circle") {
        check_attrs(node, {"cx", "cy", "r"});
        el = Element::make_circle({num("cx", 0), num("cy", 0)}, num("r", 0), style);
        if (el.rx < 0) throw MalformedXml("negative circle radius");
    } else if (node.name == "ellipse") {
        check_attrs(node, {"cx", "cy", "rx", "ry"});
        el = Element::make_ellipse({num("cx", 0), num("cy", 0)}, num("rx", 0), num("ry", 0), style);
        if (el.rx < 0 || el.ry < 0) throw MalformedXml("negative ellipse radius");
    } else if (node.name == "polygon" || node.name == "polyline") {
        check_attrs(node, {"points"});
        const auto* p = node.attr("points");
        if (!p) throw MalformedXml("<" + node.name + "> without points");
        auto pts = parse_points(*p);
        el = node.name == "polygon" ? Element::make_polygon(std::move(pts), style)
                                    : Element::make_polyline(std::move(pts), style);
    } else {  // line
        check_attrs(node, {"x1", "y1", "x2", "y2"});
        el = Element::make_line({num("x1", 0), num("y1", 0)}, {num("x2", 0), num("y2", 0)}, style);
    }

    // A transform on a shape is preserved by wrapping the shape in a group, so
    // shape geometry itself stays transform-free.
    if (!transform.is_identity()) {
        Element shape = std::move(el);
        return Element::make_group(transform, {std::move(shape)});
    }
    return el;
}

}  // namespace

SvgDocument parse_svg(std::string_view text) {
    XmlReader reader{text};
    XmlNode root = reader.read_document();
    if (root.name != "svg") throw MalformedXml("root element is <" + root.name + ">, not <svg>");

    SvgDocument doc;
    if (const auto* vb = root.attr("viewBox")) {
        PathReader r{*vb};
        doc.viewbox.min_x = r.number();
        doc.viewbox.min_y = r.number();
        doc.viewbox.width = r.number();
        doc.viewbox.height = r.number();
        if (!r.eof()) throw MalformedXml("viewBox must have exactly 4 numbers");
    } else {
        const auto* w = root.attr("width");
        const auto* h = root.attr("height");
        if (!w || !h) throw MissingViewbox();
        doc.viewbox = {0, 0, parse_length(*w, "width"), parse_length(*h, "height")};
    }
    if (!(doc.viewbox.width > 0) || !(doc.viewbox.height > 0))
        throw MalformedXml("viewBox must have positive width and height");

    for (const auto& a : root.attrs) {
        if (a.name == "viewBox" || kIgnoredSvgAttrs.count(a.name)) continue;
        throw UnsupportedAttribute(a.name + " on <svg>");
    }

    for (const auto& child : root.children) {
        if (child.name == "defs") {
            for (const auto& g : child.children) {
                if (g.name != "linearGradient" && g.name != "radialGradient")
                    throw UnsupportedElement(g.name);
                doc.defs.push_back(parse_gradient(g));
            }
            continue;
        }
        doc.elements.push_back(build_element(child));
    }
    doc.validate();
    return doc;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void append_style(std::string& out, const Style& s) {
    static const Style defaults;
    if (!(s.fill == defaults.fill)) {
        if (s.fill.kind == PaintKind::None) out += " fill=\"none\"";
        else if (s.fill.kind == PaintKind::Solid) out += " fill=\"" + format_color(s.fill.color) + "\"";
        else out += " fill=\"url(#" + s.fill.gradient_id + ")\"";
    }
    if (s.stroke.kind != PaintKind::None) {
        out += " stroke=\"" + format_color(s.stroke.color) + "\"";
        if (s.stroke_width != 1.0) out += " stroke-width=\"" + format_number(s.stroke_width) + "\"";
        out += " stroke-linecap=\"round\" stroke-linejoin=\"round\"";
    }
    if (s.opacity != 1.0) out += " opacity=\"" + format_number(s.opacity) + "\"";
    if (s.fill_rule == FillRule::EvenOdd) out += " fill-rule=\"evenodd\"";
}

std::string format_path_data(const std::vector<PathCommand>& cmds) {
    std::string d;
    for (const auto& c : cmds) {
        if (!d.empty()) d += ' ';
        switch (c.op) {
            case PathOp::Move:
                d += "M " + format_number(c.pts[0].x) + ' ' + format_number(c.pts[0].y);
                break;
            case PathOp::Line:
                d += "L " + format_number(c.pts[0].x) + ' ' + format_number(c.pts[0].y);
                break;
            case PathOp::Cubic:
                d += "C " + format_number(c.pts[0].x) + ' ' + format_number(c.pts[0].y) + ' ' +
                     format_number(c.pts[1].x) + ' ' + format_number(c.pts[1].y) + ' ' +
                     format_number(c.pts[2].x) + ' ' + format_number(c.pts[2].y);
                break;
            case PathOp::Quad:
                d += "Q " + format_number(c.pts[0].x) + ' ' + format_number(c.pts[0].y) + ' ' +
                     format_number(c.pts[1].x) + ' ' + format_number(c.pts[1].y);
                break;
            case PathOp::Arc:
                d += "A " + format_number(c.rx) + ' ' + format_number(c.ry) + ' ' +
                     format_number(c.x_rotation_deg) + ' ' + std::to_string(c.large_arc) + ' ' +
                     std::to_string(c.sweep) + ' ' + format_number(c.pts[0].x) + ' ' +
                     format_number(c.pts[0].y);
                break;
            case PathOp::Close:
                d += "Z";
                break;
        }
    }
    return d;
}

std::string format_points(const std::vector<Vec2>& pts) {
    std::string out;
    for (const auto& p : pts) {
        if (!out.empty()) out += ' ';
        out += format_number(p.x) + ',' + format_number(p.y);
    }
    return out;
}

void append_element(std::string& out, const Element& el, int depth) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    out += indent;
    switch (el.kind) {
        case ElementKind::Path:
            out += "<path d=\"" + format_path_data(el.path) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Rect:
            out += "<rect x=\"" + format_number(el.origin.x) + "\" y=\"" +
                   format_number(el.origin.y) + "\" width=\"" + format_number(el.width) +
                   "\" height=\"" + format_number(el.height) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Circle:
            out += "<circle cx=\"" + format_number(el.center.x) + "\" cy=\"" +
                   format_number(el.center.y) + "\" r=\"" + format_number(el.rx) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Ellipse:
            out += "<ellipse cx=\"" + format_number(el.center.x) + "\" cy=\"" +
                   format_number(el.center.y) + "\" rx=\"" + format_number(el.rx) + "\" ry=\"" +
                   format_number(el.ry) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Polygon:
        case ElementKind::Polyline:
            out += el.kind == ElementKind::Polygon ? "<polygon points=\"" : "<polyline points=\"";
            out += format_points(el.points) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Line:
            out += "<line x1=\"" + format_number(el.points[0].x) + "\" y1=\"" +
                   format_number(el.points[0].y) + "\" x2=\"" + format_number(el.points[1].x) +
                   "\" y2=\"" + format_number(el.points[1].y) + "\"";
            append_style(out, el.style);
            out += "/>\n";
            break;
        case ElementKind::Group: {
            out += "<g";
            if (!el.transform.is_identity()) {
                const auto& t = el.transform;
                out += " transform=\"matrix(" + format_number(t.a) + ' ' + format_number(t.b) +
                       ' ' + format_number(t.c) + ' ' + format_number(t.d) + ' ' +
                       format_number(t.e) + ' ' + format_number(t.f) + ")\"";
            }
            append_style(out, el.style);
            out += ">\n";
            for (const auto& k : el.children) append_element(out, k, depth + 1);
            out += indent + "</g>\n";
            break;
        }
    }
}

}  // namespace

std::string serialize_svg(const SvgDocument& doc) {
    doc.validate();
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" +
                      format_number(doc.viewbox.min_x) + ' ' + format_number(doc.viewbox.min_y) +
                      ' ' + format_number(doc.viewbox.width) + ' ' +
                      format_number(doc.viewbox.height) + "\">\n";
    if (!doc.defs.empty()) {
        out += "  <defs>\n";
        for (const auto& d : doc.defs) {
            if (d.kind == GradientKind::Linear) {
                out += "    <linearGradient id=\"" + d.id +
                       "\" gradientUnits=\"userSpaceOnUse\" x1=\"" + format_number(d.p1.x) +
                       "\" y1=\"" + format_number(d.p1.y) + "\" x2=\"" + format_number(d.p2.x) +
                       "\" y2=\"" + format_number(d.p2.y) + "\">\n";
            } else {
                out += "    <radialGradient id=\"" + d.id +
                       "\" gradientUnits=\"userSpaceOnUse\" cx=\"" + format_number(d.p1.x) +
                       "\" cy=\"" + format_number(d.p1.y) + "\" r=\"" + format_number(d.radius) +
                       "\">\n";
            }
            for (const auto& s : d.stops) {
                out += "      <stop offset=\"" + format_number(s.offset) + "\" stop-color=\"" +
                       format_color(s.color) + "\"";
                if (s.opacity != 1.0) out += " stop-opacity=\"" + format_number(s.opacity) + "\"";
                out += "/>\n";
            }
            out += d.kind == GradientKind::Linear ? "    </linearGradient>\n"
                                                  : "    </radialGradient>\n";
        }
        out += "  </defs>\n";
    }
    for (const auto& el : doc.elements) append_element(out, el, 1);
    out += "</svg>\n";
    return out;
}

// ---------------------------------------------------------------------------
// transform baking

namespace detail {

namespace {

// Decomposes the 2x2 linear part M = R(phi) * diag(sx, sy) * R(psi) (SVD).
// Used to map an arc's radii/axis under an arbitrary affine.
struct LinearSvd {
    double phi_deg;  // left rotation
    double sx, sy;   // singular values, sx >= sy >= 0
};

LinearSvd svd2(double a, double b, double c, double d) {
    // M = [a c; b d]. Eigen-decompose M*M^T.
    const double e = a * a + c * c;
    const double f = a * b + c * d;
    const double g = b * b + d * d;
    const double tr = e + g;
    const double diff = e - g;
    const double root = std::sqrt(diff * diff + 4 * f * f);
    const double l1 = (tr + root) / 2;
    const double l2 = (tr - root) / 2;
    LinearSvd out;
    out.sx = std::sqrt(std::max(0.0, l1));
    out.sy = std::sqrt(std::max(0.0, l2));
    out.phi_deg = std::atan2(2 * f, diff) / 2 * 180.0 / 3.14159265358979323846;
    return out;
}

PathCommand bake_arc(const PathCommand& arc, const Transform& t) {
    PathCommand out = arc;
    out.pts[0] = t.apply(arc.pts[0]);
    if (t.det() < 0) out.sweep = 1 - out.sweep;
    if (t.b == 0.0 && t.c == 0.0 && t.a == 1.0 && t.d == 1.0) {
        return out;  // translation moves only the endpoint
    }
    if (t.is_conformal() && t.det() > 0) {
        const double s = std::sqrt(t.det());
        out.rx = arc.rx * s;
        out.ry = arc.ry * s;
        // axis rotates with the map
        out.x_rotation_deg =
            arc.x_rotation_deg + std::atan2(t.b, t.a) * 180.0 / 3.14159265358979323846;
        return out;
    }
    // General affine: the traced ellipse c + R(phi) diag(rx,ry) (cos,sin)
    // maps to another ellipse whose shape is the SVD of L * R(phi) diag(rx,ry).
    const double rad = arc.x_rotation_deg * 3.14159265358979323846 / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    // columns of R(phi) * diag(rx, ry)
    const double m00 = cs * arc.rx, m10 = sn * arc.rx;
    const double m01 = -sn * arc.ry, m11 = cs * arc.ry;
    // L * M with L = [t.a t.c; t.b t.d]
    const double n00 = t.a * m00 + t.c * m10;
    const double n10 = t.b * m00 + t.d * m10;
    const double n01 = t.a * m01 + t.c * m11;
    const double n11 = t.b * m01 + t.d * m11;
    LinearSvd svd = svd2(n00, n10, n01, n11);
    out.rx = svd.sx;
    out.ry = svd.sy;
    out.x_rotation_deg = svd.phi_deg;
    return out;
}

bool axis_preserving_positive(const Transform& t) {
    return t.b == 0.0 && t.c == 0.0 && t.a > 0.0 && t.d > 0.0;
}

}  // namespace

GradientDef bake_gradient(const GradientDef& def, const Transform& t, bool allow_radial_approx) {
    GradientDef out = def;
    if (def.kind == GradientKind::Linear) {
        // Level sets map as lines: keep t=0 anchored at the image of p1 and
        // rebuild p2 so the gradient parameter agrees with g(L^-1 q).
        out.p1 = t.apply(def.p1);
        const Vec2 d = def.p2 - def.p1;
        const Transform inv = t.inverse();
        // L^-T d (inverse-transpose acting on the level-set normal)
        const Vec2 n{inv.a * d.x + inv.b * d.y, inv.c * d.x + inv.d * d.y};
        const double nn = dot(n, n);
        if (nn == 0.0) {
            out.p2 = out.p1;
        } else {
            out.p2 = out.p1 + (dot(d, d) / nn) * n;
        }
        return out;
    }
    // radial
    if (!t.is_conformal()) {
        if (!allow_radial_approx) throw NonAffineBakeUnsupported();
        // Rendering approximates radials by their mean stop color, which any
        // affine leaves unchanged; keep a conformal-ish best effort.
    }
    out.p1 = t.apply(def.p1);
    out.radius = def.radius * std::sqrt(std::abs(t.det()));
    return out;
}

Element bake_element(const Element& el, const Transform& t, bool allow_radial_approx) {
    Element out = el;
    if (t.is_identity()) return out;
    if (el.style.stroke.kind != PaintKind::None)
        out.style.stroke_width = el.style.stroke_width * std::sqrt(std::abs(t.det()));
    switch (el.kind) {
        case ElementKind::Path:
            for (auto& c : out.path) {
                switch (c.op) {
                    case PathOp::Move:
                    case PathOp::Line:
                        c.pts[0] = t.apply(c.pts[0]);
                        break;
                    case PathOp::Cubic:
                        c.pts[0] = t.apply(c.pts[0]);
                        c.pts[1] = t.apply(c.pts[1]);
                        c.pts[2] = t.apply(c.pts[2]);
                        break;
                    case PathOp::Quad:
                        c.pts[0] = t.apply(c.pts[0]);
                        c.pts[1] = t.apply(c.pts[1]);
                        break;
                    case PathOp::Arc:
                        c = bake_arc(c, t);
                        break;
                    case PathOp::Close:
                        break;
                }
            }
            break;
        case ElementKind::Rect: {
            if (axis_preserving_positive(t)) {
                out.origin = t.apply(el.origin);
                out.width = el.width * t.a;
                out.height = el.height * t.d;
            } else {
                // corners in paint order stay a closed quadrilateral
                out = Element::make_polygon(
                    {t.apply(el.origin), t.apply(el.origin + Vec2{el.width, 0}),
                     t.apply(el.origin + Vec2{el.width, el.height}),
                     t.apply(el.origin + Vec2{0, el.height})},
                    out.style);
            }
            break;
        }
        case ElementKind::Circle:
        case ElementKind::Ellipse: {
            const double rx = el.rx;
            const double ry = el.kind == ElementKind::Circle ? el.rx : el.ry;
            if (t.is_conformal() && el.kind == ElementKind::Circle) {
                out.center = t.apply(el.center);
                out.rx = rx * std::sqrt(std::abs(t.det()));
            } else if (axis_preserving_positive(t)) {
                Element e = Element::make_ellipse(t.apply(el.center), rx * t.a, ry * t.d, out.style);
                if (el.kind == ElementKind::Circle && e.rx == e.ry) {
                    out = Element::make_circle(e.center, e.rx, out.style);
                } else {
                    out = e;
                }
            } else {
                // General map turns the ellipse into a rotated ellipse; emit an
                // exact two-arc path.
                Vec2 west = el.center - Vec2{rx, 0};
                Vec2 east = el.center + Vec2{rx, 0};
                PathCommand a1 = bake_arc(PathCommand::arc(rx, ry, 0, 0, 1, east), t);
                PathCommand a2 = bake_arc(PathCommand::arc(rx, ry, 0, 0, 1, west), t);
                out = Element::make_path(
                    {PathCommand::move(t.apply(west)), a1, a2, PathCommand::close()}, out.style);
            }
            break;
        }
        case ElementKind::Polygon:
        case ElementKind::Polyline:
        case ElementKind::Line:
            for (auto& p : out.points) p = t.apply(p);
            break;
        case ElementKind::Group:
            throw InvalidDocument("bake_element expects a leaf element");
    }
    return out;
}

}  // namespace detail

SvgDocument bake_transforms(const SvgDocument& doc) {
    doc.validate();
    SvgDocument out;
    out.viewbox = doc.viewbox;

    // Gradients shared by elements under different transforms need one baked
    // instance per distinct transform.
    std::map<std::pair<std::string, std::string>, std::string> baked_ids;
    auto transform_key = [](const Transform& t) {
        return format_number(t.a) + ',' + format_number(t.b) + ',' + format_number(t.c) + ',' +
               format_number(t.d) + ',' + format_number(t.e) + ',' + format_number(t.f);
    };
    auto bake_ref = [&](const std::string& id, const Transform& t) -> std::string {
        auto key = std::make_pair(id, transform_key(t));
        auto it = baked_ids.find(key);
        if (it != baked_ids.end()) return it->second;
        const GradientDef* def = doc.find_gradient(id);
        GradientDef baked = detail::bake_gradient(*def, t, /*allow_radial_approx=*/false);
        if (!t.is_identity()) baked.id = id + "_b" + std::to_string(baked_ids.size());
        out.defs.push_back(baked);
        baked_ids.emplace(std::move(key), baked.id);
        return out.defs.back().id;
    };

    auto walk = [&](auto&& self, const Element& el, const Transform& t) -> void {
        if (el.kind == ElementKind::Group) {
            const Transform combined = t * el.transform;
            for (const auto& k : el.children) self(self, k, combined);
            return;
        }
        Element baked = detail::bake_element(el, t, /*allow_radial_approx=*/false);
        if (baked.style.fill.kind == PaintKind::Gradient)
            baked.style.fill.gradient_id = bake_ref(el.style.fill.gradient_id, t);
        out.elements.push_back(std::move(baked));
    };
    for (const auto& el : doc.elements) walk(walk, el, Transform::identity());
    out.validate();
    return out;
}

}  // namespace svgtk
