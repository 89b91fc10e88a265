#pragma once

#include <cmath>

namespace svgtk {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(Vec2 a, Vec2 b) { return length(a - b); }

/// 2x3 affine matrix in SVG order: x' = a*x + c*y + e, y' = b*x + d*y + f.
struct Transform {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0, e = 0.0, f = 0.0;

    static Transform identity() { return {}; }
    static Transform translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
    static Transform scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
    static Transform rotate_deg(double deg) {
        const double r = deg * 3.14159265358979323846 / 180.0;
        const double cs = std::cos(r), sn = std::sin(r);
        return {cs, sn, -sn, cs, 0, 0};
    }
    static Transform rotate_deg_about(double deg, Vec2 p) {
        return translate(p.x, p.y) * rotate_deg(deg) * translate(-p.x, -p.y);
    }

    Vec2 apply(Vec2 p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
    // Direction vectors ignore translation.
    Vec2 apply_dir(Vec2 p) const { return {a * p.x + c * p.y, b * p.x + d * p.y}; }

    // this * rhs applies rhs first.
    friend Transform operator*(const Transform& m, const Transform& n) {
        return {m.a * n.a + m.c * n.b,
                m.b * n.a + m.d * n.b,
                m.a * n.c + m.c * n.d,
                m.b * n.c + m.d * n.d,
                m.a * n.e + m.c * n.f + m.e,
                m.b * n.e + m.d * n.f + m.f};
    }

    double det() const { return a * d - b * c; }

    Transform inverse() const {
        const double id = 1.0 / det();
        return {d * id, -b * id, -c * id, a * id,
                (c * f - d * e) * id, (b * e - a * f) * id};
    }

    bool is_identity() const {
        return a == 1.0 && b == 0.0 && c == 0.0 && d == 1.0 && e == 0.0 && f == 0.0;
    }

    /// True when the linear part is a uniform scale times a rotation (no shear,
    /// no anisotropy). Radial gradients survive such maps exactly.
    bool is_conformal(double eps = 1e-9) const {
        const double n1 = a * a + b * b;
        const double n2 = c * c + d * d;
        return std::abs(n1 - n2) <= eps * (n1 + n2 + eps) && std::abs(a * c + b * d) <= eps * (n1 + n2 + eps);
    }

    friend bool operator==(const Transform&, const Transform&) = default;
};

}  // namespace svgtk
