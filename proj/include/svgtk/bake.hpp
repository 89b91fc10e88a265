#pragma once

#include "svgtk/svg_model.hpp"

namespace svgtk {

// Internals shared by bake_transforms and the rasterizer. Routing both through
// the same geometry math is what makes render(bake_transforms(d)) bit-identical
// to render(d).
namespace detail {

/// Applies an affine to one non-group element's geometry. Rects become
/// Polygons and Ellipses/Circles become arc Paths when the map is not
/// axis-preserving. When `allow_radial_approx` is false, a radial-gradient
/// fill under a non-conformal map throws NonAffineBakeUnsupported.
Element bake_element(const Element& el, const Transform& t, bool allow_radial_approx);

/// Transforms gradient geometry. Linear gradients map exactly under any
/// affine; radial gradients require a conformal map unless the caller
/// tolerates the mean-color approximation.
GradientDef bake_gradient(const GradientDef& def, const Transform& t, bool allow_radial_approx);

}  // namespace detail

}  // namespace svgtk
