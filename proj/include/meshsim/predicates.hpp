#pragma once

#include "meshsim/vec2.hpp"

namespace meshsim::predicates {

/// Sign of twice the signed area of (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact: a floating-point filter with a
/// rigorous error bound falls back to rational arithmetic when unsure.
int orient2d(Vec2 a, Vec2 b, Vec2 c);

/// +1 if d lies strictly inside the circumcircle of the counter-clockwise
/// triangle (a, b, c), -1 if strictly outside, 0 if cocircular. Exact.
int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

}  // namespace meshsim::predicates
