#pragma once

#include "kcm/types.hpp"

namespace kcm {

/// Rodrigues rotation about a unit axis. The axis must be normalized to
/// within 1e-9 or a ValidationError is thrown.
Mat3 rotation_about_axis(const Vec3& axis, double angle);

}  // namespace kcm
