#include "kcm/rotation.hpp"

#include <cmath>

namespace kcm {

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (std::abs(n - 1.0) > 1e-9 || !std::isfinite(angle)) {
    throw ValidationError("rotation_about_axis: axis must be a unit vector "
                          "(|axis| = " + std::to_string(n) + ")");
  }
  Mat3 k;
  k << 0.0, -axis.z(), axis.y(),
       axis.z(), 0.0, -axis.x(),
       -axis.y(), axis.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

}  // namespace kcm
