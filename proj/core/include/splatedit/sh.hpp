#pragma once

#include "splatedit/math.hpp"

#include <array>

namespace splatedit {

/// Real spherical-harmonic basis up to degree 3 in the ordering used by the
/// reference Gaussian splatting code, evaluated at a unit direction.
/// `gradient[k]` receives d basis[k] / d direction when non-null.
void sh_basis(int degree, const Vec3d& dir, std::array<double, 16>& basis,
              std::array<Vec3d, 16>* gradient = nullptr);

}  // namespace splatedit
