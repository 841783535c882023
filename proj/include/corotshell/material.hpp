#pragma once

#include <cmath>
#include <string>

#include "corotshell/errors.hpp"

namespace corotshell {

/// Isotropic thin-sheet material with plane-stress moduli.
struct Material {
  double youngs = 0.0;
  double poisson = 0.0;
  double thickness = 0.0;
  double density = 0.0;

  double mu = 0.0;
  double lambda_ps = 0.0;  // E nu / (1 - nu^2), not the 3D Lame lambda
  double flexural = 0.0;   // E h^3 / (12 (1 - nu^2))

  // Hinge stiffness k_b = bend_scale * flexural. 1/6 makes a hinge field on a
  // regular mesh reproduce (flexural / 2) * kappa^2 under cylindrical bending.
  double bend_scale = 1.0 / 6.0;

  double hinge_stiffness() const { return bend_scale * flexural; }
};

/// Validates the parameters and fills in the derived moduli.
inline Material derive_moduli(double youngs, double poisson, double thickness, double density,
                              double bend_scale = 1.0 / 6.0) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::OutOfRangeParameter, what);
  };
  check(std::isfinite(youngs) && youngs > 0.0, "Young's modulus must be positive");
  check(std::isfinite(poisson) && poisson > -1.0 && poisson < 0.5, "Poisson ratio must lie in (-1, 0.5)");
  check(std::isfinite(thickness) && thickness > 0.0, "thickness must be positive");
  check(std::isfinite(density) && density > 0.0, "density must be positive");
  check(std::isfinite(bend_scale) && bend_scale >= 0.0, "bend_scale must be non-negative");

  Material m;
  m.youngs = youngs;
  m.poisson = poisson;
  m.thickness = thickness;
  m.density = density;
  m.bend_scale = bend_scale;
  m.mu = youngs / (2.0 * (1.0 + poisson));
  m.lambda_ps = youngs * poisson / (1.0 - poisson * poisson);
  m.flexural = youngs * thickness * thickness * thickness / (12.0 * (1.0 - poisson * poisson));
  return m;
}

}  // namespace corotshell
