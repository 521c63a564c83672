#include "lplab/presets.hpp"

#include <cmath>

#include "lplab/spectral.hpp"

namespace lplab {

RealField sech_well(const Grid& g, double depth, double center) {
  return make_real_field(g, [depth, center](double x) {
    const double c = std::cosh(x - center);
    return -depth / (c * c);
  });
}

RealField odd_gaussian_velocity(const Grid& g, double amplitude) {
  return make_real_field(g, [amplitude](double x) { return amplitude * x * std::exp(-x * x); });
}

RealField lorentzian_bump(const Grid& g) {
  RealField f = make_real_field(g, [](double x) {
    const double r = 1.0 + x * x;
    return 1.0 / (r * r);
  });
  const double n = norm(f, {NormBase::L2, 0});
  for (auto& x : f.v) x /= n;
  return f;
}

Field gaussian_packet(const Grid& g) {
  return make_field(g, [](double x) { return Complex(std::exp(-0.5 * x * x), 0.0); });
}

PolaronState standard_polaron_state(const Grid& g, double depth, double phi_dot_amplitude,
                                    double mass) {
  PolaronState s;
  s.time = 0.0;
  s.phi = sech_well(g, depth);
  s.phi_dot = odd_gaussian_velocity(g, phi_dot_amplitude);
  s.psi = to_complex(ground_state(s.phi, mass).wavefunction);
  return s;
}

}  // namespace lplab
