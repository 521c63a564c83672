#pragma once

#include <cstddef>
#include <vector>

#include "lplab/errors.hpp"
#include "lplab/grid.hpp"

namespace lplab {

// Four-point Lagrange interpolation on a uniform time mesh t0 + k*dt. The
// window shifts to one-sided at the ends, keeping cubic order throughout.
struct CubicWeights {
  std::size_t base = 0;
  double w[4] = {0.0, 0.0, 0.0, 0.0};
};

inline CubicWeights cubic_weights(double t, double t0, double dt, std::size_t n) {
  require(n >= 4, ErrorCode::InsufficientSamples, "cubic interpolation needs four mesh points");
  double u = (t - t0) / dt;
  if (u < 0.0) u = 0.0;
  const double top = static_cast<double>(n - 1);
  if (u > top) u = top;
  auto k = static_cast<std::size_t>(u);
  std::size_t base = (k == 0) ? 0 : k - 1;
  if (base + 3 > n - 1) base = n - 4;
  const double x = u - static_cast<double>(base);
  CubicWeights cw;
  cw.base = base;
  for (int j = 0; j < 4; ++j) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != j) w *= (x - m) / static_cast<double>(j - m);
    cw.w[j] = w;
  }
  return cw;
}

inline double cubic_eval(const std::vector<double>& series, const CubicWeights& cw) {
  return cw.w[0] * series[cw.base] + cw.w[1] * series[cw.base + 1] +
         cw.w[2] * series[cw.base + 2] + cw.w[3] * series[cw.base + 3];
}

inline void cubic_eval(const std::vector<RealField>& series, const CubicWeights& cw,
                       RealField& out) {
  const RealField& a = series[cw.base];
  const RealField& b = series[cw.base + 1];
  const RealField& c = series[cw.base + 2];
  const RealField& d = series[cw.base + 3];
  out.grid = a.grid;
  out.v.resize(a.v.size());
  for (std::size_t j = 0; j < a.v.size(); ++j)
    out.v[j] = cw.w[0] * a.v[j] + cw.w[1] * b.v[j] + cw.w[2] * c.v[j] + cw.w[3] * d.v[j];
}

}  // namespace lplab
