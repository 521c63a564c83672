#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "lplab/errors.hpp"

namespace lplab {

using Complex = std::complex<double>;

// Uniform periodic grid on [-L, L): x_j = -L + j*h, h = 2L/N, N a power of two.
struct Grid {
  double half_width = 0.0;
  std::size_t size = 0;
  double spacing = 0.0;

  double node(std::size_t j) const { return -half_width + spacing * static_cast<double>(j); }
  // Spectral wavenumber of FFT bin m (m in [0, N)), mapped to [-N/2, N/2).
  double wavenumber(std::size_t m) const;

  bool operator==(const Grid&) const = default;
};

Grid make_grid(double half_width, std::size_t size);

struct RealField {
  Grid grid;
  std::vector<double> v;
};

struct Field {
  Grid grid;
  std::vector<Complex> v;
};

RealField make_real_field(const Grid& g, const std::function<double(double)>& f);
Field make_field(const Grid& g, const std::function<Complex(double)>& f);
Field to_complex(const RealField& f);
RealField real_part(const Field& f);

enum class NormBase { L1, L2, Linf };

// Weighted norm: weight <x>^k with <x> = sqrt(1 + x^2).
//   L1   = h * sum <x>^k |f|
//   L2   = sqrt(h * sum <x>^{2k} |f|^2)
//   Linf = max <x>^k |f|
struct NormKind {
  NormBase base = NormBase::L2;
  int weight_power = 0;
};

double norm(const Field& f, NormKind kind = {});
double norm(const RealField& f, NormKind kind = {});

Complex inner(const Field& a, const Field& b);  // h * sum conj(a) b
double inner(const RealField& a, const RealField& b);

Field spectral_derivative(const Field& f, int order);
RealField spectral_derivative(const RealField& f, int order);

// Zero-padded spectral interpolation onto a grid refined by `factor`.
Field oversample(const Field& f, std::size_t factor);

void require_same_grid(const Grid& a, const Grid& b, const char* where);
bool all_finite(const Field& f);
bool all_finite(const RealField& f);

}  // namespace lplab
