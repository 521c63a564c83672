#include "lplab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "lplab/fft.hpp"

namespace lplab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPowerOfTwo: return "NonPowerOfTwo";
    case ErrorCode::NoNegativeEigenvalue: return "NoNegativeEigenvalue";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PotentialNotLocalized: return "PotentialNotLocalized";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

double Grid::wavenumber(std::size_t m) const {
  const std::size_t n = size;
  const double signed_index =
      (m < n / 2) ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
  return M_PI * signed_index / half_width;
}

Grid make_grid(double half_width, std::size_t size) {
  require(half_width > 0.0, ErrorCode::InvalidArgument, "grid half-width must be positive");
  require(size >= 256, ErrorCode::InvalidArgument, "grid needs at least 256 points");
  require((size & (size - 1)) == 0, ErrorCode::NonPowerOfTwo, "grid size must be a power of two");
  return Grid{half_width, size, 2.0 * half_width / static_cast<double>(size)};
}

RealField make_real_field(const Grid& g, const std::function<double(double)>& f) {
  RealField out{g, std::vector<double>(g.size)};
  for (std::size_t j = 0; j < g.size; ++j) out.v[j] = f(g.node(j));
  return out;
}

Field make_field(const Grid& g, const std::function<Complex(double)>& f) {
  Field out{g, std::vector<Complex>(g.size)};
  for (std::size_t j = 0; j < g.size; ++j) out.v[j] = f(g.node(j));
  return out;
}

Field to_complex(const RealField& f) {
  Field out{f.grid, std::vector<Complex>(f.v.size())};
  std::copy(f.v.begin(), f.v.end(), out.v.begin());
  return out;
}

RealField real_part(const Field& f) {
  RealField out{f.grid, std::vector<double>(f.v.size())};
  for (std::size_t j = 0; j < f.v.size(); ++j) out.v[j] = f.v[j].real();
  return out;
}

namespace {

inline double weight_at(double x, int k) {
  if (k == 0) return 1.0;
  return std::pow(1.0 + x * x, 0.5 * k);
}

template <typename T>
double norm_impl(const Grid& g, const std::vector<T>& v, NormKind kind) {
  const int k = kind.weight_power;
  switch (kind.base) {
    case NormBase::L1: {
      double s = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) s += weight_at(g.node(j), k) * std::abs(v[j]);
      return g.spacing * s;
    }
    case NormBase::L2: {
      double s = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        const double w = weight_at(g.node(j), k);
        s += w * w * std::norm(Complex(v[j]));
      }
      return std::sqrt(g.spacing * s);
    }
    case NormBase::Linf: {
      double m = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j)
        m = std::max(m, weight_at(g.node(j), k) * std::abs(v[j]));
      return m;
    }
  }
  return 0.0;
}

}  // namespace

double norm(const Field& f, NormKind kind) { return norm_impl(f.grid, f.v, kind); }
double norm(const RealField& f, NormKind kind) { return norm_impl(f.grid, f.v, kind); }

Complex inner(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "inner");
  Complex s = 0.0;
  for (std::size_t j = 0; j < a.v.size(); ++j) s += std::conj(a.v[j]) * b.v[j];
  return a.grid.spacing * s;
}

double inner(const RealField& a, const RealField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  double s = 0.0;
  for (std::size_t j = 0; j < a.v.size(); ++j) s += a.v[j] * b.v[j];
  return a.grid.spacing * s;
}

Field spectral_derivative(const Field& f, int order) {
  require(order >= 1, ErrorCode::InvalidArgument, "derivative order must be >= 1");
  const std::size_t n = f.grid.size;
  std::vector<Complex> hat(n);
  fft::forward(f.v, hat);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = f.grid.wavenumber(m);
    Complex mult = std::pow(Complex(0.0, k), order);
    // The Nyquist bin has no well-defined sign for odd derivatives.
    if (order % 2 == 1 && m == n / 2) mult = 0.0;
    hat[m] *= mult / static_cast<double>(n);
  }
  Field out{f.grid, std::vector<Complex>(n)};
  fft::inverse(hat, out.v);
  return out;
}

RealField spectral_derivative(const RealField& f, int order) {
  return real_part(spectral_derivative(to_complex(f), order));
}

Field oversample(const Field& f, std::size_t factor) {
  require(factor >= 1 && (factor & (factor - 1)) == 0, ErrorCode::InvalidArgument,
          "oversample factor must be a power of two");
  if (factor == 1) return f;
  const std::size_t n = f.grid.size;
  const std::size_t nn = n * factor;
  std::vector<Complex> hat(n), padded(nn, Complex(0.0));
  fft::forward(f.v, hat);
  const std::size_t half = n / 2;
  for (std::size_t m = 0; m < half; ++m) padded[m] = hat[m];
  for (std::size_t m = half; m < n; ++m) padded[nn - n + m] = hat[m];
  // Split the Nyquist bin symmetrically to keep real data real.
  padded[half] = 0.5 * hat[half];
  padded[nn - half] = 0.5 * hat[half];
  Field out{Grid{f.grid.half_width, nn, 2.0 * f.grid.half_width / static_cast<double>(nn)},
            std::vector<Complex>(nn)};
  fft::inverse(padded, out.v);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& z : out.v) z *= scale;
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  require(a == b, ErrorCode::InvalidArgument, std::string(where) + ": fields live on different grids");
}

bool all_finite(const Field& f) {
  for (const auto& z : f.v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

bool all_finite(const RealField& f) {
  for (double x : f.v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace lplab
