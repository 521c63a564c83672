#include "lplab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "lplab/errors.hpp"

namespace lplab::fft {
namespace {

// The FFTW planner is not thread-safe; executing distinct plans is.
std::mutex planner_mutex;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  std::size_t n = 0;

  explicit PlanPair(std::size_t size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex);
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    fwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;

  ~PlanPair() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (in) fftw_free(in);
    if (out) fftw_free(out);
  }
};

PlanPair& plans_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<PlanPair>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<PlanPair>(n)).first;
  return *it->second;
}

void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
             bool forward_dir) {
  require(in.size() == out.size() && !in.empty(), ErrorCode::InvalidArgument,
          "fft: input/output size mismatch");
  PlanPair& p = plans_for(in.size());
  // std::complex<double> is layout-compatible with fftw_complex.
  std::memcpy(static_cast<void*>(p.in), static_cast<const void*>(in.data()),
              in.size() * sizeof(fftw_complex));
  fftw_execute_dft(forward_dir ? p.fwd : p.bwd, p.in, p.out);
  std::memcpy(static_cast<void*>(out.data()), static_cast<const void*>(p.out),
              out.size() * sizeof(fftw_complex));
}

}  // namespace

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  execute(in, out, true);
}

void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  execute(in, out, false);
}

}  // namespace lplab::fft
