#include "beamsim/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace beamsim {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
  static std::map<std::pair<int, int>, PlanPair> cache;
  return cache;
}

PlanPair& get_plans(int nx, int ny) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find({nx, ny});
  if (it != cache.end()) return it->second;

  // Plan on scratch storage; execution uses fftw_execute_dft on caller data.
  // FFTW_UNALIGNED lets plans run on std::vector storage of any alignment.
  fftw_complex* scratch = fftw_alloc_complex(static_cast<size_t>(nx) * ny);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(nx, ny, scratch, scratch, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_2d(nx, ny, scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
  return cache.emplace(std::make_pair(nx, ny), p).first->second;
}

}  // namespace

void fft2(std::complex<double>* data, int nx, int ny) {
  auto& p = get_plans(nx, ny);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

void ifft2(std::complex<double>* data, int nx, int ny) {
  auto& p = get_plans(nx, ny);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
  const double scale = 1.0 / (static_cast<double>(nx) * ny);
  const size_t n = static_cast<size_t>(nx) * ny;
  for (size_t i = 0; i < n; ++i) data[i] *= scale;
}

void fft2(std::vector<std::complex<double>>& data, int nx, int ny) {
  fft2(data.data(), nx, ny);
}

void ifft2(std::vector<std::complex<double>>& data, int nx, int ny) {
  ifft2(data.data(), nx, ny);
}

}  // namespace beamsim
