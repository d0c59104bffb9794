#include "gplab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "gplab/errors.hpp"

namespace gplab {

struct FftPlan::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  // FFTW planning is not thread safe.
  static std::recursive_mutex& mutex() {
    static std::recursive_mutex m;
    return m;
  }
};

namespace {

using PlanKey = std::tuple<std::vector<int>, int, long>;

std::shared_ptr<const FftPlan::Plans> lookup(const PlanKey& key);

}  // namespace

FftPlan::FftPlan(std::vector<int> dims, int batch, long distance)
    : dims_(std::move(dims)), batch_(batch), size_(1), distance_(distance) {
  if (dims_.empty() || batch_ < 1) throw ConfigError("FftPlan: empty transform");
  for (int d : dims_) {
    if (d < 1) throw ConfigError("FftPlan: non-positive dimension");
    size_ *= d;
  }
  if (distance_ == 0) distance_ = size_;
  plans_ = lookup({dims_, batch_, distance_});
}

void FftPlan::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->forward, p, p);
}

void FftPlan::inverse(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->backward, p, p);
  const double scale = 1.0 / static_cast<double>(size_);
  for (int b = 0; b < batch_; ++b) {
    std::complex<double>* block = data + static_cast<long>(b) * distance_;
    for (long i = 0; i < size_; ++i) block[i] *= scale;
  }
}

std::vector<double> wavenumbers(int points, double box_length) {
  std::vector<double> k(static_cast<std::size_t>(points));
  const double dk = 2.0 * std::numbers::pi / box_length;
  for (int j = 0; j < points; ++j) {
    const int n = j < points / 2 ? j : j - points;
    k[static_cast<std::size_t>(j)] = dk * n;
  }
  return k;
}

namespace {

std::shared_ptr<const FftPlan::Plans> make_plans(const PlanKey& key) {
  const auto& [dims, batch, distance] = key;
  long size = 1;
  for (int d : dims) size *= d;
  const long total = distance * (batch - 1) + size;
  auto plans = std::make_shared<FftPlan::Plans>();
  fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(total));
  if (!scratch) throw ConfigError("FftPlan: allocation failed");
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int rank = static_cast<int>(dims.size());
  plans->forward = fftw_plan_many_dft(rank, dims.data(), batch, scratch, nullptr, 1,
                                      static_cast<int>(distance), scratch, nullptr, 1,
                                      static_cast<int>(distance), FFTW_FORWARD, flags);
  plans->backward = fftw_plan_many_dft(rank, dims.data(), batch, scratch, nullptr, 1,
                                       static_cast<int>(distance), scratch, nullptr, 1,
                                       static_cast<int>(distance), FFTW_BACKWARD, flags);
  fftw_free(scratch);
  if (!plans->forward || !plans->backward) throw ConfigError("FftPlan: FFTW planning failed");
  return plans;
}

std::shared_ptr<const FftPlan::Plans> lookup(const PlanKey& key) {
  static std::map<PlanKey, std::weak_ptr<const FftPlan::Plans>> cache;
  static std::mutex cache_mutex;
  std::lock_guard cache_lock(cache_mutex);
  if (auto it = cache.find(key); it != cache.end()) {
    if (auto alive = it->second.lock()) return alive;
  }
  std::shared_ptr<const FftPlan::Plans> plans;
  {
    std::lock_guard lock(FftPlan::Plans::mutex());
    plans = make_plans(key);
  }
  cache[key] = plans;
  return plans;
}

}  // namespace
}  // namespace gplab
