#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace gplab {

/// Batched, in-place multi-dimensional DFT over row-major complex arrays.
///
/// Forward transforms are unnormalized; the inverse carries 1/M per axis, so
/// inverse(forward(x)) == x. Each batch member is a contiguous block of
/// prod(dims) elements, successive members `distance` elements apart.
/// Plans are created with FFTW_ESTIMATE so results are reproducible bit-for-bit.
class FftPlan {
 public:
  explicit FftPlan(std::vector<int> dims, int batch = 1, long distance = 0);

  void forward(std::complex<double>* data) const;
  void inverse(std::complex<double>* data) const;

  const std::vector<int>& dims() const noexcept { return dims_; }
  long size() const noexcept { return size_; }
  int batch() const noexcept { return batch_; }

  struct Plans;

 private:
  std::vector<int> dims_;
  int batch_;
  long size_;
  long distance_;
  std::shared_ptr<const Plans> plans_;
};

/// Angular wavenumbers of an M-point periodic grid of length L in FFT order.
std::vector<double> wavenumbers(int points, double box_length);

}  // namespace gplab
