#pragma once

#include <cstdint>
#include <optional>

namespace slowdos {

/// Welford accumulator over a stream of doubles.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const { return n_; }
  double m2() const { return m2_; }

  std::optional<double> mean() const {
    if (n_ == 0) return std::nullopt;
    return mean_;
  }

  /// Population variance M2/n; needs at least two samples.
  std::optional<double> variance() const {
    if (n_ < 2) return std::nullopt;
    return m2_ / static_cast<double>(n_);
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace slowdos
