#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace streamlab {

struct FitWindow {
  double q_lo = 0.5;
  double q_hi = 0.99;
};

struct ExponentEstimate {
  double lambda = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t n_lo = 0;  // fitted n range
  std::uint64_t n_hi = 0;
  std::size_t points = 0;

  double ci_halfwidth() const { return 0.5 * (ci_high - ci_low); }
};

// S(n) = #{T > n} / N for n = 0 .. max(T).
std::vector<double> empirical_survival(std::span<const std::uint64_t> samples);

// Least-squares slope of ln S(n) against n over grid points in [n_lo, n_hi]
// with S(n) > 0. Returns -slope.
double fit_log_slope(std::span<const std::uint64_t> grid, std::span<const double> survival,
                     std::uint64_t n_lo, std::uint64_t n_hi, std::size_t* points = nullptr);

// Tail fit of i.i.d. samples between the window quantiles, with a
// percentile bootstrap over resampled samples.
ExponentEstimate estimate_exponent(std::span<const std::uint64_t> samples, FitWindow window = {},
                                   std::uint64_t seed = 1, int resamples = 200);

// Survival estimate on a grid, accumulated in independent batches.
struct SurvivalCurve {
  std::vector<std::uint64_t> grid;
  std::vector<std::vector<double>> batch_sums;  // [batch][grid point]
  std::vector<std::uint64_t> batch_trials;

  std::vector<double> values() const;
};

// Fit over an explicit n range; bootstrap resamples whole batches.
ExponentEstimate estimate_exponent(const SurvivalCurve& curve, std::uint64_t n_lo,
                                   std::uint64_t n_hi, std::uint64_t seed = 1,
                                   int resamples = 200);

}  // namespace streamlab
