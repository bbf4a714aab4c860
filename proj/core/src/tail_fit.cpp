#include "streamlab/tail_fit.hpp"

#include <algorithm>
#include <cmath>

#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab {

namespace {

constexpr std::size_t kMinSamples = 10'000;

std::uint64_t quantile(std::span<const std::uint64_t> sorted, double q) {
  const auto n = sorted.size();
  auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  idx = std::clamp<std::size_t>(idx, 1, n);
  return sorted[idx - 1];
}

std::pair<double, double> percentile_interval(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto pick = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
    return v[i];
  };
  return {pick(0.025), pick(0.975)};
}

std::vector<std::uint64_t> iota_grid(std::size_t n) {
  std::vector<std::uint64_t> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = i;
  return g;
}

}  // namespace

std::vector<double> empirical_survival(std::span<const std::uint64_t> samples) {
  if (samples.empty()) return {};
  const auto top = *std::max_element(samples.begin(), samples.end());
  std::vector<double> hist(top + 2, 0.0);
  for (auto t : samples) hist[t] += 1.0;
  std::vector<double> s(top + 1);
  double above = static_cast<double>(samples.size());
  for (std::uint64_t n = 0; n <= top; ++n) {
    above -= hist[n];
    s[n] = above / static_cast<double>(samples.size());
  }
  return s;
}

double fit_log_slope(std::span<const std::uint64_t> grid, std::span<const double> survival,
                     std::uint64_t n_lo, std::uint64_t n_hi, std::size_t* points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < n_lo || grid[i] > n_hi || !(survival[i] > 0.0)) continue;
    const double x = static_cast<double>(grid[i]);
    const double y = std::log(survival[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (points) *points = m;
  if (m < 2) return std::nan("");
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  if (denom <= 0) return std::nan("");
  return -(static_cast<double>(m) * sxy - sx * sy) / denom;
}

ExponentEstimate estimate_exponent(std::span<const std::uint64_t> samples, FitWindow window,
                                   std::uint64_t seed, int resamples) {
  if (samples.size() < kMinSamples) throw InvalidArgument("tail fit needs at least 10^4 samples");
  if (!(window.q_lo >= 0.0 && window.q_lo < window.q_hi && window.q_hi <= 1.0)) {
    throw InvalidArgument("bad quantile window");
  }
  std::vector<std::uint64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw InvalidArgument("degenerate samples: all equal");

  ExponentEstimate est;
  est.n_samples = samples.size();
  est.n_lo = quantile(sorted, window.q_lo);
  est.n_hi = quantile(sorted, window.q_hi);
  if (est.n_hi == est.n_lo) {
    // Heavy atom at one value: stretch to the next observed value.
    const auto next = std::upper_bound(sorted.begin(), sorted.end(), est.n_hi);
    if (next == sorted.end()) throw InvalidArgument("degenerate tail window");
    est.n_hi = *next;
  }
  const auto s = empirical_survival(samples);
  const auto grid = iota_grid(s.size());
  est.lambda = fit_log_slope(grid, s, est.n_lo, est.n_hi, &est.points);
  if (std::isnan(est.lambda)) throw InvalidArgument("tail window holds fewer than two points");

  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(resamples));
  std::vector<std::uint64_t> draw(samples.size());
  for (int b = 0; b < resamples; ++b) {
    const CounterRng rng(seed, stream_id(Stream::kBootstrap, static_cast<std::uint64_t>(b)));
    for (std::size_t i = 0; i < draw.size(); ++i) draw[i] = samples[rng.at(i) % samples.size()];
    const auto sb = empirical_survival(draw);
    const double lb = fit_log_slope(iota_grid(sb.size()), sb, est.n_lo, est.n_hi);
    if (!std::isnan(lb)) boot.push_back(lb);
  }
  if (boot.empty()) {
    est.ci_low = est.ci_high = est.lambda;
  } else {
    std::tie(est.ci_low, est.ci_high) = percentile_interval(std::move(boot));
  }
  return est;
}

std::vector<double> SurvivalCurve::values() const {
  std::vector<double> v(grid.size(), 0.0);
  std::uint64_t trials = 0;
  for (std::size_t b = 0; b < batch_sums.size(); ++b) {
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] += batch_sums[b][i];
    trials += batch_trials[b];
  }
  for (auto& x : v) x /= static_cast<double>(trials);
  return v;
}

ExponentEstimate estimate_exponent(const SurvivalCurve& curve, std::uint64_t n_lo,
                                   std::uint64_t n_hi, std::uint64_t seed, int resamples) {
  ExponentEstimate est;
  for (auto t : curve.batch_trials) est.n_samples += t;
  est.n_lo = n_lo;
  est.n_hi = n_hi;
  est.lambda = fit_log_slope(curve.grid, curve.values(), n_lo, n_hi, &est.points);
  if (std::isnan(est.lambda)) throw InvalidArgument("fit range holds fewer than two points");

  const std::size_t batches = curve.batch_sums.size();
  std::vector<double> boot;
  std::vector<double> v(curve.grid.size());
  for (int b = 0; b < resamples; ++b) {
    const CounterRng rng(seed, stream_id(Stream::kBootstrap, static_cast<std::uint64_t>(b)));
    std::fill(v.begin(), v.end(), 0.0);
    double trials = 0;
    for (std::size_t j = 0; j < batches; ++j) {
      const std::size_t pick = rng.at(j) % batches;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += curve.batch_sums[pick][i];
      trials += static_cast<double>(curve.batch_trials[pick]);
    }
    for (auto& x : v) x /= trials;
    const double lb = fit_log_slope(curve.grid, v, n_lo, n_hi);
    if (!std::isnan(lb)) boot.push_back(lb);
  }
  if (boot.empty()) {
    est.ci_low = est.ci_high = est.lambda;
  } else {
    std::tie(est.ci_low, est.ci_high) = percentile_interval(std::move(boot));
  }
  return est;
}

}  // namespace streamlab
