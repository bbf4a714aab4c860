#include "streamlab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "streamlab/decoder.hpp"
#include "streamlab/errors.hpp"

namespace streamlab {

namespace {

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0,1)");
}

double xlogy_ratio(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); }

// Takes the failure probability 1 - p_d, summed directly over the failing
// patterns so that lambda keeps full precision when p_d is close to 1.
BlockEvaluation finish_block(double p_fail, double expected_innovative, int d) {
  BlockEvaluation out;
  out.p_d = 1.0 - p_fail;
  out.expected_innovative = expected_innovative;
  out.point.tau = expected_innovative / d;
  out.point.lambda = -std::log(p_fail) / d;
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double binary_divergence(double r, double p) {
  if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("rate must lie in [0,1)");
  require_probability(p);
  return xlogy_ratio(r, p) + xlogy_ratio(1.0 - r, 1.0 - p);
}

TradeoffPoint arq_tradeoff(double p) {
  require_probability(p);
  return {p, -std::log1p(-p)};
}

NoFeedbackResult no_feedback_tradeoff(double r, double p) {
  require_probability(p);
  if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("rate must lie in [0,1)");
  if (r >= p) return {{r, 0.0}, true};
  return {{r, binary_divergence(r, p)}, false};
}

BlockEvaluation block_scheme_tradeoff(const SchemeVector& x, double p) {
  require_probability(p);
  const int d = x.block_length();
  if (d > 24) throw InvalidArgument("block length beyond enumeration bound");

  std::vector<int> groups;  // widths with x_w > 0
  for (int w = 1; w <= d; ++w) {
    if (x[w] > 0) groups.push_back(w);
  }
  std::vector<int> counts(groups.size(), 0);
  double fail = 0.0, es = 0.0;
  std::vector<int> widths;

  auto visit = [&](auto&& self, std::size_t g, double prob) -> void {
    if (g == groups.size()) {
      widths.clear();
      for (std::size_t i = 0; i < groups.size(); ++i) {
        widths.insert(widths.end(), static_cast<std::size_t>(counts[i]), groups[i]);
      }
      if (prefix_decodable_count(widths) == 0) fail += prob;
      es += prob * prefix_rank(widths);
      return;
    }
    const int n = x[groups[g]];
    for (int k = 0; k <= n; ++k) {
      counts[g] = k;
      self(self, g + 1, prob * binomial(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k));
    }
  };
  visit(visit, 0, 1.0);
  return finish_block(fail, es, d);
}

BlockEvaluation block_scheme_tradeoff_exhaustive(const SchemeVector& x, double p) {
  require_probability(p);
  const int d = x.block_length();
  if (d > 24) throw InvalidArgument("block length beyond enumeration bound");
  const std::vector<int> order = x.widths();
  double fail = 0.0, es = 0.0;
  std::vector<int> received;
  for (std::uint32_t mask = 0; mask < (1U << d); ++mask) {
    received.clear();
    double prob = 1.0;
    for (int t = 0; t < d; ++t) {
      if (mask >> t & 1U) {
        prob *= p;
        received.push_back(order[static_cast<std::size_t>(t)]);
      } else {
        prob *= 1.0 - p;
      }
    }
    // Transmission order is ascending, so `received` is already sorted.
    if (prefix_decodable_count(received) == 0) fail += prob;
    es += prob * prefix_rank(received);
  }
  return finish_block(fail, es, d);
}

SchemeVector proposed_code_scheme(int a, int d) {
  if (d < 1 || a < 1 || a > d) throw InvalidArgument("need 1 <= a <= d");
  std::vector<int> parts(static_cast<std::size_t>(d), 0);
  parts[0] = a;
  parts[static_cast<std::size_t>(d - a)] += d - a;
  return SchemeVector(std::move(parts));
}

TradeoffPoint proposed_code_tradeoff(int a, int d, double p) {
  require_probability(p);
  if (d < 1 || a < 1 || a > d) throw InvalidArgument("need 1 <= a <= d");
  const double tau = (1.0 - std::pow(1.0 - p, a) + (d - a) * p) / d;
  const double lambda = -static_cast<double>(a) / d * std::log1p(-p);
  return {tau, lambda};
}

TradeoffPoint mixture_tradeoff(std::span<const MixtureComponent> components, double p) {
  if (components.empty()) throw InvalidArgument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& [x, w] : components) {
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
  TradeoffPoint out;
  for (const auto& [x, w] : components) {
    if (w == 0.0) continue;
    const auto e = block_scheme_tradeoff(x, p);
    out.tau += w * e.point.tau;
    out.lambda += w * e.point.lambda;
  }
  return out;
}

std::vector<std::size_t> upper_hull(std::span<const TradeoffPoint> points) {
  if (points.empty()) throw InvalidArgument("hull of no points");
  constexpr double kTie = 1e-12;
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (points[i].tau != points[j].tau) return points[i].tau < points[j].tau;
    return points[i].lambda > points[j].lambda;
  });
  // Collapse equal tau to the best lambda; drop near-duplicates.
  std::vector<std::size_t> cand;
  for (std::size_t i : order) {
    if (!cand.empty() && std::abs(points[cand.back()].tau - points[i].tau) <= kTie) {
      continue;
    }
    cand.push_back(i);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i : cand) top = std::max(top, points[i].lambda);
  std::size_t start = 0;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (points[cand[k]].lambda >= top - kTie) start = k;
  }
  std::vector<std::size_t> hull;
  for (std::size_t k = start; k < cand.size(); ++k) {
    const auto& c = points[cand[k]];
    while (hull.size() >= 2) {
      const auto& o = points[hull[hull.size() - 2]];
      const auto& a = points[hull.back()];
      const double cross = (a.tau - o.tau) * (c.lambda - o.lambda) -
                           (a.lambda - o.lambda) * (c.tau - o.tau);
      if (cross >= -kTie) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(cand[k]);
  }
  return hull;
}

double hull_lambda_at(std::span<const TradeoffPoint> points, std::span<const std::size_t> hull,
                      double tau) {
  const auto& first = points[hull.front()];
  if (tau <= first.tau) return first.lambda;
  for (std::size_t k = 1; k < hull.size(); ++k) {
    const auto& l = points[hull[k - 1]];
    const auto& r = points[hull[k]];
    if (tau <= r.tau) return l.lambda + (r.lambda - l.lambda) * (tau - l.tau) / (r.tau - l.tau);
  }
  const auto& last = points[hull.back()];
  if (tau <= last.tau + 1e-12) return last.lambda;
  return -std::numeric_limits<double>::infinity();
}

namespace {

HullCheck check_block_length(int d, double p) {
  constexpr double kTol = 1e-12;
  HullCheck check;
  check.d = d;
  check.schemes = enumerate_schemes(d);
  for (const auto& x : check.schemes) check.points.push_back(block_scheme_tradeoff(x, p).point);
  check.hull = upper_hull(check.points);

  std::vector<SchemeVector> family;
  for (int a = 1; a <= d; ++a) family.push_back(canonicalize_scheme(proposed_code_scheme(a, d)));
  std::vector<SchemeVector> on_hull;
  for (std::size_t i : check.hull) on_hull.push_back(check.schemes[i]);
  std::sort(family.begin(), family.end());
  family.erase(std::unique(family.begin(), family.end()), family.end());
  std::sort(on_hull.begin(), on_hull.end());
  check.family_spans_hull = family == on_hull;

  check.others_strictly_below = true;
  for (std::size_t i = 0; i < check.schemes.size(); ++i) {
    if (std::binary_search(family.begin(), family.end(), check.schemes[i])) continue;
    const double env = hull_lambda_at(check.points, check.hull, check.points[i].tau);
    if (!(check.points[i].lambda < env - kTol)) check.others_strictly_below = false;
  }

  check.raw_compositions_dominated = true;
  for (const auto& x : all_compositions(d)) {
    const auto pt = block_scheme_tradeoff(x, p).point;
    if (pt.lambda > hull_lambda_at(check.points, check.hull, pt.tau) + kTol) {
      check.raw_compositions_dominated = false;
    }
  }
  return check;
}

}  // namespace

OptimalityReport verify_d23_optimality(double p) {
  require_probability(p);
  OptimalityReport report;
  report.p = p;
  report.passed = true;
  for (int d : {2, 3}) {
    auto check = check_block_length(d, p);
    if (!check.family_spans_hull) {
      report.passed = false;
      report.notes.push_back("d=" + std::to_string(d) + ": hull differs from the a-family");
    }
    if (!check.others_strictly_below) {
      report.passed = false;
      report.notes.push_back("d=" + std::to_string(d) + ": a non-family scheme touches the hull");
    }
    if (!check.raw_compositions_dominated) {
      report.passed = false;
      report.notes.push_back("d=" + std::to_string(d) + ": a composition lies above the hull");
    }
    report.checks.push_back(std::move(check));
  }
  report.scheme_120 = block_scheme_tradeoff(SchemeVector({1, 2, 0}), p).point;
  report.scheme_120_closed_form = {(3 * p - p * p * p) / 3,
                                   -std::log((1 - p) * (1 - p) * (1 + p)) / 3};
  report.scheme_120_error =
      std::max(std::abs(report.scheme_120.tau - report.scheme_120_closed_form.tau),
               std::abs(report.scheme_120.lambda - report.scheme_120_closed_form.lambda));
  if (report.scheme_120_error > 1e-12) {
    report.passed = false;
    report.notes.push_back("[1,2,0] differs from its closed form");
  }
  return report;
}

}  // namespace streamlab
