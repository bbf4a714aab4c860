#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streamlab/model.hpp"

namespace streamlab {

// D(r||p) in nats, with 0 ln 0 = 0.
double binary_divergence(double r, double p);

TradeoffPoint arq_tradeoff(double p);

struct NoFeedbackResult {
  TradeoffPoint point;
  bool rate_at_or_above_capacity = false;  // r >= p: exponent is zero
};
NoFeedbackResult no_feedback_tradeoff(double r, double p);

struct BlockEvaluation {
  TradeoffPoint point;
  double p_d = 0.0;                 // first unseen packet decodable within the block
  double expected_innovative = 0.0;  // E[S_d]
};

// Renewal-model evaluation grouping combinations by width (binomial counts).
BlockEvaluation block_scheme_tradeoff(const SchemeVector& x, double p);
// Same quantities by walking all 2^d erasure patterns; d <= 24.
BlockEvaluation block_scheme_tradeoff_exhaustive(const SchemeVector& x, double p);

// Proposed family: x_1 = a, x_{d-a+1} = d - a.
SchemeVector proposed_code_scheme(int a, int d);
TradeoffPoint proposed_code_tradeoff(int a, int d, double p);

using MixtureComponent = std::pair<SchemeVector, double>;
TradeoffPoint mixture_tradeoff(std::span<const MixtureComponent> components, double p);

// Indices of the upper-left convex envelope, tau ascending. Starts at the
// largest lambda (ties: larger tau), ends at the largest tau.
std::vector<std::size_t> upper_hull(std::span<const TradeoffPoint> points);

// Largest lambda reachable on the envelope at throughput tau; -inf beyond
// the envelope's tau range on the right.
double hull_lambda_at(std::span<const TradeoffPoint> points, std::span<const std::size_t> hull,
                      double tau);

struct HullCheck {
  int d = 0;
  std::vector<SchemeVector> schemes;
  std::vector<TradeoffPoint> points;
  std::vector<std::size_t> hull;
  bool family_spans_hull = false;
  bool others_strictly_below = false;
  bool raw_compositions_dominated = false;
};

struct OptimalityReport {
  double p = 0.0;
  std::vector<HullCheck> checks;  // d = 2 and d = 3
  TradeoffPoint scheme_120;
  TradeoffPoint scheme_120_closed_form;
  double scheme_120_error = 0.0;
  bool passed = false;
  std::vector<std::string> notes;
};

OptimalityReport verify_d23_optimality(double p);

}  // namespace streamlab
