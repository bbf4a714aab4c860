#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "streamlab/analytic.hpp"
#include "streamlab/decoder.hpp"
#include "streamlab/model.hpp"
#include "streamlab/tail_fit.hpp"

namespace streamlab {

inline constexpr std::uint64_t kDefaultSeed = 20240501;

struct Arq {};
struct FullRank {
  double rate = 0.0;
};
struct Block {
  SchemeVector x;
};
struct Mixture {
  std::vector<MixtureComponent> components;
};
using Scheme = std::variant<Arq, FullRank, Block, Mixture>;

std::string scheme_name(const Scheme& s);

// Feedback period for the scheme: 1 for ARQ, d for block schemes and
// 0 (no feedback) for full-rank codes.
std::uint64_t natural_feedback_period(const Scheme& s);

struct SimConfig {
  Scheme scheme = Arq{};
  double p = 0.6;
  std::uint64_t n_slots = 1'000'000;
  std::uint64_t d = 1;  // 0 = no feedback
  std::uint64_t trials = 1;
  std::uint64_t seed = kDefaultSeed;

  static SimConfig make(Scheme scheme, double p, std::uint64_t n_slots,
                        std::uint64_t trials = 1, std::uint64_t seed = kDefaultSeed);
  void validate() const;
};

struct SimMetrics {
  SimConfig config;
  std::uint64_t slots_total = 0;
  std::uint64_t successes_total = 0;
  std::uint64_t delivered_total = 0;
  double tau_hat = 0.0;
  double tau_se = 0.0;  // binomial standard error
  std::vector<std::uint64_t> inter_delivery_times;
  std::vector<std::uint64_t> burst_sizes;  // packets released per delivery event
  std::optional<ExponentEstimate> lambda;  // from inter_delivery_times
  std::optional<double> discrepancy_freq;

  // Analytic throughput for the configured scheme.
  std::optional<double> tau_analytic() const;
  // Renewal-model exponent, or D(r||p) for a full-rank code.
  std::optional<double> lambda_analytic() const;
};

// One point-to-point run. Slots are processed in periods (a feedback
// block, or single slots without block structure).
class P2pTrial {
 public:
  P2pTrial(const SimConfig& config, std::uint64_t trial);

  std::uint64_t period_length() const { return period_; }
  std::uint64_t slot() const { return slot_; }
  const ReceiverState& receiver() const { return rx_; }
  std::uint64_t delivered() const { return rx_.delivered_prefix(); }

  // Widths sent in the coming period (empty for non-block schemes).
  std::vector<int> next_period_widths() const;

  // Consume one period with the given outcomes; delivered[t] receives the
  // in-order release count of slot t of the period.
  void step(const std::vector<bool>& outcomes, std::span<std::uint64_t> delivered);

  // Outcomes drawn from the trial's plain channel stream.
  std::vector<bool> channel_outcomes() const;

 private:
  std::vector<int> widths_for_block(std::uint64_t block) const;

  const SimConfig& config_;
  std::uint64_t trial_;
  std::uint64_t coeff_key_;
  std::uint64_t period_;
  std::uint64_t slot_ = 0;
  ReceiverState rx_;
};

SimMetrics run_p2p(const SimConfig& config);

// Restart mode: each sample is an independent trial from the empty state,
// stopped when packet s_k is delivered (k = 1 gives T_1). Samples that reach
// `horizon` slots are censored at horizon.
std::vector<std::uint64_t> sample_delivery_delays(const SimConfig& config, std::uint64_t k,
                                                  std::size_t samples,
                                                  std::uint64_t horizon = 1'000'000);

// Importance sampling for Pr(D_k > n). Block schemes draw each block from a
// mixture: P(pattern | block fails) with probability 1 - eta, P otherwise.
// With `adaptive_eta`, eta spreads the remaining delivery budget over the
// remaining blocks. Other schemes use a per-slot success probability `tilt_p`.
struct TiltOptions {
  std::uint64_t k = 1;
  std::size_t trials = 20'000;
  std::size_t batches = 100;
  std::uint64_t horizon = 400;
  double eta = 0.1;
  bool adaptive_eta = true;
  double eta_min = 0.01;
  double eta_max = 0.5;
  double tilt_p = 0.0;
};
SurvivalCurve tilted_delay_survival(const SimConfig& config, const TiltOptions& options);

struct SmoothnessRow {
  std::uint64_t k = 0;
  ExponentEstimate gamma;
  double ratio = 0.0;  // gamma / lambda
};
struct SmoothnessReport {
  ExponentEstimate lambda;  // D_1 = T_1
  std::vector<SmoothnessRow> rows;
};
struct SmoothnessOptions {
  TiltOptions tilt;
  std::uint64_t fit_lo = 200;
  std::uint64_t fit_hi = 400;
};
SmoothnessReport smoothness_vs_interdelivery(const SimConfig& config,
                                             std::span<const std::uint64_t> k_list,
                                             const SmoothnessOptions& options);

struct DiscrepancyReport {
  std::uint64_t trials = 0;
  std::uint64_t mismatched_trials = 0;  // first delivery in a different block than renewal
  std::uint64_t blocks_checked = 0;
  std::uint64_t mismatched_blocks = 0;
  double frequency() const {
    return trials ? static_cast<double>(mismatched_trials) / static_cast<double>(trials) : 0.0;
  }
};
DiscrepancyReport renewal_discrepancy_probe(const SchemeVector& x, double p, std::uint64_t trials,
                                            std::uint64_t seed = kDefaultSeed);

std::string to_json(const SimMetrics& m);

}  // namespace streamlab
