#include "streamlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// V[n] = ceil(r n), robust to r n landing a rounding error above an integer.
std::uint64_t full_rank_span(double r, std::uint64_t n) {
  const double v = r * static_cast<double>(n);
  const double f = std::floor(v);
  return static_cast<std::uint64_t>(v - f > 1e-9 * std::max(1.0, v) ? f + 1 : f);
}

std::vector<PacketIndex> packet_range(PacketIndex lo, PacketIndex hi) {
  std::vector<PacketIndex> out;
  out.reserve(hi - lo + 1);
  for (PacketIndex k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

}  // namespace

std::string scheme_name(const Scheme& s) {
  return std::visit(
      Overloaded{[](const Arq&) { return std::string("ARQ"); },
                 [](const FullRank& f) {
                   char buf[64];
                   std::snprintf(buf, sizeof buf, "FullRank(r=%.12g)", f.rate);
                   return std::string(buf);
                 },
                 [](const Block& b) { return b.x.to_string(); },
                 [](const Mixture& m) {
                   std::string out = "Mixture(";
                   for (std::size_t i = 0; i < m.components.size(); ++i) {
                     char buf[32];
                     std::snprintf(buf, sizeof buf, "@%.12g", m.components[i].second);
                     out += (i ? "+" : "") + m.components[i].first.to_string() + buf;
                   }
                   return out + ")";
                 }},
      s);
}

std::uint64_t natural_feedback_period(const Scheme& s) {
  return std::visit(
      Overloaded{[](const Arq&) -> std::uint64_t { return 1; },
                 [](const FullRank&) -> std::uint64_t { return 0; },
                 [](const Block& b) -> std::uint64_t {
                   return static_cast<std::uint64_t>(b.x.block_length());
                 },
                 [](const Mixture& m) -> std::uint64_t {
                   if (m.components.empty()) throw InvalidArgument("empty mixture");
                   return static_cast<std::uint64_t>(m.components.front().first.block_length());
                 }},
      s);
}

SimConfig SimConfig::make(Scheme scheme, double p, std::uint64_t n_slots, std::uint64_t trials,
                          std::uint64_t seed) {
  SimConfig c;
  c.d = natural_feedback_period(scheme);
  c.scheme = std::move(scheme);
  c.p = p;
  c.n_slots = n_slots;
  c.trials = trials;
  c.seed = seed;
  c.validate();
  return c;
}

void SimConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0,1)");
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (n_slots < 1) throw InvalidArgument("n_slots must be positive");
  std::visit(
      Overloaded{
          [&](const Arq&) {
            if (d != 1) throw InvalidArgument("ARQ needs immediate feedback (d = 1)");
          },
          [&](const FullRank& f) {
            if (d != 0) throw InvalidArgument("full-rank codes use no feedback");
            if (!(f.rate > 0.0 && f.rate < 1.0)) throw InvalidArgument("rate must lie in (0,1)");
          },
          [&](const Block& b) {
            if (d != static_cast<std::uint64_t>(b.x.block_length())) {
              throw InvalidArgument("feedback period must equal the scheme's block length");
            }
          },
          [&](const Mixture& m) {
            if (m.components.empty()) throw InvalidArgument("empty mixture");
            double total = 0.0;
            for (const auto& [x, w] : m.components) {
              if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
              if (static_cast<std::uint64_t>(x.block_length()) != d) {
                throw InvalidArgument("mixture components must share the feedback period");
              }
              total += w;
            }
            if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
          }},
      scheme);
  if (d > 1 && n_slots % d != 0) throw InvalidArgument("n_slots must be a multiple of d");
}

std::optional<double> SimMetrics::tau_analytic() const {
  return std::visit(
      Overloaded{[&](const Arq&) -> std::optional<double> { return config.p; },
                 [&](const FullRank& f) -> std::optional<double> {
                   return std::min(f.rate, config.p);
                 },
                 [&](const Block& b) -> std::optional<double> {
                   if (b.x.block_length() > 24) return std::nullopt;
                   return block_scheme_tradeoff(b.x, config.p).point.tau;
                 },
                 [&](const Mixture& m) -> std::optional<double> {
                   return mixture_tradeoff(m.components, config.p).tau;
                 }},
      config.scheme);
}

std::optional<double> SimMetrics::lambda_analytic() const {
  return std::visit(
      Overloaded{[&](const Arq&) -> std::optional<double> { return -std::log1p(-config.p); },
                 [&](const FullRank& f) -> std::optional<double> {
                   return no_feedback_tradeoff(f.rate, config.p).point.lambda;
                 },
                 [&](const Block& b) -> std::optional<double> {
                   if (b.x.block_length() > 24) return std::nullopt;
                   return block_scheme_tradeoff(b.x, config.p).point.lambda;
                 },
                 [&](const Mixture& m) -> std::optional<double> {
                   return mixture_tradeoff(m.components, config.p).lambda;
                 }},
      config.scheme);
}

P2pTrial::P2pTrial(const SimConfig& config, std::uint64_t trial)
    : config_(config),
      trial_(trial),
      coeff_key_(mix64(config.seed ^ stream_id(Stream::kCoefficients, trial))),
      period_(std::max<std::uint64_t>(config.d, 1)) {}

std::vector<int> P2pTrial::widths_for_block(std::uint64_t block) const {
  return std::visit(
      Overloaded{[](const Arq&) { return std::vector<int>{1}; },
                 [](const FullRank&) { return std::vector<int>{}; },
                 [](const Block& b) { return b.x.widths(); },
                 [&](const Mixture& m) {
                   const CounterRng rng(config_.seed, stream_id(Stream::kMixture, trial_));
                   const double u = rng.uniform_at(block);
                   double acc = 0.0;
                   for (const auto& [x, w] : m.components) {
                     acc += w;
                     if (u < acc) return x.widths();
                   }
                   return m.components.back().first.widths();
                 }},
      config_.scheme);
}

std::vector<int> P2pTrial::next_period_widths() const { return widths_for_block(slot_ / period_); }

std::vector<bool> P2pTrial::channel_outcomes() const {
  std::vector<bool> out(period_);
  for (std::uint64_t t = 0; t < period_; ++t) {
    out[t] = channel_success(config_.seed, trial_, 0, slot_ + t + 1, config_.p);
  }
  return out;
}

void P2pTrial::step(const std::vector<bool>& outcomes, std::span<std::uint64_t> delivered) {
  if (outcomes.size() != period_ || delivered.size() != period_) {
    throw InvalidArgument("step needs one outcome per slot of the period");
  }
  if (const auto* fr = std::get_if<FullRank>(&config_.scheme)) {
    ++slot_;
    delivered[0] = 0;
    const PacketIndex top = full_rank_span(fr->rate, slot_);
    const PacketIndex lo = rx_.delivered_prefix() + 1;
    if (outcomes[0] && top >= lo) {
      const auto combo = make_random_combo(packet_range(lo, top), slot_, coeff_key_);
      delivered[0] = rx_.ingest(combo, true).delivered;
    }
    return;
  }

  const std::vector<int> widths = widths_for_block(slot_ / period_);
  const auto unseen = rx_.seen_at_feedback().lowest_unseen(static_cast<std::size_t>(
      *std::max_element(widths.begin(), widths.end())));
  std::vector<int> received;
  for (std::uint64_t t = 0; t < period_; ++t) {
    ++slot_;
    delivered[t] = 0;
    if (!outcomes[t]) continue;
    const auto w = static_cast<std::size_t>(widths[t]);
    const auto combo = make_random_combo({unseen.begin(), unseen.begin() + static_cast<long>(w)},
                                         slot_, coeff_key_);
    delivered[t] = rx_.ingest(combo, true).delivered;
    rx_.mark_seen(combo, true);
    received.push_back(widths[t]);
  }
  const auto expected = static_cast<std::size_t>(prefix_rank(received));
  if (rx_.seen_since_feedback() != expected) {
    throw CoincidentalDependence("trial " + std::to_string(trial_) + ", block ending at slot " +
                                 std::to_string(slot_) + ": " +
                                 std::to_string(rx_.seen_since_feedback()) +
                                 " innovative receptions where the width rule predicts " +
                                 std::to_string(expected));
  }
  rx_.feedback_boundary();
}

SimMetrics run_p2p(const SimConfig& config) {
  config.validate();
  SimMetrics m;
  m.config = config;
  for (std::uint64_t trial = 0; trial < config.trials; ++trial) {
    P2pTrial run(config, trial);
    std::vector<std::uint64_t> delivered(run.period_length());
    std::uint64_t last_event = 0;
    while (run.slot() < config.n_slots) {
      const auto outcomes = run.channel_outcomes();
      const std::uint64_t base = run.slot();
      run.step(outcomes, delivered);
      for (std::size_t t = 0; t < delivered.size(); ++t) {
        m.successes_total += outcomes[t] ? 1 : 0;
        if (delivered[t] > 0) {
          m.inter_delivery_times.push_back(base + t + 1 - last_event);
          m.burst_sizes.push_back(delivered[t]);
          last_event = base + t + 1;
        }
      }
    }
    m.slots_total += run.slot();
    m.delivered_total += run.delivered();
  }
  const double n = static_cast<double>(m.slots_total);
  m.tau_hat = static_cast<double>(m.delivered_total) / n;
  m.tau_se = std::sqrt(m.tau_hat * (1.0 - m.tau_hat) / n);
  if (m.inter_delivery_times.size() >= 10'000) {
    try {
      m.lambda = estimate_exponent(m.inter_delivery_times, {}, config.seed);
    } catch (const InvalidArgument&) {
      m.lambda.reset();
    }
  }
  return m;
}

std::vector<std::uint64_t> sample_delivery_delays(const SimConfig& config, std::uint64_t k,
                                                  std::size_t samples, std::uint64_t horizon) {
  config.validate();
  if (k < 1) throw InvalidArgument("packet index k must be at least 1");
  std::vector<std::uint64_t> out;
  out.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    P2pTrial run(config, s);
    std::vector<std::uint64_t> delivered(run.period_length());
    std::uint64_t when = horizon;
    while (run.slot() < horizon) {
      const std::uint64_t base = run.slot();
      run.step(run.channel_outcomes(), delivered);
      std::uint64_t total = run.delivered();
      // Locate the slot of the period that released s_k.
      if (total >= k) {
        for (std::size_t t = delivered.size(); t-- > 0;) {
          total -= delivered[t];
          if (total < k) {
            when = base + t + 1;
            break;
          }
        }
        break;
      }
    }
    out.push_back(when);
  }
  return out;
}

namespace {

// Per-block pattern law for the defensive "block fails" mixture.
struct FailureTable {
  double p_fail = 0.0;
  double burst = 1.0;  // mean decodable count given a decoding block
  std::vector<std::uint32_t> masks;  // failing patterns
  std::vector<double> cumulative;    // conditional CDF over masks
};

FailureTable build_failure_table(const std::vector<int>& widths, double p) {
  FailureTable t;
  const auto d = widths.size();
  if (d > 24) throw InvalidArgument("block too long for pattern tables");
  std::vector<int> received;
  std::vector<double> probs;
  double decoded_mass = 0.0;
  for (std::uint32_t mask = 0; mask < (1U << d); ++mask) {
    received.clear();
    double prob = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask >> i & 1U) {
        prob *= p;
        received.push_back(widths[i]);
      } else {
        prob *= 1.0 - p;
      }
    }
    std::sort(received.begin(), received.end());
    const int m = prefix_decodable_count(received);
    decoded_mass += prob * m;
    if (m == 0) {
      t.masks.push_back(mask);
      probs.push_back(prob);
      t.p_fail += prob;
    }
  }
  if (t.p_fail < 1.0) t.burst = decoded_mass / (1.0 - t.p_fail);
  double acc = 0.0;
  for (double q : probs) {
    acc += q / t.p_fail;
    t.cumulative.push_back(acc);
  }
  t.cumulative.back() = 1.0;
  return t;
}

}  // namespace

SurvivalCurve tilted_delay_survival(const SimConfig& config, const TiltOptions& options) {
  config.validate();
  if (options.batches < 2 || options.trials < options.batches) {
    throw InvalidArgument("need at least two batches and one trial per batch");
  }
  const bool block_structured = !std::holds_alternative<FullRank>(config.scheme);
  const double tilt_p = options.tilt_p > 0.0 ? options.tilt_p : config.p;
  if (!(tilt_p > 0.0 && tilt_p < 1.0)) throw InvalidArgument("tilt_p must lie in (0,1)");
  if (!(options.eta > 0.0 && options.eta <= 1.0)) throw InvalidArgument("eta must lie in (0,1]");
  if (!(options.eta_min > 0.0 && options.eta_min <= options.eta_max && options.eta_max <= 1.0)) {
    throw InvalidArgument("need 0 < eta_min <= eta_max <= 1");
  }

  const std::uint64_t period = std::max<std::uint64_t>(config.d, 1);
  SurvivalCurve curve;
  for (std::uint64_t n = 0; n <= options.horizon; n += period) curve.grid.push_back(n);
  curve.batch_sums.assign(options.batches, std::vector<double>(curve.grid.size(), 0.0));
  curve.batch_trials.assign(options.batches, 0);

  std::map<std::vector<int>, FailureTable> tables;
  const double log_up = std::log(config.p / tilt_p);
  const double log_down = std::log((1.0 - config.p) / (1.0 - tilt_p));

  for (std::size_t i = 0; i < options.trials; ++i) {
    const std::size_t batch = i % options.batches;
    auto& sums = curve.batch_sums[batch];
    ++curve.batch_trials[batch];
    sums[0] += 1.0;

    P2pTrial run(config, i);
    const CounterRng rng(config.seed, stream_id(Stream::kTilt, i));
    std::vector<bool> outcomes(period);
    std::vector<std::uint64_t> delivered(period);
    double log_w = 0.0;
    for (std::size_t g = 1; g < curve.grid.size(); ++g) {
      const std::uint64_t block = g - 1;
      if (block_structured) {
        const auto widths = run.next_period_widths();
        auto it = tables.find(widths);
        if (it == tables.end()) it = tables.emplace(widths, build_failure_table(widths, config.p)).first;
        const FailureTable& tab = it->second;
        const std::uint64_t base = block * (period + 2);
        double eta = options.eta;
        if (options.adaptive_eta) {
          const double budget = static_cast<double>(options.k - 1 - run.delivered());
          const double blocks_left = static_cast<double>(curve.grid.size() - g);
          eta = budget / (blocks_left * tab.burst * (1.0 - tab.p_fail));
          eta = std::clamp(eta, options.eta_min, options.eta_max);
        }
        if (rng.uniform_at(base) < eta) {
          for (std::uint64_t t = 0; t < period; ++t) {
            outcomes[t] = rng.bernoulli_at(base + 2 + t, config.p);
          }
        } else {
          const double u = rng.uniform_at(base + 1);
          const auto pos = static_cast<std::size_t>(
              std::lower_bound(tab.cumulative.begin(), tab.cumulative.end(), u) -
              tab.cumulative.begin());
          const std::uint32_t mask = tab.masks[std::min(pos, tab.masks.size() - 1)];
          for (std::uint64_t t = 0; t < period; ++t) outcomes[t] = mask >> t & 1U;
        }
        std::vector<int> received;
        for (std::uint64_t t = 0; t < period; ++t) {
          if (outcomes[t]) received.push_back(widths[t]);
        }
        std::sort(received.begin(), received.end());
        const bool fails = prefix_decodable_count(received) == 0;
        log_w += fails ? std::log(tab.p_fail / ((1.0 - eta) + eta * tab.p_fail)) : -std::log(eta);
      } else {
        outcomes[0] = rng.bernoulli_at(block, tilt_p);
        log_w += outcomes[0] ? log_up : log_down;
      }
      run.step(outcomes, delivered);
      if (run.delivered() >= options.k) break;
      sums[g] += std::exp(log_w);
    }
  }
  return curve;
}

SmoothnessReport smoothness_vs_interdelivery(const SimConfig& config,
                                             std::span<const std::uint64_t> k_list,
                                             const SmoothnessOptions& options) {
  for (auto k : k_list) {
    if (k < 1 || k > 50) throw InvalidArgument("k must lie in [1,50]");
  }
  auto fit = [&](std::uint64_t k) {
    TiltOptions t = options.tilt;
    t.k = k;
    t.horizon = std::max(t.horizon, options.fit_hi);
    const auto curve = tilted_delay_survival(config, t);
    const auto est = estimate_exponent(curve, options.fit_lo, options.fit_hi, config.seed);
    if (est.points < 2) throw InvalidArgument("insufficient trials for tail resolution");
    return est;
  };
  SmoothnessReport report;
  report.lambda = fit(1);
  for (auto k : k_list) {
    SmoothnessRow row;
    row.k = k;
    row.gamma = k == 1 ? report.lambda : fit(k);
    row.ratio = row.gamma.lambda / report.lambda.lambda;
    report.rows.push_back(row);
  }
  return report;
}

DiscrepancyReport renewal_discrepancy_probe(const SchemeVector& x, double p, std::uint64_t trials,
                                            std::uint64_t seed) {
  const auto config = SimConfig::make(Block{x}, p, static_cast<std::uint64_t>(x.block_length()), 1, seed);
  constexpr std::uint64_t kMaxBlocks = 100'000;
  DiscrepancyReport report;
  report.trials = trials;
  for (std::uint64_t i = 0; i < trials; ++i) {
    P2pTrial run(config, i);
    std::vector<std::uint64_t> delivered(run.period_length());
    for (std::uint64_t b = 0; b < kMaxBlocks; ++b) {
      const auto widths = run.next_period_widths();
      const auto outcomes = run.channel_outcomes();
      std::vector<int> received;
      for (std::size_t t = 0; t < outcomes.size(); ++t) {
        if (outcomes[t]) received.push_back(widths[t]);
      }
      std::sort(received.begin(), received.end());
      const bool renewal = prefix_decodable_count(received) >= 1;
      run.step(outcomes, delivered);
      const bool exact = run.delivered() > 0;
      ++report.blocks_checked;
      if (renewal != exact) ++report.mismatched_blocks;
      if (renewal || exact) {
        if (renewal != exact) ++report.mismatched_trials;
        break;
      }
    }
  }
  return report;
}

std::string to_json(const SimMetrics& m) {
  using nlohmann::json;
  json j;
  j["config"] = {{"scheme", scheme_name(m.config.scheme)},
                 {"p", m.config.p},
                 {"d", m.config.d},
                 {"n_slots", m.config.n_slots},
                 {"trials", m.config.trials},
                 {"seed", m.config.seed}};
  j["delivered_total"] = m.delivered_total;
  j["tau_hat"] = m.tau_hat;
  j["tau_se"] = m.tau_se;
  j["tau_ci"] = {m.tau_hat - 4 * m.tau_se, m.tau_hat + 4 * m.tau_se};
  if (auto t = m.tau_analytic()) j["tau_analytic"] = *t;
  j["n_samples"] = m.inter_delivery_times.size();
  if (auto l = m.lambda_analytic()) j["lambda_analytic"] = *l;
  if (m.lambda) {
    j["lambda_hat"] = m.lambda->lambda;
    j["lambda_ci"] = {m.lambda->ci_low, m.lambda->ci_high};
  } else {
    j["lambda_hat"] = nullptr;
    j["lambda_ci"] = nullptr;
  }
  j["discrepancy_freq"] = m.discrepancy_freq ? json(*m.discrepancy_freq) : json(nullptr);
  return j.dump(2);
}

}  // namespace streamlab
