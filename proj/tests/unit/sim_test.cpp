#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "streamlab/errors.hpp"
#include "streamlab/sim.hpp"
#include "streamlab/tail_fit.hpp"
#include "streamlab/validation/oracles.hpp"

using namespace streamlab;

namespace {

const Scheme kBlock1030 = Block{SchemeVector::parse("[1,0,3,0]")};

// Mean and standard error of the batch values at grid point j.
std::pair<double, double> batch_mean_se(const SurvivalCurve& c, std::size_t j) {
  std::vector<double> v;
  for (std::size_t b = 0; b < c.batch_sums.size(); ++b) {
    v.push_back(c.batch_sums[b][j] / static_cast<double>(c.batch_trials[b]));
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

}  // namespace

TEST(TailFit, GeometricSamples) {
  CounterRng rng(11);
  std::vector<std::uint64_t> s;
  for (int i = 0; i < 100'000; ++i) {
    std::uint64_t t = 1;
    while (!rng.bernoulli(0.6)) ++t;
    s.push_back(t);
  }
  const auto e = estimate_exponent(s);
  EXPECT_NEAR(e.lambda, -std::log(0.4), 0.05 * -std::log(0.4));
  EXPECT_LE(e.ci_low, e.lambda);
  EXPECT_GE(e.ci_high, e.lambda);
  EXPECT_EQ(e.n_samples, s.size());
}

TEST(TailFit, RejectsSmallOrDegenerateInput) {
  std::vector<std::uint64_t> few(9'999, 3);
  few.back() = 4;
  EXPECT_THROW(estimate_exponent(few), InvalidArgument);
  std::vector<std::uint64_t> flat(20'000, 5);
  EXPECT_THROW(estimate_exponent(flat), InvalidArgument);
}

TEST(TailFit, EmpiricalSurvival) {
  const std::vector<std::uint64_t> s{1, 1, 2, 4};
  const auto surv = empirical_survival(s);
  ASSERT_EQ(surv.size(), 5U);
  EXPECT_DOUBLE_EQ(surv[0], 1.0);
  EXPECT_DOUBLE_EQ(surv[1], 0.5);
  EXPECT_DOUBLE_EQ(surv[2], 0.25);
  EXPECT_DOUBLE_EQ(surv[3], 0.25);
  EXPECT_DOUBLE_EQ(surv[4], 0.0);
}

TEST(SimConfig, RejectsContradictions) {
  auto arq = SimConfig::make(Arq{}, 0.6, 100);
  arq.d = 2;
  EXPECT_THROW(arq.validate(), InvalidArgument);
  EXPECT_THROW(SimConfig::make(kBlock1030, 0.6, 10).validate(), InvalidArgument);
  EXPECT_THROW(SimConfig::make(Arq{}, 1.0, 10).validate(), InvalidArgument);
  EXPECT_THROW(SimConfig::make(FullRank{0.0}, 0.6, 10).validate(), InvalidArgument);
}

TEST(RunP2p, ArqDeliversOnEverySuccess) {
  const auto m = run_p2p(SimConfig::make(Arq{}, 0.6, 200'000));
  EXPECT_EQ(m.delivered_total, m.successes_total);
  EXPECT_NEAR(m.tau_hat, 0.6, 4 * m.tau_se);
}

TEST(RunP2p, ConservationAndBurstAccounting) {
  for (const Scheme& s : {kBlock1030, Scheme{FullRank{0.3}}, Scheme{Block{SchemeVector::parse("[2,1,0]")}}}) {
    const auto m = run_p2p(SimConfig::make(s, 0.6, 120'000, 2));
    EXPECT_LE(m.delivered_total, m.successes_total);
    const auto bursts = std::accumulate(m.burst_sizes.begin(), m.burst_sizes.end(), std::uint64_t{0});
    EXPECT_EQ(bursts, m.delivered_total);
    for (auto t : m.inter_delivery_times) EXPECT_GE(t, 1U);
    EXPECT_NEAR(m.tau_hat, *m.tau_analytic(), 4 * m.tau_se + 1e-3) << scheme_name(s);
  }
}

TEST(RunP2p, MixtureThroughput) {
  Mixture mix{{{SchemeVector::parse("[2,0]"), 0.3}, {SchemeVector::parse("[1,1]"), 0.7}}};
  const auto m = run_p2p(SimConfig::make(mix, 0.6, 400'000));
  EXPECT_NEAR(m.tau_hat, *m.tau_analytic(), 4 * m.tau_se);
}

TEST(RunP2p, ReplayIsBitIdentical) {
  const auto cfg = SimConfig::make(kBlock1030, 0.6, 40'000, 3, 77);
  const auto a = run_p2p(cfg);
  const auto b = run_p2p(cfg);
  EXPECT_EQ(a.delivered_total, b.delivered_total);
  EXPECT_EQ(a.inter_delivery_times, b.inter_delivery_times);
  EXPECT_EQ(to_json(a), to_json(b));
  const auto c = run_p2p(SimConfig::make(kBlock1030, 0.6, 40'000, 3, 78));
  EXPECT_NE(a.inter_delivery_times, c.inter_delivery_times);
}

TEST(RunP2p, JsonCarriesComparison) {
  const auto j = nlohmann::json::parse(to_json(run_p2p(SimConfig::make(kBlock1030, 0.6, 100'000))));
  for (const char* key : {"config", "tau_hat", "tau_ci", "tau_analytic", "lambda_analytic",
                          "lambda_hat", "lambda_ci", "n_samples", "discrepancy_freq"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_NEAR(j["lambda_analytic"].get<double>(), 0.2899092476, 1e-9);
}

TEST(RestartSamples, ArqIsGeometric) {
  const auto s = sample_delivery_delays(SimConfig::make(Arq{}, 0.6, 1), 1, 50'000);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const double se = std::sqrt(0.4 / 0.36 / static_cast<double>(s.size()));
  EXPECT_NEAR(mean, 1 / 0.6, 4 * se);
}

TEST(RestartSamples, BlockDelayMatchesExactRecursion) {
  const auto x = SchemeVector::parse("[1,0,3,0]");
  for (std::uint64_t k : {1U, 3U, 5U}) {
    const auto exact = validation::block_delay_survival(x, 0.6, k, 10);
    const auto s = sample_delivery_delays(SimConfig::make(Block{x}, 0.6, 4), k, 100'000);
    for (std::uint64_t n : {2U, 4U, 7U, 12U, 20U}) {
      double tail = 0.0;
      for (auto t : s) tail += t > n;
      tail /= static_cast<double>(s.size());
      const double se = std::sqrt(exact[n] * (1 - exact[n]) / static_cast<double>(s.size()));
      EXPECT_NEAR(tail, exact[n], 4 * se + 1e-6) << "k=" << k << " n=" << n;
    }
  }
}

TEST(ExactRecursion, FirstDeliveryIsRenewal) {
  // Pr(T1 > kd) = (1 - p_d)^k under the renewal model.
  for (const char* text : {"[1,0,3,0]", "[2,1,0]", "[1,1]", "[3,0,0]"}) {
    const auto x = SchemeVector::parse(text);
    const auto e = block_scheme_tradeoff(x, 0.6);
    const auto s = validation::block_delay_survival(x, 0.6, 1, 12);
    const int d = x.block_length();
    for (int b = 0; b <= 12; ++b) {
      EXPECT_NEAR(s[static_cast<std::size_t>(b * d)], std::pow(1 - e.p_d, b), 1e-13) << text;
    }
  }
}

TEST(ImportanceSampling, FullRankMatchesExactSurvival) {
  const auto exact = validation::full_rank_survival(0.3, 0.6, 400);
  TiltOptions o;
  o.trials = 5'000;
  o.batches = 50;
  o.tilt_p = 0.3;
  const auto curve = tilted_delay_survival(SimConfig::make(FullRank{0.3}, 0.6, 1), o);
  for (std::size_t j = 0; j < curve.grid.size(); j += 50) {
    const auto [mean, se] = batch_mean_se(curve, j);
    const double want = exact[curve.grid[j]];
    EXPECT_NEAR(mean, want, 5 * se + 1e-3 * want) << "n=" << curve.grid[j];
  }
}

TEST(ImportanceSampling, BlockDelayMatchesExactSurvival) {
  const auto x = SchemeVector::parse("[1,0,3,0]");
  for (std::uint64_t k : {1U, 5U}) {
    const auto exact = validation::block_delay_survival(x, 0.6, k, 40);
    TiltOptions o;
    o.k = k;
    o.trials = 4'000;
    o.batches = 40;
    o.horizon = 160;
    const auto curve = tilted_delay_survival(SimConfig::make(Block{x}, 0.6, 4), o);
    for (std::size_t j = 4; j < curve.grid.size(); j += 8) {
      const auto [mean, se] = batch_mean_se(curve, j);
      const double want = exact[curve.grid[j]];
      EXPECT_NEAR(mean, want, 5 * se) << "k=" << k << " n=" << curve.grid[j];
    }
  }
}

TEST(ImportanceSampling, FullRankExactDecayApproachesDivergence) {
  const auto s = validation::full_rank_survival(0.3, 0.6, 2000);
  const double slope = -(std::log(s[2000]) - std::log(s[1000])) / 1000.0;
  EXPECT_NEAR(slope, binary_divergence(0.3, 0.6), 0.02 * binary_divergence(0.3, 0.6));
}

TEST(RenewalProbe, NoCrossBlockDecodingObserved) {
  const auto single = renewal_discrepancy_probe(SchemeVector::parse("[4,0,0,0]"), 0.6, 2'000);
  EXPECT_EQ(single.mismatched_trials, 0U);
  EXPECT_EQ(single.trials, 2'000U);
  for (const char* text : {"[1,0,3,0]", "[1,1]", "[2,1,0]"}) {
    const auto r = renewal_discrepancy_probe(SchemeVector::parse(text), 0.6, 2'000);
    EXPECT_GT(r.blocks_checked, 0U);
    EXPECT_EQ(r.mismatched_blocks, 0U) << text;
  }
}

TEST(Smoothness, RejectsOutOfRangeK) {
  const std::uint64_t ks[] = {51};
  EXPECT_THROW(smoothness_vs_interdelivery(SimConfig::make(kBlock1030, 0.6, 4), ks, {}),
               InvalidArgument);
}

TEST(Smoothness, FirstPacketDelayIsInterDelivery) {
  SmoothnessOptions o;
  o.tilt.trials = 2'000;
  o.tilt.batches = 20;
  o.fit_lo = 10;
  o.fit_hi = 40;
  o.tilt.horizon = 40;
  const std::uint64_t ks[] = {1};
  const auto r = smoothness_vs_interdelivery(SimConfig::make(Arq{}, 0.6, 1), ks, o);
  ASSERT_EQ(r.rows.size(), 1U);
  EXPECT_DOUBLE_EQ(r.rows[0].ratio, 1.0);
}
