#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "streamlab/errors.hpp"
#include "streamlab/multicast.hpp"
#include "streamlab/rng.hpp"
#include "streamlab/validation/oracles.hpp"

using namespace streamlab;

namespace {

TwoUserParams random_params(CounterRng& rng) {
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  return TwoUserParams::make(u(0.05, 0.95), u(0.05, 0.95), u(0.0, 1.0), u(0.0, 1.0));
}

}  // namespace

TEST(Transmission, FigureTwoTraceReplay) {
  // Fixed priority to U1; outcomes (U1, U2) per slot from the illustration.
  const bool rx[5][2] = {{true, false}, {false, true}, {true, true}, {true, false}, {true, true}};
  TwoUserState st;
  std::vector<std::string> sent;
  for (const auto& r : rx) {
    const auto tx = choose_transmission(st, 1.0, 0.0, 0.5);
    sent.push_back(tx.kind == Transmission::Kind::kXor
                       ? "s" + std::to_string(tx.first) + "+s" + std::to_string(tx.second)
                       : "s" + std::to_string(tx.first));
    st.apply(tx, r[0], r[1]);
  }
  EXPECT_EQ(sent, (std::vector<std::string>{"s1", "s2", "s1+s2", "s3", "s4"}));
  EXPECT_EQ(st.delivered(0), 4U);
  EXPECT_EQ(st.delivered(1), 2U);
  EXPECT_TRUE(st.has(1, 4));
}

TEST(Transmission, SinglePacketWhenRequiredIndicesMatch) {
  TwoUserState st;
  const auto tx = choose_transmission(st, 0.3, 0.7, 0.99);
  EXPECT_EQ(tx.kind, Transmission::Kind::kSingle);
  EXPECT_EQ(tx.first, 1U);
}

TEST(Transmission, XorStructureOnRandomRuns) {
  CounterRng rng(3);
  for (int run = 0; run < 20; ++run) {
    const auto params = random_params(rng);
    TwoUserState st;
    for (int slot = 0; slot < 2'000; ++slot) {
      const auto tx = choose_transmission(st, params.q1, params.q2, rng.uniform());
      const PacketIndex r1 = st.required(0), r2 = st.required(1);
      if (tx.kind == Transmission::Kind::kXor) {
        EXPECT_NE(r1, r2);
        EXPECT_TRUE(st.has(0, r2) || st.has(1, r1));
        EXPECT_EQ(tx.first, std::min(r1, r2));
        EXPECT_EQ(tx.second, std::max(r1, r2));
      } else {
        EXPECT_TRUE(tx.first == r1 || tx.first == r2);
      }
      const auto before = st.chain_state();
      const auto move = tx.kind == Transmission::Kind::kXor ? ChainMove::kXor
                        : r1 == r2                          ? ChainMove::kCommon
                        : tx.first == st.r_min()            ? ChainMove::kLaggerPacket
                                                            : ChainMove::kLeaderPacket;
      const bool a = rng.bernoulli(params.p1), b = rng.bernoulli(params.p2);
      st.apply(tx, a, b);
      EXPECT_EQ(st.chain_state(), chain_step(before, move, a, b));
    }
  }
}

TEST(ChainStep, EdgesOnTheRightSide) {
  const ChainState two{2, false}, two_adv{2, true}, one_adv{1, true};
  EXPECT_EQ(chain_step(two, ChainMove::kLaggerPacket, false, true), (ChainState{1, false}));
  EXPECT_EQ(chain_step(two, ChainMove::kLaggerPacket, true, false), two);
  EXPECT_EQ(chain_step(two, ChainMove::kLeaderPacket, true, false), (ChainState{3, false}));
  EXPECT_EQ(chain_step(two, ChainMove::kLeaderPacket, false, true), two_adv);
  EXPECT_EQ(chain_step(two, ChainMove::kLeaderPacket, true, true), two);
  EXPECT_EQ(chain_step(two_adv, ChainMove::kXor, true, true), (ChainState{1, false}));
  EXPECT_EQ(chain_step(two_adv, ChainMove::kXor, true, false), two);
  EXPECT_EQ(chain_step(two_adv, ChainMove::kXor, false, true), one_adv);
  EXPECT_EQ(chain_step(one_adv, ChainMove::kXor, false, true), (ChainState{-1, false}));
  EXPECT_EQ(chain_step(two_adv, ChainMove::kXor, false, false), two_adv);
  EXPECT_EQ(chain_step({0, false}, ChainMove::kCommon, true, false), (ChainState{1, false}));
  EXPECT_EQ(chain_step({0, false}, ChainMove::kCommon, false, true), (ChainState{-1, false}));
}

TEST(Roots, OneIsAlwaysACubicRoot) {
  CounterRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto params = random_params(rng);
    for (const auto& t : {params, params.mirrored()}) {
      const auto a = right_recurrence_coefficients(t);
      EXPECT_NEAR(a[0] + a[1] + a[2] + a[3], 0.0, 1e-12);
    }
  }
}

TEST(Roots, FixedPriorityRatio) {
  for (auto [p1, p2] : {std::pair{0.4, 0.6}, {0.2, 0.9}, {0.5, 0.55}}) {
    const auto t = TwoUserParams::make(p1, p2, 1.0, 0.0);
    const auto r = priority_q_roots(t);
    EXPECT_NEAR(r.rho, t.b / t.c, 1e-12);
    EXPECT_TRUE(r.stable_right);
  }
}

TEST(Roots, StabilityThreshold) {
  const double q2 = stability_threshold_q2(0.5, 0.4, 1.0);
  EXPECT_NEAR(q2, 7.0 / 27.0, 1e-9);
  EXPECT_NEAR(priority_q_roots(TwoUserParams::make(0.5, 0.4, 1.0, q2)).rho, 1.0, 1e-7);
  EXPECT_GT(priority_q_roots(TwoUserParams::make(0.5, 0.4, 1.0, 0.25)).rho, 1.0);
}

TEST(FixedPriority, StationaryValues) {
  const auto s = fixed_priority_stationary(0.4, 0.6);
  EXPECT_NEAR(s.pi_m1, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.rho, 4.0 / 9.0, 1e-12);
  const auto t = fixed_priority_tradeoff(0.4, 0.6);
  ASSERT_TRUE(t.tau2.has_value());
  EXPECT_NEAR(*t.tau2, 0.4, 1e-12);
  EXPECT_NEAR(t.tau1, 0.4, 1e-15);
  EXPECT_NEAR(t.lambda1, -std::log(0.6), 1e-15);
  EXPECT_NEAR(t.xi2, validation::fixed_priority_matrix_xi2(0.4, 0.6), 1e-9);
  EXPECT_THROW(fixed_priority_stationary(0.5, 0.5), StabilityError);
  EXPECT_THROW(fixed_priority_stationary(0.7, 0.3), StabilityError);
  EXPECT_FALSE(fixed_priority_tradeoff(0.7, 0.3).tau2.has_value());
}

TEST(FixedPriority, SaturatesAtPrimaryExponent) {
  for (int i = 1; i <= 9; ++i) {
    const double p1 = i / 10.0;
    double prev = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double p2 = p1 + (0.999 - p1) * j / 20.0;
      const auto t = fixed_priority_tradeoff(p1, p2);
      EXPECT_LE(t.lambda2, -std::log1p(-p1) + 1e-12);
      EXPECT_GE(t.lambda2, prev - 1e-12);
      EXPECT_NEAR(t.xi2, validation::fixed_priority_matrix_xi2(p1, p2), 1e-9);
      prev = t.lambda2;
    }
    // At p2 = 1 the lagging state persists with probability max(p1, 1 - p1).
    const double limit = std::min(-std::log1p(-p1), -std::log(p1));
    EXPECT_NEAR(fixed_priority_tradeoff(p1, 1 - 1e-9).lambda2, limit, 1e-6);
  }
}

TEST(PrioritySolution, SpecialisesToFixedPriority) {
  const auto q = priority_q_solution(TwoUserParams::make(0.3, 0.8, 1.0, 0.0));
  const auto f = fixed_priority_tradeoff(0.3, 0.8);
  ASSERT_TRUE(q.tau2 && f.tau2);
  EXPECT_NEAR(*q.tau2, *f.tau2, 1e-12);
  EXPECT_NEAR(q.lambda2, f.lambda2, 1e-12);
  EXPECT_NEAR(*q.tau1, f.tau1, 1e-12);
}

TEST(PrioritySolution, GreedyIsThroughputOptimal) {
  for (double p : {0.3, 0.5, 0.8}) {
    const auto s = priority_q_solution(TwoUserParams::make(p, p, 0.0, 0.0));
    ASSERT_TRUE(s.tau1 && s.tau2);
    EXPECT_DOUBLE_EQ(*s.tau1, p);
    EXPECT_DOUBLE_EQ(*s.tau2, p);
  }
}

TEST(PrioritySolution, EigenvalueOracle) {
  CounterRng rng(17);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const auto t = random_params(rng);
    const auto s = priority_q_solution(t);
    if (!s.stationary) continue;
    ++checked;
    EXPECT_NEAR(s.xi2, validation::priority_matrix_xi2(t), 1e-9);
    EXPECT_NEAR(s.xi1, validation::priority_matrix_xi2(t.mirrored()), 1e-9);
  }
  EXPECT_GT(checked, 100);
}

TEST(PrioritySolution, TruncatedChainOracleAndNormalisation) {
  CounterRng rng(23);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 25; ++i) {
    const auto t = random_params(rng);
    const auto s = priority_q_solution(t);
    if (!s.stationary || std::max(s.rho, s.mu) > 0.85) continue;
    ++checked;
    const auto chain = validation::truncated_chain_stationary(t, 200);
    EXPECT_LT(chain.residual, 1e-12);
    double total = s.pi(0);
    for (int k = -200; k <= 200; ++k) {
      EXPECT_NEAR(s.pi(k), chain.pi(k), 1e-9) << k;
      if (k != 0) {
        EXPECT_NEAR(s.pi_adv(k), chain.pi_adv(k), 1e-9) << k;
        total += s.pi(k) + s.pi_adv(k);
      }
      EXPECT_GE(s.pi(k), 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(s.origin_balance_residual(), 0.0, 1e-12);
    for (int k = 2; k <= 50; ++k) {
      EXPECT_NEAR(s.pi(k), s.rho * s.pi(k - 1), 1e-15);
      EXPECT_NEAR(s.pi(-k), s.mu * s.pi(-k + 1), 1e-15);
      EXPECT_NEAR(s.pi_adv(k), s.kappa_right * s.pi(k), 1e-15);
    }
  }
  EXPECT_EQ(checked, 25);
}

TEST(PrioritySolution, UnstableSideIsFlagged) {
  const auto s = priority_q_solution(TwoUserParams::make(0.5, 0.4, 1.0, 0.2));
  EXPECT_FALSE(s.stable_right);
  EXPECT_FALSE(s.stationary);
  EXPECT_FALSE(s.tau1.has_value());
  EXPECT_FALSE(s.tau2.has_value());
}

TEST(TwoUserSim, FixedPriorityThroughput) {
  const auto r = simulate_two_user(TwoUserParams::make(0.4, 0.6, 1.0, 0.0), 1'000'000, 9);
  EXPECT_NEAR(r.users[0].tau_hat, 0.4, 4 * r.users[0].tau_se);
  EXPECT_NEAR(r.users[1].tau_hat, 0.4, 4 * r.users[1].tau_se + 1e-3);
  EXPECT_GT(r.xor_transmissions, 0U);
}

TEST(TwoUserSim, NoModelViolationsAcrossRegimes) {
  CounterRng rng(29);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NO_THROW(simulate_two_user(random_params(rng), 20'000, i));
  }
}

TEST(TwoUserSim, ReplayIsIdentical) {
  const auto t = TwoUserParams::make(0.5, 0.4, 1.0, 0.6);
  const auto a = simulate_two_user(t, 50'000, 4);
  const auto b = simulate_two_user(t, 50'000, 4);
  EXPECT_EQ(a.occupancy, b.occupancy);
  EXPECT_EQ(a.users[1].inter_delivery_times, b.users[1].inter_delivery_times);
}

TEST(TwoUserSim, PiggybackExponentFromRestarts) {
  const auto t = TwoUserParams::make(0.5, 0.4, 1.0, 0.3);
  const auto s = sample_two_user_first_delivery(t, 1, 100'000, 31);
  const auto e = estimate_exponent(s);
  const double want = priority_q_solution(t).lambda2;
  EXPECT_NEAR(e.lambda, want, 0.10 * want);
}
