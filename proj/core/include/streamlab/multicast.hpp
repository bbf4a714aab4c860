#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "streamlab/decoder.hpp"
#include "streamlab/model.hpp"
#include "streamlab/tail_fit.hpp"

namespace streamlab {

// Position in the two-user decoding chain: index = gaps(U2) - gaps(U1),
// so positive indices mean U1 leads.
struct ChainState {
  int index = 0;
  bool advantage = false;
  friend auto operator<=>(const ChainState&, const ChainState&) = default;
};

struct Transmission {
  enum class Kind { kSingle, kXor };
  Kind kind = Kind::kSingle;
  PacketIndex first = 0;   // the packet, or the lower index of the XOR
  PacketIndex second = 0;  // higher index of the XOR
};

// Transmission class as seen by the chain.
enum class ChainMove { kCommon, kLaggerPacket, kLeaderPacket, kXor };

class TwoUserState {
 public:
  PacketIndex delivered(int user) const { return users_[user].delivered; }
  PacketIndex required(int user) const { return users_[user].delivered + 1; }
  bool has(int user, PacketIndex k) const {
    return k <= users_[user].delivered || users_[user].beyond.count(k) > 0;
  }
  PacketIndex r_max() const { return std::max(required(0), required(1)); }
  PacketIndex r_min() const { return std::min(required(0), required(1)); }
  int leader() const { return required(0) >= required(1) ? 0 : 1; }

  // Recomputed from the decoded sets on every call.
  ChainState chain_state() const;

  // Packets released in order to each user.
  std::array<std::uint64_t, 2> apply(const Transmission& tx, bool received1, bool received2);

 private:
  struct User {
    PacketIndex delivered = 0;
    std::set<PacketIndex> beyond;
  };
  std::array<User, 2> users_;
};

// Priority-q rule; `draw` is uniform in [0,1).
Transmission choose_transmission(const TwoUserState& state, double q1, double q2, double draw);

// The chain edge taken for a move and the two reception outcomes.
ChainState chain_step(ChainState s, ChainMove move, bool received1, bool received2);

struct PriorityRoots {
  double rho = 0.0;
  double mu = 0.0;
  bool stable_right = false;
  bool stable_left = false;
  std::array<double, 4> alpha{};  // alpha_0 .. alpha_3
  std::array<double, 4> beta{};
};
PriorityRoots priority_q_roots(const TwoUserParams& params);

// Cubic coefficients of the right-side recurrence; mirror the params for beta.
std::array<double, 4> right_recurrence_coefficients(const TwoUserParams& params);

struct ChainSolution {
  TwoUserParams params{};
  double rho = 0.0, mu = 0.0;
  bool stable_right = false, stable_left = false;
  bool stationary = false;  // both sides stable; pi fields valid
  double kappa_right = 0.0, kappa_left = 0.0;  // pi'_i / pi_i per side
  double pi0 = 0.0, pi1 = 0.0, pi_m1 = 0.0;

  std::optional<double> tau1, tau2;  // empty: not analytically evaluable
  double xi1 = 0.0, xi2 = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;

  double pi(int i) const;
  double pi_adv(int i) const;  // i != 0
  double probability(ChainState s) const { return s.advantage ? pi_adv(s.index) : pi(s.index); }
  // Residual of the state-0 balance equation; zero up to rounding.
  double origin_balance_residual() const;
};

ChainSolution priority_q_solution(const TwoUserParams& params);

// Closed-form xi_2 (and xi_1 through the mirrored parameters).
double priority_xi2(const TwoUserParams& params);

// Fixed priority to U1, i.e. (q1, q2) = (1, 0). Requires p1 < p2.
ChainSolution fixed_priority_stationary(double p1, double p2);

struct FixedPriorityTradeoff {
  double tau1 = 0.0, lambda1 = 0.0;
  std::optional<double> tau2;
  double xi2 = 0.0, lambda2 = 0.0;
};
FixedPriorityTradeoff fixed_priority_tradeoff(double p1, double p2);

// Smallest q2 with rho(q2) <= 1, by bisection on [0,1].
double stability_threshold_q2(double p1, double p2, double q1);

struct UserSimMetrics {
  std::uint64_t delivered = 0;
  std::uint64_t successes = 0;
  double tau_hat = 0.0;
  double tau_se = 0.0;
  std::vector<std::uint64_t> inter_delivery_times;
};

struct TwoUserSimResult {
  TwoUserParams params{};
  std::uint64_t n_slots = 0;
  std::array<UserSimMetrics, 2> users;
  std::map<ChainState, std::uint64_t> occupancy;  // state at the start of each slot
  std::uint64_t batches = 0;
  std::map<ChainState, double> occupancy_se;  // batch-means standard error
  std::uint64_t xor_transmissions = 0;
};

// Slot-level simulation; every slot's transition is checked against the
// chain. Throws ModelViolation on any mismatch.
TwoUserSimResult simulate_two_user(const TwoUserParams& params, std::uint64_t n_slots,
                                   std::uint64_t seed, std::uint64_t batches = 100);

// Restart mode first-delivery times of `user` (0 or 1) from the empty state.
std::vector<std::uint64_t> sample_two_user_first_delivery(const TwoUserParams& params, int user,
                                                          std::size_t samples, std::uint64_t seed,
                                                          std::uint64_t horizon = 100'000);

}  // namespace streamlab
