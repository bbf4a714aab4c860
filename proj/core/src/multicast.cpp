#include "streamlab/multicast.hpp"

#include <cmath>
#include <string>

#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab {

namespace {

std::string describe(ChainState s) {
  return std::to_string(s.index) + (s.advantage ? "'" : "");
}

// Smaller root of alpha_3 x^2 + (alpha_3 + alpha_2) x - alpha_0 = 0, the
// cubic with its root at 1 divided out.
double smaller_ratio(const std::array<double, 4>& al) {
  if (al[3] == 0.0) return al[0] / al[2];
  const double s = al[3] + al[2];
  const double disc = s * s + 4.0 * al[3] * al[0];
  if (disc < -1e-14) {
    throw ModelViolation("negative discriminant in the tail-ratio quadratic");
  }
  return -s / (2.0 * al[3]) - std::sqrt(std::max(disc, 0.0)) / (2.0 * al[3]);
}

}  // namespace

ChainState TwoUserState::chain_state() const {
  const PacketIndex top = r_max();
  std::array<long, 2> gaps{};
  for (int k = 0; k < 2; ++k) {
    const auto& u = users_[k];
    if (!u.beyond.empty() && *u.beyond.rbegin() > top) {
      throw ModelViolation("a user holds a packet above r_max");
    }
    // Nothing above r_max is ever held, so only r_max itself can sit at or
    // above the cut.
    const auto below = static_cast<long>(u.beyond.size() - u.beyond.count(top));
    gaps[k] = static_cast<long>(top - 1 - u.delivered) - below;
  }
  ChainState s;
  s.index = static_cast<int>(gaps[1] - gaps[0]);
  if (required(0) != required(1)) {
    const int lagger = 1 - leader();
    s.advantage = has(lagger, top);
  }
  return s;
}

std::array<std::uint64_t, 2> TwoUserState::apply(const Transmission& tx, bool received1,
                                                 bool received2) {
  std::array<std::uint64_t, 2> released{};
  const std::array<bool, 2> received{received1, received2};
  for (int k = 0; k < 2; ++k) {
    if (!received[k]) continue;
    PacketIndex learn = 0;
    if (tx.kind == Transmission::Kind::kSingle) {
      if (!has(k, tx.first)) learn = tx.first;
    } else {
      const bool h1 = has(k, tx.first), h2 = has(k, tx.second);
      if (!h1 && !h2) throw ModelViolation("XOR reached a user holding neither packet");
      if (h1 && !h2) learn = tx.second;
      if (h2 && !h1) learn = tx.first;
    }
    if (learn == 0) continue;
    auto& u = users_[k];
    if (learn != u.delivered + 1) {
      u.beyond.insert(learn);
      continue;
    }
    ++u.delivered;
    ++released[k];
    auto it = u.beyond.begin();
    while (it != u.beyond.end() && *it == u.delivered + 1) {
      ++u.delivered;
      ++released[k];
      it = u.beyond.erase(it);
    }
  }
  return released;
}

Transmission choose_transmission(const TwoUserState& state, double q1, double q2, double draw) {
  const PacketIndex r1 = state.required(0), r2 = state.required(1);
  if (r1 == r2) return {Transmission::Kind::kSingle, r1, 0};
  const int lagger = 1 - state.leader();
  const PacketIndex lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (state.has(lagger, hi)) return {Transmission::Kind::kXor, lo, hi};
  const double q = lagger == 0 ? q1 : q2;
  return {Transmission::Kind::kSingle, draw < q ? lo : hi, 0};
}

ChainState chain_step(ChainState s, ChainMove move, bool received1, bool received2) {
  if (s.index == 0) {
    if (received1 && !received2) return {1, false};
    if (received2 && !received1) return {-1, false};
    return s;
  }
  const int sign = s.index > 0 ? 1 : -1;
  const int g = std::abs(s.index);
  const bool lead = sign > 0 ? received1 : received2;
  const bool lag = sign > 0 ? received2 : received1;
  auto at = [&](int gaps, bool adv) { return ChainState{sign * gaps, gaps == 0 ? false : adv}; };

  if (!s.advantage) {
    if (move == ChainMove::kLaggerPacket) return lag ? at(g - 1, false) : s;
    if (lead && !lag) return at(g + 1, false);
    if (lag && !lead) return at(g, true);
    return s;
  }
  if (lead && lag) return at(g - 1, false);
  if (lead) return at(g, false);
  if (lag) return g == 1 ? ChainState{-sign, false} : at(g - 1, true);
  return s;
}

std::array<double, 4> right_recurrence_coefficients(const TwoUserParams& P) {
  const double db = P.dbar(), q = P.q2, qb = 1.0 - P.q2;
  return {-db * P.b * qb, db * (db - P.b * q - P.a * qb),
          -P.c * db + P.b * P.c * q - (P.a + P.c) * q * db, P.c * (P.a + P.c) * q};
}

PriorityRoots priority_q_roots(const TwoUserParams& params) {
  PriorityRoots r;
  r.alpha = right_recurrence_coefficients(params);
  r.beta = right_recurrence_coefficients(params.mirrored());
  r.rho = smaller_ratio(r.alpha);
  r.mu = smaller_ratio(r.beta);
  r.stable_right = r.rho < 1.0;
  r.stable_left = r.mu < 1.0;
  return r;
}

double priority_xi2(const TwoUserParams& P) {
  const double d = P.dd, a = P.a, b = P.b, c = P.c;
  const double q1b = 1.0 - P.q1, q2b = 1.0 - P.q2;
  const double left = d + P.q1 * c + q1b * b;
  const double s = 2 * d + q2b * a + b;
  const double disc = s * s - 4 * (d * (b + d) + q2b * (d * a - b * c));
  return std::max(left, (s + std::sqrt(std::max(disc, 0.0))) / 2);
}

double ChainSolution::pi(int i) const {
  if (i == 0) return pi0;
  if (i > 0) return pi1 * std::pow(rho, i - 1);
  return pi_m1 * std::pow(mu, -i - 1);
}

double ChainSolution::pi_adv(int i) const {
  if (i == 0) return 0.0;
  return (i > 0 ? kappa_right : kappa_left) * pi(i);
}

double ChainSolution::origin_balance_residual() const {
  const auto& P = params;
  const double out = (P.dbar() - P.a) * pi0;
  const double in = P.a * (pi_adv(1) + pi_adv(-1)) + P.q1 * (P.a + P.b) * pi_m1 +
                    P.q2 * (P.a + P.c) * pi1;
  return out - in;
}

ChainSolution priority_q_solution(const TwoUserParams& params) {
  const auto& P = params;
  const auto roots = priority_q_roots(P);
  ChainSolution s;
  s.params = P;
  s.rho = roots.rho;
  s.mu = roots.mu;
  s.stable_right = roots.stable_right;
  s.stable_left = roots.stable_left;
  s.xi2 = priority_xi2(P);
  s.xi1 = priority_xi2(P.mirrored());
  s.lambda2 = -std::log(s.xi2);
  s.lambda1 = -std::log(s.xi1);
  s.stationary = s.stable_right && s.stable_left;

  if (s.stationary) {
    const double db = P.dbar(), a = P.a, b = P.b, c = P.c;
    const double q1 = P.q1, q2 = P.q2;
    s.kappa_right = (1 - q2) * c / (db - c * s.rho);
    s.kappa_left = (1 - q1) * b / (db - b * s.mu);
    const double kr = s.kappa_right, kl = s.kappa_left;
    // Unknowns (pi0, pi1, pi_-1): balance at 1, balance at -1, normalisation.
    const double m[3][3] = {
        {-b, (db - (1 - q2) * a - q2 * b) - q2 * (a + c) * s.rho - b * kr - a * kr * s.rho, -b * kl},
        {-c, -c * kr, (db - (1 - q1) * a - q1 * c) - q1 * (a + b) * s.mu - c * kl - a * kl * s.mu},
        {1.0, (1 + kr) / (1 - s.rho), (1 + kl) / (1 - s.mu)}};
    const double rhs[3] = {0.0, 0.0, 1.0};
    auto det3 = [](const double x[3][3]) {
      return x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1]) -
             x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0]) +
             x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]);
    };
    const double det = det3(m);
    double sol[3];
    for (int col = 0; col < 3; ++col) {
      double t[3][3];
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) t[r][k] = k == col ? rhs[r] : m[r][k];
      }
      sol[col] = det3(t) / det;
    }
    s.pi0 = sol[0];
    s.pi1 = sol[1];
    s.pi_m1 = sol[2];
    s.tau1 = P.p1 * (1 - q2 * s.pi1 / (1 - s.rho));
    s.tau2 = P.p2 * (1 - q1 * s.pi_m1 / (1 - s.mu));
  } else {
    s.pi0 = s.pi1 = s.pi_m1 = std::nan("");
    // With no priority ever given to the other user and no drift toward
    // this user lagging, every reception is innovative and in order.
    if (P.q2 == 0.0 && s.mu <= 1.0) s.tau1 = P.p1;
    if (P.q1 == 0.0 && s.rho <= 1.0) s.tau2 = P.p2;
  }
  return s;
}

ChainSolution fixed_priority_stationary(double p1, double p2) {
  if (!(p1 < p2)) {
    throw StabilityError("fixed-priority chain is positive recurrent only for p1 < p2");
  }
  return priority_q_solution(TwoUserParams::make(p1, p2, 1.0, 0.0));
}

FixedPriorityTradeoff fixed_priority_tradeoff(double p1, double p2) {
  const auto P = TwoUserParams::make(p1, p2, 1.0, 0.0);
  FixedPriorityTradeoff t;
  t.tau1 = p1;
  t.lambda1 = -std::log1p(-p1);
  if (p2 > p1) t.tau2 = p1;
  const double s = 1 - P.c + P.dd;
  const double root = (s + std::sqrt(s * s + 4 * (P.b * P.c + P.c * P.dd - P.dd))) / 2;
  t.xi2 = std::max(root, 1 - p1);
  t.lambda2 = -std::log(t.xi2);
  return t;
}

double stability_threshold_q2(double p1, double p2, double q1) {
  auto rho = [&](double q2) { return priority_q_roots(TwoUserParams::make(p1, p2, q1, q2)).rho; };
  double lo = 0.0, hi = 1.0;
  if (rho(lo) <= 1.0) return 0.0;
  if (rho(hi) > 1.0) throw StabilityError("right side unstable for every q2");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rho(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

namespace {

ChainMove classify(const TwoUserState& st, const Transmission& tx) {
  if (st.required(0) == st.required(1)) return ChainMove::kCommon;
  if (tx.kind == Transmission::Kind::kXor) return ChainMove::kXor;
  return tx.first == st.r_min() ? ChainMove::kLaggerPacket : ChainMove::kLeaderPacket;
}

void check_structure(const TwoUserState& st, const Transmission& tx, ChainState cs,
                     ChainMove move, std::uint64_t slot) {
  const PacketIndex r1 = st.required(0), r2 = st.required(1);
  auto allowed = [&](PacketIndex k) { return k == r1 || k == r2; };
  bool ok = allowed(tx.first) && (tx.kind == Transmission::Kind::kSingle || allowed(tx.second));
  if (tx.kind == Transmission::Kind::kXor) {
    ok = ok && r1 != r2 && st.has(0, r2) && st.has(1, r1);
  }
  ok = ok && ((cs.index == 0) == (move == ChainMove::kCommon)) &&
       (cs.advantage == (move == ChainMove::kXor));
  if (!ok) {
    throw ModelViolation("slot " + std::to_string(slot) + ": transmission outside the code structure in state " +
                         describe(cs));
  }
}

// Counts per chain state within one batch, indexed densely around 0.
class StateCounter {
 public:
  void add(ChainState s) {
    const long key = 2L * s.index + (s.advantage ? 1 : 0) + offset_;
    if (key < 0 || key >= static_cast<long>(counts_.size())) grow(key);
    ++counts_[static_cast<std::size_t>(2L * s.index + (s.advantage ? 1 : 0) + offset_)];
  }
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (!counts_[k]) continue;
      const long v = static_cast<long>(k) - offset_;
      const long idx = (v - ((v % 2 + 2) % 2)) / 2;
      f(ChainState{static_cast<int>(idx), (v % 2 + 2) % 2 == 1}, counts_[k]);
    }
  }

 private:
  void grow(long key) {
    const long extra = std::max<long>(64, std::abs(key) * 2);
    if (key < 0) {
      counts_.insert(counts_.begin(), static_cast<std::size_t>(extra), 0);
      offset_ += extra;
    } else {
      counts_.resize(counts_.size() + static_cast<std::size_t>(extra), 0);
    }
  }
  std::vector<std::uint64_t> counts_ = std::vector<std::uint64_t>(128, 0);
  long offset_ = 64;
};

}  // namespace

TwoUserSimResult simulate_two_user(const TwoUserParams& params, std::uint64_t n_slots,
                                   std::uint64_t seed, std::uint64_t batches) {
  if (n_slots == 0) throw InvalidArgument("n_slots must be positive");
  if (batches < 2 || batches > n_slots) throw InvalidArgument("bad batch count");
  TwoUserSimResult out;
  out.params = params;
  out.n_slots = n_slots;
  out.batches = batches;

  const CounterRng priority(seed, stream_id(Stream::kPriority, 0));
  TwoUserState st;
  std::array<std::uint64_t, 2> last_event{};
  std::vector<StateCounter> per_batch(batches);
  const std::uint64_t batch_len = n_slots / batches;

  for (std::uint64_t n = 1; n <= n_slots; ++n) {
    const ChainState cs = st.chain_state();
    const std::uint64_t batch = std::min((n - 1) / batch_len, batches - 1);
    per_batch[batch].add(cs);

    const Transmission tx = choose_transmission(st, params.q1, params.q2, priority.uniform_at(n));
    const ChainMove move = classify(st, tx);
    check_structure(st, tx, cs, move, n);
    if (tx.kind == Transmission::Kind::kXor) ++out.xor_transmissions;

    const bool rx1 = channel_success(seed, 0, 0, n, params.p1);
    const bool rx2 = channel_success(seed, 0, 1, n, params.p2);
    const auto released = st.apply(tx, rx1, rx2);
    const ChainState expected = chain_step(cs, move, rx1, rx2);
    const ChainState actual = st.chain_state();
    if (expected != actual) {
      throw ModelViolation("slot " + std::to_string(n) + ": observed " + describe(cs) + " -> " +
                           describe(actual) + ", chain predicts " + describe(expected));
    }
    for (int k = 0; k < 2; ++k) {
      auto& u = out.users[static_cast<std::size_t>(k)];
      u.successes += (k == 0 ? rx1 : rx2) ? 1 : 0;
      if (released[k]) {
        u.delivered += released[k];
        u.inter_delivery_times.push_back(n - last_event[k]);
        last_event[k] = n;
      }
    }
  }

  for (auto& u : out.users) {
    u.tau_hat = static_cast<double>(u.delivered) / static_cast<double>(n_slots);
    u.tau_se = std::sqrt(u.tau_hat * (1 - u.tau_hat) / static_cast<double>(n_slots));
  }

  std::map<ChainState, std::vector<double>> freq;
  for (std::uint64_t b = 0; b < batches; ++b) {
    const double len = static_cast<double>(b + 1 == batches ? n_slots - b * batch_len : batch_len);
    per_batch[b].for_each([&](ChainState s, std::uint64_t count) {
      out.occupancy[s] += count;
      auto& v = freq[s];
      v.resize(batches, 0.0);
      v[b] = static_cast<double>(count) / len;
    });
  }
  for (auto& [s, v] : freq) {
    double mean = 0, var = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(batches);
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(batches - 1);
    out.occupancy_se[s] = std::sqrt(var / static_cast<double>(batches));
  }
  return out;
}

std::vector<std::uint64_t> sample_two_user_first_delivery(const TwoUserParams& params, int user,
                                                          std::size_t samples, std::uint64_t seed,
                                                          std::uint64_t horizon) {
  if (user != 0 && user != 1) throw InvalidArgument("user must be 0 or 1");
  std::vector<std::uint64_t> out;
  out.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const CounterRng priority(seed, stream_id(Stream::kPriority, s + 1));
    TwoUserState st;
    std::uint64_t n = 0;
    while (n < horizon && st.delivered(user) == 0) {
      ++n;
      const auto tx = choose_transmission(st, params.q1, params.q2, priority.uniform_at(n));
      st.apply(tx, channel_success(seed, s + 1, 0, n, params.p1),
               channel_success(seed, s + 1, 1, n, params.p2));
    }
    out.push_back(n);
  }
  return out;
}

}  // namespace streamlab
