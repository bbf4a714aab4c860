#include "streamlab/validation/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fmt/format.h>

#include "streamlab/decoder.hpp"
#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab::validation {

namespace {

double second_eigenvalue(const Eigen::Matrix<double, 5, 5>& m) {
  Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> solver(m, false);
  std::vector<std::complex<double>> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(ev.begin(), ev.end(),
            [](auto x, auto y) { return std::abs(x) > std::abs(y); });
  return std::abs(ev[1]);
}

}  // namespace

double fixed_priority_matrix_xi2(double p1, double p2) {
  const auto t = TwoUserParams::make(p1, p2, 1.0, 0.0);
  const double a = t.a, b = t.b, c = t.c, d = t.dd;
  Eigen::Matrix<double, 5, 5> m;
  m << d, b, 0, 0, a + c,
       0, a + b + d, c, 0, 0,
       0, b, d, 0, a + c,
       a + b, 0, 0, c + d, 0,
       0, 0, 0, 0, 1;
  return second_eigenvalue(m);
}

double priority_matrix_xi2(const TwoUserParams& t) {
  const double a = t.a, b = t.b, c = t.c, d = t.dd;
  const double q1 = t.q1, q2 = t.q2;
  Eigen::Matrix<double, 5, 5> m;
  m << d, b, 0, 0, a + c,
       0, (1 - q2) * a + b + d, c * (1 - q2), 0, q2 * (a + c),
       0, b, d, 0, a + c,
       q1 * (a + b), 0, 0, d + q1 * c + (1 - q1) * b, (1 - q1) * (a + c),
       0, 0, 0, 0, 1;
  return second_eigenvalue(m);
}

TruncatedChain truncated_chain_stationary(const TwoUserParams& t, int max_index) {
  if (max_index < 2) throw InvalidArgument("truncation index too small");
  const int n = max_index;
  const int width = 2 * n + 1;
  const int size = 2 * width;
  auto plain = [&](int i) { return i + n; };
  auto adv = [&](int i) { return width + i + n; };

  std::vector<Eigen::Triplet<double>> edges;  // (from, to, probability)
  auto add = [&](int from, int to, double prob) {
    if (prob != 0.0) edges.emplace_back(from, to, prob);
  };

  add(plain(0), plain(0), t.a + t.dd);
  add(plain(0), plain(1), t.b);
  add(plain(0), plain(-1), t.c);
  for (int i = -n; i <= n; ++i) {
    if (i == 0) continue;
    const int sg = i > 0 ? 1 : -1;
    const int g = std::abs(i);
    // Right side: U1 leads, U2 lags; the left side swaps the users.
    const double q = sg > 0 ? t.q2 : t.q1;
    const double lead = sg > 0 ? t.b : t.c;
    const double lag = sg > 0 ? t.c : t.b;
    const int self = plain(i);
    const int out = g == n ? self : plain(sg * (g + 1));

    add(self, plain(sg * (g - 1)), q * (t.a + lag));
    add(self, self, q * (lead + t.dd) + (1 - q) * (t.a + t.dd));
    add(self, out, (1 - q) * lead);
    add(self, adv(i), (1 - q) * lag);

    const int a_self = adv(i);
    add(a_self, plain(sg * (g - 1)), t.a);
    add(a_self, plain(i), lead);
    add(a_self, g > 1 ? adv(sg * (g - 1)) : plain(-sg), lag);
    add(a_self, a_self, t.dd);
  }

  // Rows: balance equations of pi, with the state-0 row replaced by the
  // normalisation and the unused advantage slot at the origin pinned to 0.
  std::vector<Eigen::Triplet<double>> a;
  for (const auto& e : edges) {
    if (e.col() == plain(0)) continue;
    a.emplace_back(e.col(), e.row(), e.value());
  }
  for (int s = 0; s < size; ++s) {
    if (s == plain(0)) continue;
    a.emplace_back(s, s, -1.0);
  }
  for (int s = 0; s < size; ++s) a.emplace_back(plain(0), s, 1.0);
  Eigen::SparseMatrix<double> sys(size, size);
  sys.setFromTriplets(a.begin(), a.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[plain(0)] = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) throw StabilityError("truncated chain solve failed");
  const Eigen::VectorXd pi = lu.solve(rhs);

  Eigen::SparseMatrix<double> p(size, size);
  p.setFromTriplets(edges.begin(), edges.end());
  const Eigen::VectorXd moved = p.transpose() * pi;

  TruncatedChain out;
  out.max_index = n;
  out.plain.assign(pi.data(), pi.data() + width);
  out.advantage.assign(pi.data() + width, pi.data() + size);
  out.residual = (moved - pi).cwiseAbs().maxCoeff();
  return out;
}

std::vector<double> full_rank_survival(double r, double p, std::uint64_t n_max) {
  if (!(r > 0.0 && r < 1.0) || !(p > 0.0 && p < 1.0)) throw InvalidArgument("need r, p in (0,1)");
  std::map<std::uint64_t, double> alive{{0, 1.0}};  // successes so far
  std::vector<double> s{1.0};
  for (std::uint64_t j = 1; j <= n_max; ++j) {
    const auto v = static_cast<std::uint64_t>(std::ceil(r * static_cast<double>(j) - 1e-9));
    std::map<std::uint64_t, double> next;
    for (const auto& [e, prob] : alive) {
      if (e + 1 < v) next[e + 1] += prob * p;
      if (e < v) next[e] += prob * (1 - p);
    }
    alive = std::move(next);
    double total = 0.0;
    for (const auto& kv : alive) total += kv.second;
    s.push_back(total);
  }
  return s;
}

namespace {

// Positions taken by each reception: widest first, highest free slot.
std::set<int> seen_positions(std::vector<int> widths) {
  std::sort(widths.rbegin(), widths.rend());
  std::set<int> used;
  for (int w : widths) {
    for (int pos = w; pos >= 1; --pos) {
      if (used.insert(pos).second) break;
    }
  }
  return used;
}

}  // namespace

std::vector<double> block_delay_survival(const SchemeVector& x, double p, std::uint64_t k,
                                         std::uint64_t n_blocks) {
  if (k < 1) throw InvalidArgument("k must be positive");
  const int d = x.block_length();
  if (d > 12) throw InvalidArgument("block too long for the exact recursion");
  const std::vector<int> widths = x.widths();
  const auto cap = static_cast<int>(k);
  using State = std::pair<std::uint64_t, std::vector<int>>;  // delivered, seen gaps

  auto released = [](int m, const std::vector<int>& g) {
    std::uint64_t dl = static_cast<std::uint64_t>(m);
    for (int i = 0; i < m && i < static_cast<int>(g.size()); ++i) dl += static_cast<std::uint64_t>(g[static_cast<std::size_t>(i)]);
    return dl;
  };

  std::map<State, double> states{{{0, {}}, 1.0}};
  std::vector<double> s{1.0};
  for (std::uint64_t blk = 0; blk < n_blocks; ++blk) {
    std::vector<double> inside(static_cast<std::size_t>(d), 0.0);
    std::map<State, double> next;
    for (const auto& [state, weight] : states) {
      const auto& [delivered, gaps] = state;
      for (std::uint32_t mask = 0; mask < (1U << d); ++mask) {
        double prob = weight;
        std::vector<int> rec;
        for (int t = 0; t < d; ++t) {
          const bool ok = mask >> t & 1U;
          prob *= ok ? p : 1 - p;
        }
        for (int t = 0; t < d; ++t) {
          if (mask >> t & 1U) {
            rec.push_back(widths[static_cast<std::size_t>(t)]);
            std::sort(rec.begin(), rec.end());
          }
          const int m = prefix_decodable_count(rec);
          if (delivered + released(m, gaps) < k) inside[static_cast<std::size_t>(t)] += prob;
        }
        const int m = prefix_decodable_count(rec);
        const std::uint64_t now = delivered + released(m, gaps);
        if (now >= k) continue;

        // Lay out unseen (false) and seen (true) packets from the first
        // unseen one, mark the new seen positions, drop the seen prefix.
        const std::set<int> taken = seen_positions(rec);
        const int length = std::max(static_cast<int>(gaps.size()) + 1, d + 1);
        std::vector<bool> seq;
        for (int j = 1; j <= length; ++j) {
          seq.push_back(taken.count(j) > 0);
          const int gap = j - 1 < static_cast<int>(gaps.size()) ? gaps[static_cast<std::size_t>(j - 1)] : 0;
          seq.insert(seq.end(), static_cast<std::size_t>(gap), true);
        }
        std::size_t lead = 0;
        while (lead < seq.size() && seq[lead]) ++lead;
        if (delivered + lead != now) {
          throw ModelViolation(fmt::format("seen prefix {} disagrees with release {}", lead,
                                           now - delivered));
        }
        // Seen packets between consecutive unseen ones.
        std::vector<int> g2;
        int cur = 0;
        for (std::size_t i = lead + 1; i < seq.size(); ++i) {
          if (!seq[i]) {
            g2.push_back(cur);
            cur = 0;
          } else {
            ++cur;
          }
        }
        g2.push_back(cur);
        while (!g2.empty() && g2.back() == 0) g2.pop_back();
        if (g2.size() > static_cast<std::size_t>(cap)) g2.resize(static_cast<std::size_t>(cap));
        for (int& v : g2) v = std::min(v, cap);
        next[{now, g2}] += prob;
      }
    }
    states = std::move(next);
    s.insert(s.end(), inside.begin(), inside.end());
  }
  return s;
}

PrefixOracleReport check_prefix_rules(int max_total_width, std::size_t random_cases,
                                      std::uint64_t seed) {
  PrefixOracleReport report;
  std::uint64_t key = 0;

  auto check = [&](std::vector<int> widths) {
    std::sort(widths.begin(), widths.end());
    const int top = widths.empty() ? 1 : widths.back();
    std::vector<CodedCombo> combos;
    for (int w : widths) {
      std::vector<PacketIndex> support;
      for (int i = 1; i <= w; ++i) support.push_back(static_cast<PacketIndex>(i));
      combos.push_back(make_random_combo(std::move(support), key++, mix64(seed)));
    }
    std::vector<PacketIndex> unknowns;
    for (int i = 1; i <= top; ++i) unknowns.push_back(static_cast<PacketIndex>(i));
    const auto ref = generic_rank(combos, unknowns);
    int prefix = 0;
    while (prefix < top && std::binary_search(ref.determined.begin(), ref.determined.end(),
                                              static_cast<PacketIndex>(prefix + 1))) {
      ++prefix;
    }
    const int rank = prefix_rank(widths);
    const int decodable = prefix_decodable_count(widths);
    const bool rank_bad = rank != static_cast<int>(ref.rank);
    const bool prefix_bad = decodable != prefix;
    report.rank_mismatches += rank_bad;
    report.prefix_mismatches += prefix_bad;
    if ((rank_bad || prefix_bad) && report.first_mismatch.empty()) {
      report.first_mismatch = fmt::format("widths [{}]: rule rank {} prefix {}, field rank {} prefix {}",
                                          fmt::join(widths, ","), rank, decodable, ref.rank, prefix);
    }
  };

  // Partitions of every total up to the bound, parts non-increasing.
  std::vector<int> parts;
  auto partitions = [&](auto&& self, int remaining, int largest) -> void {
    check(parts);
    ++report.exhaustive_cases;
    for (int w = std::min(remaining, largest); w >= 1; --w) {
      parts.push_back(w);
      self(self, remaining - w, w);
      parts.pop_back();
    }
  };
  partitions(partitions, max_total_width, max_total_width);

  CounterRng rng(seed, static_cast<std::uint64_t>(Stream::kTrace), 0x0dac1e);
  for (std::size_t c = 0; c < random_cases; ++c) {
    const int count = 1 + static_cast<int>(rng.next() % 12);
    std::vector<int> widths;
    for (int i = 0; i < count; ++i) widths.push_back(1 + static_cast<int>(rng.next() % 16));
    check(widths);
    ++report.random_cases;
  }
  return report;
}

}  // namespace streamlab::validation
