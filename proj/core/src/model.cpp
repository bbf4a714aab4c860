#include "streamlab/model.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab {

ErasureTrace::ErasureTrace(std::vector<std::vector<bool>> outcomes)
    : outcomes_(std::move(outcomes)) {
  for (const auto& u : outcomes_) {
    if (u.size() != outcomes_.front().size()) {
      throw InvalidArgument("trace users have different lengths");
    }
  }
}

bool channel_success(std::uint64_t seed, std::uint64_t trial, std::size_t user,
                     std::uint64_t slot, double p) {
  const CounterRng rng(seed, stream_id(Stream::kChannel, trial), user);
  return rng.bernoulli_at(slot, p);
}

ErasureTrace sample_trace(std::span<const double> p, std::uint64_t n_slots, std::uint64_t seed) {
  if (p.empty() || p.size() > 2) throw InvalidArgument("trace needs one or two users");
  if (n_slots == 0) throw InvalidArgument("n_slots must be positive");
  for (double pk : p) {
    if (!(pk > 0.0 && pk < 1.0)) throw InvalidArgument("success probability must lie in (0,1)");
  }
  std::vector<std::vector<bool>> out(p.size(), std::vector<bool>(n_slots));
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::uint64_t n = 1; n <= n_slots; ++n) {
      out[k][n - 1] = channel_success(seed, 0, k, n, p[k]);
    }
  }
  return ErasureTrace(std::move(out));
}

SchemeVector::SchemeVector(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw InvalidArgument("scheme vector needs d >= 1");
  long sum = 0;
  for (int v : parts_) {
    if (v < 0) throw InvalidArgument("scheme entries must be non-negative");
    sum += v;
  }
  if (sum != static_cast<long>(parts_.size())) {
    throw InvalidArgument("scheme entries must sum to the block length");
  }
}

SchemeVector SchemeVector::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw InvalidArgument("scheme must look like [x1,x2,...]");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<int> parts;
  while (true) {
    const auto comma = text.find(',');
    const auto token = trim(text.substr(0, comma));
    int v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw InvalidArgument("bad scheme entry '" + std::string(token) + "'");
    }
    parts.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return SchemeVector(std::move(parts));
}

std::string SchemeVector::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts_[i]);
  }
  return s + "]";
}

std::vector<int> SchemeVector::widths() const {
  std::vector<int> w;
  w.reserve(parts_.size());
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    w.insert(w.end(), static_cast<std::size_t>(parts_[i]), static_cast<int>(i + 1));
  }
  return w;
}

SchemeVector canonicalize_scheme(const SchemeVector& x) {
  std::vector<int> v = x.parts();
  if (v[0] < 1) return x;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (v[i] == 0 && v[i + 1] >= 1) {
        v[i] = 1;
        v[i + 1] -= 1;
        changed = true;
        break;
      }
    }
  }
  return SchemeVector(std::move(v));
}

namespace {

void compositions(int remaining, std::size_t slot, std::vector<int>& cur,
                  std::vector<SchemeVector>& out) {
  if (slot + 1 == cur.size()) {
    cur[slot] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur[slot] = v;
    compositions(remaining - v, slot + 1, cur, out);
  }
}

constexpr int kMaxEnumeration = 12;

}  // namespace

std::vector<SchemeVector> all_compositions(int d) {
  if (d < 1 || d > kMaxEnumeration) throw InvalidArgument("block length outside [1,12]");
  std::vector<SchemeVector> out;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  compositions(d, 0, cur, out);
  return out;
}

std::vector<SchemeVector> enumerate_schemes(int d) {
  std::set<SchemeVector> classes;
  for (const auto& x : all_compositions(d)) {
    if (x[1] >= 1) classes.insert(canonicalize_scheme(x));
  }
  return {classes.begin(), classes.end()};
}

TwoUserParams TwoUserParams::make(double p1, double p2, double q1, double q2) {
  for (double p : {p1, p2}) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p1, p2 must lie in (0,1)");
  }
  for (double q : {q1, q2}) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("q1, q2 must lie in [0,1]");
  }
  return TwoUserParams{p1, p2, q1, q2, p1 * p2, p1 * (1 - p2), (1 - p1) * p2,
                       (1 - p1) * (1 - p2)};
}

}  // namespace streamlab
