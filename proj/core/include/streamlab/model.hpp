#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamlab {

// Per-user slot outcomes; slot indices are 1-based.
class ErasureTrace {
 public:
  ErasureTrace() = default;
  explicit ErasureTrace(std::vector<std::vector<bool>> outcomes);

  std::size_t users() const { return outcomes_.size(); }
  std::size_t slots() const { return outcomes_.empty() ? 0 : outcomes_.front().size(); }
  bool success(std::size_t user, std::uint64_t slot) const {
    return outcomes_[user][slot - 1];
  }
  const std::vector<bool>& user(std::size_t k) const { return outcomes_[k]; }

 private:
  std::vector<std::vector<bool>> outcomes_;
};

// Slot n of user k is Bernoulli(p_k), drawn from the counter stream
// (seed, k) so any prefix of a longer trace matches a shorter one.
ErasureTrace sample_trace(std::span<const double> p, std::uint64_t n_slots, std::uint64_t seed);

// x = [x_1..x_d]: per block, x_i combinations of the i lowest unseen packets.
class SchemeVector {
 public:
  explicit SchemeVector(std::vector<int> parts);

  static SchemeVector parse(std::string_view text);
  std::string to_string() const;

  int block_length() const { return static_cast<int>(parts_.size()); }
  int operator[](int i) const { return parts_[static_cast<std::size_t>(i - 1)]; }
  const std::vector<int>& parts() const { return parts_; }

  // Widths of the block's combinations in transmission order (ascending).
  std::vector<int> widths() const;

  friend bool operator==(const SchemeVector&, const SchemeVector&) = default;
  friend auto operator<=>(const SchemeVector&, const SchemeVector&) = default;

 private:
  std::vector<int> parts_;
};

SchemeVector canonicalize_scheme(const SchemeVector& x);

// Canonical classes of block length d with x_1 >= 1, lexicographically sorted.
std::vector<SchemeVector> enumerate_schemes(int d);

// All compositions of d into d non-negative parts (no canonicalisation).
std::vector<SchemeVector> all_compositions(int d);

struct TradeoffPoint {
  enum class Kind { kAnalytic, kEstimated };
  double tau = 0.0;
  double lambda = 0.0;
  Kind kind = Kind::kAnalytic;
  std::optional<double> ci_halfwidth;
};

struct TwoUserParams {
  double p1, p2, q1, q2;
  double a, b, c, dd;

  static TwoUserParams make(double p1, double p2, double q1, double q2);

  // U1 and U2 exchanged (b <-> c, q1 <-> q2).
  TwoUserParams mirrored() const { return make(p2, p1, q2, q1); }
  double dbar() const { return 1.0 - dd; }
};

}  // namespace streamlab

namespace streamlab {

// Outcome of one channel use; sample_trace is trial 0 of this family.
bool channel_success(std::uint64_t seed, std::uint64_t trial, std::size_t user,
                     std::uint64_t slot, double p);

}  // namespace streamlab
