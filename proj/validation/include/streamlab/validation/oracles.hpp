#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamlab/model.hpp"

// Independent reference computations. None of these reuse the closed forms
// they are compared against.
namespace streamlab::validation {

// Second largest eigenvalue (by modulus, after the absorbing 1) of the
// 5x5 first-delivery matrix of user 2, states ordered [0, I, I', L, F].
double fixed_priority_matrix_xi2(double p1, double p2);
double priority_matrix_xi2(const TwoUserParams& params);

// Stationary law of the two-user chain cut at |i| <= max_index, solved by
// dense LU. Moves past the cut stay in place.
struct TruncatedChain {
  int max_index = 0;
  std::vector<double> plain;      // index + max_index
  std::vector<double> advantage;  // index + max_index, zero at index 0
  double residual = 0.0;          // max |pi P - pi|

  double pi(int i) const { return plain[static_cast<std::size_t>(i + max_index)]; }
  double pi_adv(int i) const { return advantage[static_cast<std::size_t>(i + max_index)]; }
};
TruncatedChain truncated_chain_stationary(const TwoUserParams& params, int max_index = 200);

// Exact Pr(T_1 > n), n = 0..n_max, for the full-rank code at rate r.
std::vector<double> full_rank_survival(double r, double p, std::uint64_t n_max);

// Exact Pr(D_k > n), n = 0..n_blocks * d, for a block scheme under the
// seen-packet bookkeeping; the state is the delivered count and the seen
// gaps between unseen packets.
std::vector<double> block_delay_survival(const SchemeVector& x, double p, std::uint64_t k,
                                         std::uint64_t n_blocks);

// Width rules against elimination over the field.
struct PrefixOracleReport {
  std::size_t exhaustive_cases = 0;
  std::size_t random_cases = 0;
  std::size_t rank_mismatches = 0;
  std::size_t prefix_mismatches = 0;
  std::string first_mismatch;
};
PrefixOracleReport check_prefix_rules(int max_total_width, std::size_t random_cases,
                                      std::uint64_t seed);

}  // namespace streamlab::validation
