#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streamlab/model.hpp"

namespace streamlab {

// "start:stop:step", stop inclusive up to rounding.
std::vector<double> parse_sweep(std::string_view spec);

struct P2pRow {
  std::string scheme;
  double p = 0.0;
  std::string d;  // "inf" for codes without feedback
  double tau = 0.0;
  double lambda = 0.0;
  std::optional<double> p_d;
  std::optional<double> expected_innovative;
  std::optional<bool> on_hull;
};

struct P2pFamilies {
  bool arq = true;
  bool no_feedback = true;
  bool proposed = true;
};

// ARQ point, the no-feedback curve r = 0..p in `steps` steps, and the proposed
// family for each d.
std::vector<P2pRow> p2p_tradeoff_table(double p, std::span<const int> ds, P2pFamilies families,
                                       int steps = 100);

// All canonical schemes of block length d with hull membership.
std::vector<P2pRow> hull_table(double p, int d);

void write_p2p_csv(std::ostream& out, const std::vector<P2pRow>& rows, const std::string& invocation,
                   bool with_hull_column = false);

struct MulticastRow {
  TwoUserParams params{};
  std::optional<double> tau1, lambda1, tau2, lambda2;
  double rho = 0.0, mu = 0.0;
  bool stable_right = false, stable_left = false;
  std::optional<double> tau1_sim, tau2_sim;
};

MulticastRow multicast_row(const TwoUserParams& params);
void write_multicast_csv(std::ostream& out, const std::vector<MulticastRow>& rows,
                         const std::string& invocation, bool with_sim_columns = false);

// Series behind the multicast figures.
std::vector<MulticastRow> fig5_rows(double p1, std::span<const double> p2_values);
std::vector<MulticastRow> fig7_rows(double p1, double p2, double q1, std::span<const double> q2_values);
std::vector<MulticastRow> fig8_rows(std::span<const double> p_values, std::span<const double> q_values);

}  // namespace streamlab
