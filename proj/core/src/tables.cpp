#include "streamlab/tables.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "streamlab/analytic.hpp"
#include "streamlab/csv.hpp"
#include "streamlab/errors.hpp"
#include "streamlab/multicast.hpp"
#include "streamlab/sim.hpp"

namespace streamlab {

namespace {

double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InvalidArgument("bad number '" + s + "' in sweep");
  }
  return v;
}

}  // namespace

std::vector<double> parse_sweep(std::string_view spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw InvalidArgument("sweep must be start:stop:step");
  const double start = parse_double(spec.substr(0, c1));
  const double stop = parse_double(spec.substr(c1 + 1, c2 - c1 - 1));
  const double step = parse_double(spec.substr(c2 + 1));
  if (!(step > 0.0) || stop < start) throw InvalidArgument("sweep needs step > 0 and start <= stop");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1'000'000) throw InvalidArgument("sweep too long");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
  return out;
}

std::vector<P2pRow> p2p_tradeoff_table(double p, std::span<const int> ds, P2pFamilies families,
                                       int steps) {
  if (steps < 1) throw InvalidArgument("steps must be positive");
  std::vector<P2pRow> rows;
  if (families.arq) {
    const auto pt = arq_tradeoff(p);
    rows.push_back({"ARQ", p, "1", pt.tau, pt.lambda, p, p, {}});
  }
  if (families.no_feedback) {
    for (int i = 0; i <= steps; ++i) {
      const double r = p * i / steps;
      const auto nf = no_feedback_tradeoff(r, p);
      rows.push_back({scheme_name(FullRank{r}), p, "inf", nf.point.tau, nf.point.lambda, {}, {}, {}});
    }
  }
  if (families.proposed) {
    for (int d : ds) {
      for (int a = 1; a <= d; ++a) {
        const auto pt = proposed_code_tradeoff(a, d, p);
        rows.push_back({proposed_code_scheme(a, d).to_string(), p, std::to_string(d), pt.tau,
                        pt.lambda, 1.0 - std::pow(1.0 - p, a), pt.tau * d, {}});
      }
    }
  }
  return rows;
}

std::vector<P2pRow> hull_table(double p, int d) {
  const auto schemes = enumerate_schemes(d);
  std::vector<TradeoffPoint> points;
  std::vector<P2pRow> rows;
  for (const auto& x : schemes) {
    const auto e = block_scheme_tradeoff(x, p);
    points.push_back(e.point);
    rows.push_back({x.to_string(), p, std::to_string(d), e.point.tau, e.point.lambda, e.p_d,
                    e.expected_innovative, false});
  }
  for (std::size_t i : upper_hull(points)) rows[i].on_hull = true;
  return rows;
}

void write_p2p_csv(std::ostream& out, const std::vector<P2pRow>& rows, const std::string& invocation,
                   bool with_hull_column) {
  CsvWriter csv(out, invocation);
  std::vector<std::string> cols{"scheme", "p", "d", "tau", "lambda", "p_d", "E_S_d"};
  if (with_hull_column) cols.push_back("on_hull");
  csv.header(cols);
  for (const auto& r : rows) {
    std::vector<CsvCell> cells{r.scheme, r.p, r.d, r.tau, r.lambda, optional_cell(r.p_d),
                               optional_cell(r.expected_innovative)};
    if (with_hull_column) cells.push_back(optional_cell(r.on_hull));
    csv.row(cells);
  }
}

MulticastRow multicast_row(const TwoUserParams& params) {
  const auto sol = priority_q_solution(params);
  MulticastRow row;
  row.params = params;
  row.tau1 = sol.tau1;
  row.tau2 = sol.tau2;
  row.lambda1 = sol.lambda1;
  row.lambda2 = sol.lambda2;
  row.rho = sol.rho;
  row.mu = sol.mu;
  row.stable_right = sol.stable_right;
  row.stable_left = sol.stable_left;
  return row;
}

void write_multicast_csv(std::ostream& out, const std::vector<MulticastRow>& rows,
                         const std::string& invocation, bool with_sim_columns) {
  CsvWriter csv(out, invocation);
  std::vector<std::string> cols{"q1",      "q2",   "p1", "p2",           "tau1",       "lambda1",
                                "tau2",    "lambda2", "rho", "mu", "stable_right", "stable_left"};
  if (with_sim_columns) {
    cols.push_back("tau1_sim");
    cols.push_back("tau2_sim");
  }
  csv.header(cols);
  for (const auto& r : rows) {
    std::vector<CsvCell> cells{r.params.q1,           r.params.q2,           r.params.p1,
                               r.params.p2,           optional_cell(r.tau1), optional_cell(r.lambda1),
                               optional_cell(r.tau2), optional_cell(r.lambda2), r.rho,
                               r.mu,                  r.stable_right,        r.stable_left};
    if (with_sim_columns) {
      cells.push_back(optional_cell(r.tau1_sim));
      cells.push_back(optional_cell(r.tau2_sim));
    }
    csv.row(cells);
  }
}

std::vector<MulticastRow> fig5_rows(double p1, std::span<const double> p2_values) {
  std::vector<MulticastRow> rows;
  for (double p2 : p2_values) rows.push_back(multicast_row(TwoUserParams::make(p1, p2, 1.0, 0.0)));
  return rows;
}

std::vector<MulticastRow> fig7_rows(double p1, double p2, double q1, std::span<const double> q2_values) {
  std::vector<MulticastRow> rows;
  for (double q2 : q2_values) rows.push_back(multicast_row(TwoUserParams::make(p1, p2, q1, q2)));
  return rows;
}

std::vector<MulticastRow> fig8_rows(std::span<const double> p_values, std::span<const double> q_values) {
  std::vector<MulticastRow> rows;
  for (double p : p_values) {
    for (double q : q_values) rows.push_back(multicast_row(TwoUserParams::make(p, p, q, q)));
  }
  return rows;
}

}  // namespace streamlab
