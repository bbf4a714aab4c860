#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "streamlab/analytic.hpp"
#include "streamlab/errors.hpp"
#include "streamlab/multicast.hpp"
#include "streamlab/sim.hpp"
#include "streamlab/tables.hpp"
#include "streamlab/validation/acceptance.hpp"

namespace {

using namespace streamlab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

std::string invocation_line(int argc, char** argv) {
  std::string s = "streamlab";
  for (int i = 1; i < argc; ++i) {
    s += ' ';
    s += argv[i];
  }
  return s;
}

// Writes to --out, or stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InvalidArgument(fmt::format("cannot open '{}' for writing", path));
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// "ARQ", "full-rank" (with --rate), "[x1,...,xd]" or "[..]@w,[..]@w".
Scheme parse_scheme(const std::string& text, std::optional<double> rate) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "arq") return Arq{};
  if (lower == "full-rank" || lower == "fullrank") {
    if (!rate) throw InvalidArgument("full-rank scheme needs --rate");
    return FullRank{*rate};
  }
  if (text.find('@') == std::string::npos) return Block{SchemeVector::parse(text)};
  Mixture mix;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto close = text.find(']', pos);
    const auto at = text.find('@', pos);
    if (close == std::string::npos || at != close + 1) {
      throw InvalidArgument("mixture entries look like [x1,...,xd]@weight");
    }
    auto end = text.find(',', at);
    if (end == std::string::npos) end = text.size();
    const double w = std::stod(text.substr(at + 1, end - at - 1));
    mix.components.emplace_back(SchemeVector::parse(text.substr(pos, close + 1 - pos)), w);
    pos = end + 1;
  }
  return mix;
}

struct CommonFlags {
  std::string out;
  std::uint64_t seed = kDefaultSeed;
};

void add_seed(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Master seed")->envname("STREAMLAB_SEED");
}

int cmd_p2p_tradeoff(double p, const std::vector<int>& ds, const std::vector<std::string>& family,
                     int steps, const CommonFlags& f, const std::string& inv) {
  P2pFamilies fam{false, false, false};
  for (const auto& name : family) {
    if (name == "all") fam = {true, true, true};
    if (name == "arq") fam.arq = true;
    if (name == "no-feedback") fam.no_feedback = true;
    if (name == "proposed") fam.proposed = true;
  }
  const auto rows = p2p_tradeoff_table(p, ds, fam, steps);
  Output out(f.out);
  write_p2p_csv(out.stream(), rows, inv);
  return kExitOk;
}

int cmd_p2p_sim(const std::string& scheme_text, std::optional<double> rate, double p,
                std::optional<std::uint64_t> d, std::uint64_t slots, std::uint64_t trials,
                const CommonFlags& f) {
  auto config = SimConfig::make(parse_scheme(scheme_text, rate), p, slots, trials, f.seed);
  if (d) config.d = *d;
  config.validate();
  const auto m = run_p2p(config);
  Output out(f.out);
  out.stream() << to_json(m) << '\n';
  return kExitOk;
}

int cmd_hull(double p, int d, const CommonFlags& f, const std::string& inv) {
  if (d < 1 || d > 12) throw InvalidArgument("hull enumeration supports 1 <= d <= 12");
  const auto rows = hull_table(p, d);
  Output out(f.out);
  write_p2p_csv(out.stream(), rows, inv, true);
  if (d == 2 || d == 3) {
    const auto rep = verify_d23_optimality(p);
    std::cerr << fmt::format("verdict: d={} hull {} the proposed family at p={}\n", d,
                             rep.passed ? "equals" : "DIFFERS FROM", p);
    for (const auto& n : rep.notes) std::cerr << "  " << n << '\n';
    return rep.passed ? kExitOk : kExitValidation;
  }
  return kExitOk;
}

struct MulticastFlags {
  double p1 = 0.5, p2 = 0.4, q1 = 1.0, q2 = 0.0;
  std::vector<double> p_grid{0.2, 0.4, 0.6, 0.8};
  std::string vary = "none";
  std::string sweep;
  bool sim = false;
  std::uint64_t slots = 1'000'000;
  std::string format = "csv";
};

std::string multicast_json(const TwoUserParams& t, const MulticastRow& row) {
  const auto sol = priority_q_solution(t);
  nlohmann::ordered_json j;
  j["p1"] = t.p1;
  j["p2"] = t.p2;
  j["q1"] = t.q1;
  j["q2"] = t.q2;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["tau1"] = opt(row.tau1);
  j["lambda1"] = opt(row.lambda1);
  j["tau2"] = opt(row.tau2);
  j["lambda2"] = opt(row.lambda2);
  j["xi1"] = sol.xi1;
  j["xi2"] = sol.xi2;
  j["rho"] = row.rho;
  j["mu"] = row.mu;
  j["stable_right"] = row.stable_right;
  j["stable_left"] = row.stable_left;
  if (sol.stationary) {
    j["pi0"] = sol.pi0;
    j["pi1"] = sol.pi1;
    j["pi_m1"] = sol.pi_m1;
  }
  j["tau1_sim"] = opt(row.tau1_sim);
  j["tau2_sim"] = opt(row.tau2_sim);
  return j.dump(2);
}

int cmd_multicast(const MulticastFlags& m, const CommonFlags& f, const std::string& inv) {
  std::vector<MulticastRow> rows;
  if (m.vary == "none") {
    rows.push_back(multicast_row(TwoUserParams::make(m.p1, m.p2, m.q1, m.q2)));
  } else {
    if (m.sweep.empty()) throw InvalidArgument("--vary needs --sweep start:stop:step");
    const auto values = parse_sweep(m.sweep);
    if (m.vary == "q2") {
      rows = fig7_rows(m.p1, m.p2, m.q1, values);
    } else if (m.vary == "p2") {
      rows = fig5_rows(m.p1, values);
    } else if (m.vary == "q") {
      rows = fig8_rows(m.p_grid, values);
    } else {
      throw InvalidArgument(fmt::format("unknown --vary '{}'", m.vary));
    }
  }
  if (m.sim) {
    for (auto& row : rows) {
      const auto r = simulate_two_user(row.params, m.slots, f.seed);
      row.tau1_sim = r.users[0].tau_hat;
      row.tau2_sim = r.users[1].tau_hat;
    }
  }
  Output out(f.out);
  if (m.format == "json") {
    if (rows.size() != 1) throw InvalidArgument("--format json is for a single point");
    out.stream() << multicast_json(rows.front().params, rows.front()) << '\n';
  } else {
    write_multicast_csv(out.stream(), rows, inv, m.sim);
  }
  return kExitOk;
}

int cmd_validate(const std::string& suite, const CommonFlags& f) {
  const auto ids = validation::suite_criteria(suite);
  validation::CriterionOptions options;
  options.seed = f.seed;
  options.analytic_only = validation::suite_is_analytic_only(suite);
  std::vector<validation::CriterionResult> results;
  bool ok = true;
  for (int id : ids) {
    results.push_back(validation::run_criterion(id, options));
    std::cerr << results.back().line() << '\n';
    ok = ok && results.back().passed;
  }
  Output out(f.out);
  out.stream() << validation::report_json(suite, options, results) << '\n';
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming erasure-channel coding: trade-off tables, simulation, validation"};
  app.set_version_flag("--version", std::string(STREAMLAB_VERSION));
  app.require_subcommand(1);
  const std::string inv = invocation_line(argc, argv);
  int status = kExitOk;
  CommonFlags common;

  auto prob = CLI::Range(0.0, 1.0).description("in (0,1)");

  // p2p-tradeoff
  double tp = 0.6;
  std::vector<int> tds{2, 4, 8, 16};
  std::vector<std::string> tfam{"all"};
  int tsteps = 100;
  auto* tradeoff = app.add_subcommand("p2p-tradeoff", "ARQ, no-feedback and proposed-code trade-off table");
  tradeoff->add_option("--p", tp, "Success probability")->check(prob);
  tradeoff->add_option("--d", tds, "Block lengths for the proposed family")->delimiter(',');
  tradeoff->add_option("--family", tfam, "arq, no-feedback, proposed or all")
      ->delimiter(',')
      ->check(CLI::IsMember({"all", "arq", "no-feedback", "proposed"}));
  tradeoff->add_option("--steps", tsteps, "Steps of the no-feedback rate grid")->check(CLI::PositiveNumber);
  tradeoff->add_option("--out", common.out, "Output file (default stdout)");
  tradeoff->callback([&] { status = cmd_p2p_tradeoff(tp, tds, tfam, tsteps, common, inv); });

  // p2p-sim
  std::string sscheme;
  std::optional<double> srate;
  double sp = 0.6;
  std::optional<std::uint64_t> sd;
  std::uint64_t sslots = 1'000'000, strials = 1;
  auto* sim = app.add_subcommand("p2p-sim", "Simulate one point-to-point scheme; JSON metrics");
  sim->add_option("--scheme", sscheme, "ARQ, full-rank, [x1,...,xd] or [..]@w,[..]@w")->required();
  sim->add_option("--rate", srate, "Full-rank code rate")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--p", sp, "Success probability")->check(prob);
  sim->add_option("--d", sd, "Feedback period override (0 = none)");
  sim->add_option("--slots", sslots, "Slots per trial")->check(CLI::PositiveNumber);
  sim->add_option("--trials", strials, "Independent trials")->check(CLI::PositiveNumber);
  sim->add_option("--out", common.out, "Output file (default stdout)");
  add_seed(sim, common);
  sim->callback([&] { status = cmd_p2p_sim(sscheme, srate, sp, sd, sslots, strials, common); });

  // hull
  double hp = 0.6;
  int hd = 3;
  auto* hull = app.add_subcommand("hull", "All canonical block schemes of length d with hull membership");
  hull->add_option("--p", hp, "Success probability")->check(prob);
  hull->add_option("--d", hd, "Block length (1..12)");
  hull->add_option("--out", common.out, "Output file (default stdout)");
  hull->callback([&] { status = cmd_hull(hp, hd, common, inv); });

  // multicast
  MulticastFlags mf;
  auto* mc = app.add_subcommand("multicast", "Two-user priority-(q1,q2) throughput and exponents");
  mc->add_option("--p1", mf.p1, "Success probability of U1")->check(prob);
  mc->add_option("--p2", mf.p2, "Success probability of U2")->check(prob);
  mc->add_option("--q1", mf.q1, "Priority given to U1 when it lags")->check(CLI::Range(0.0, 1.0));
  mc->add_option("--q2", mf.q2, "Priority given to U2 when it lags")->check(CLI::Range(0.0, 1.0));
  mc->add_option("--p", mf.p_grid, "p1 = p2 values for --vary q")->delimiter(',');
  mc->add_option("--vary", mf.vary, "none, q2, p2 (with q = (1,0)) or q (q1 = q2)")
      ->check(CLI::IsMember({"none", "q2", "p2", "q"}));
  mc->add_option("--sweep", mf.sweep, "start:stop:step for the varied parameter");
  mc->add_flag("--sim", mf.sim, "Add simulated throughput columns");
  mc->add_option("--slots", mf.slots, "Slots per simulated point")->check(CLI::PositiveNumber);
  mc->add_option("--format", mf.format, "csv or json (single point)")->check(CLI::IsMember({"csv", "json"}));
  mc->add_option("--out", common.out, "Output file (default stdout)");
  add_seed(mc, common);
  mc->callback([&] { status = cmd_multicast(mf, common, inv); });

  // validate
  std::string suite = "all";
  auto* val = app.add_subcommand("validate", "Run acceptance suites; JSON report");
  val->add_option("--suite", suite, "oracles, p2p, multicast or all")
      ->check(CLI::IsMember({"oracles", "p2p", "multicast", "all"}));
  val->add_option("--out", common.out, "Report file (default stdout)");
  add_seed(val, common);
  val->callback([&] { status = cmd_validate(suite, common); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return status;
}
