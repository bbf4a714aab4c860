#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "streamlab/sim.hpp"

namespace streamlab::validation {

struct CriterionOptions {
  std::uint64_t seed = kDefaultSeed;
  // Skip the simulation parts of criteria that mix oracles and simulation.
  bool analytic_only = false;
};

struct Measurement {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = true;
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;
  double seconds = 0.0;

  // Records a check; failed checks fail the criterion.
  void check(std::string name, double value, double expected, double tolerance);
  void require(std::string name, bool ok);
  // "PASS [n] title: ..." on one line.
  std::string line() const;
};

inline constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id, const CriterionOptions& options = {});

// Criteria in a suite: oracles, p2p, multicast or all. Throws
// InvalidArgument for an unknown name.
std::vector<int> suite_criteria(std::string_view suite);
bool suite_is_analytic_only(std::string_view suite);

std::string report_json(std::string_view suite, const CriterionOptions& options,
                        const std::vector<CriterionResult>& results);

}  // namespace streamlab::validation
