#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gipsp {

struct Measurement {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  /// true: value must not exceed bound; false: value must exceed it.
  bool upper = true;

  bool pass() const { return upper ? value <= bound : value > bound; }
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Measurement> measurements;
  std::string error;
  double seconds = 0.0;

  bool pass() const;
};

/// Runs the acceptance criteria (all when `only` is empty). Tolerances are
/// multiplied by `tolerance_scale`; convergence-order thresholds are not.
std::vector<CriterionResult> run_acceptance(double tolerance_scale = 1.0, const std::vector<int>& only = {},
                                            std::ostream* progress = nullptr);

/// One line: "PASS|FAIL <id> <title> (<seconds>s): name=value<=bound ...".
std::string format_result(const CriterionResult& r);

} // namespace gipsp
