#pragma once

// The acceptance criteria, runnable from the test suite and from `passage verify`.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace passage {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  ///< measured values against their thresholds
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::size_t workers = 1;
};

/// Runs every criterion in order. A criterion that throws is reported as failed.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One "PASS|FAIL  #id name  (seconds)  detail" line per criterion, then a summary line.
void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace passage
