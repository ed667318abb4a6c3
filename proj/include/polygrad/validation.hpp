#pragma once

#include <string>
#include <vector>

namespace polygrad {

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

std::vector<std::string> validation_suites();

// Runs one named suite ("all" runs every suite).  Throws
// std::invalid_argument for unknown names.
std::vector<CheckResult> run_validation_suite(const std::string& name);

}  // namespace polygrad
