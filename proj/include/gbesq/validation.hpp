#pragma once

// Acceptance suite: ten numbered checks, each printed as one PASS/FAIL line.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gbesq {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds; 0 means no runtime limit
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty: all ten
  int threads = 0;
  std::uint64_t seed = 20240917;
  double default_time_step = 0.125;
  std::ostream* log = nullptr;  // PASS/FAIL lines and notes; nullptr for silence
};

constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);
bool all_passed(const std::vector<CriterionResult>& results);
std::string format_result(const CriterionResult& r);

}  // namespace gbesq
