// Runs the ten acceptance criteria; exit status 0 iff all pass.

#include <cstdlib>
#include <iostream>
#include <string>

#include "gbesq/validation.hpp"

int main(int argc, char** argv) {
  gbesq::AcceptanceOptions opt;
  opt.log = &std::cout;
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::stoi(argv[i]));
  const auto results = gbesq::run_acceptance(opt);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
