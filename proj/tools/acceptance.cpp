#include <cstdlib>
#include <iostream>
#include <string>

#include "gipsp/acceptance.hpp"

// Usage: gipsp_acceptance [tolerance-scale]
int main(int argc, char** argv) {
  const double scale = argc > 1 ? std::strtod(argv[1], nullptr) : 1.0;
  if (!(scale > 0.0)) {
    std::cerr << "tolerance scale must be positive\n";
    return 2;
  }
  const auto results = gipsp::run_acceptance(scale, {}, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass() ? 0 : 1;
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
