// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  `acceptance --only 3 7` restricts the run.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "bbmlab/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) continue;
    only.push_back(std::atoi(argv[i]));
  }
  int failures = 0;
  auto results = bbmlab::run_acceptance(only, [&](const auto& r) {
    std::printf("%s\n", bbmlab::format_criterion(r).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  });
  std::printf("%d/%zu criteria passed\n", (int)results.size() - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}
