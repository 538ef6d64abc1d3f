// Verification suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "toda/acceptance.hpp"
#include "toda/io.hpp"

int main(int argc, char** argv) {
  toda::AcceptanceOptions opt;
  for (int a = 1; a < argc; ++a) opt.only.push_back(std::atoi(argv[a]));
  const auto results = toda::run_acceptance(opt);
  std::fputs(toda::acceptance_table(results).c_str(), stdout);
  if (const char* path = std::getenv("TODA_ACCEPTANCE_JSON")) toda::write_json(path, toda::acceptance_json(results));
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}
