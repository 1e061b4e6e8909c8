// SPDX-License-Identifier: Apache-2.0
// Prints one PASS/FAIL line per acceptance criterion.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "criteria.hpp"

using fastssl::acceptance::kNumCriteria;

int main(int argc, char **argv) {
  CLI::App app{"fastssl acceptance checks"};
  std::vector<int> only;
  std::string work_dir = "acceptance_runs";
  app.add_option("-c,--criterion", only, "run only these criteria (1-9)")
      ->check(CLI::Range(1, kNumCriteria));
  app.add_option("-w,--work-dir", work_dir, "directory for training artifacts");
  CLI11_PARSE(app, argc, argv);

  if (only.empty())
    for (int n = 1; n <= kNumCriteria; ++n)
      only.push_back(n);

  int failed = 0;
  for (int n : only) {
    const auto out = fastssl::acceptance::run_criterion(n, work_dir);
    std::printf("criterion %d [%s] %s: %s\n", n, fastssl::acceptance::criterion_title(n),
                out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
