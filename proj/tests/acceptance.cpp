#include <cstdio>
#include <functional>
#include <vector>

#include "prelat/harness.hpp"

using namespace prelat;

namespace {

struct Line {
  std::function<Criterion()> check;
  double limit_seconds;  // 0: no runtime bound
};

}  // namespace

int main() {
  // scales and runtime limits as pinned by the acceptance list
  std::vector<Line> lines = {
      {[] { return criterion_nf_oracle(7, 4, true); }, 120},
      {[] { return criterion_congruence(50, 20, 5, 2024); }, 0},
      {[] { return criterion_productive(200, 77); }, 0},
      {[] { return criterion_totalizer(100, 1000); }, 0},
      {[] { return criterion_universality(4, true); }, 1800},
      {[] { return criterion_local_universality(3, true); }, 0},
      {[] { return criterion_density(100, 50, 31); }, 0},
      {[] { return criterion_chains(4); }, 0},
      {[] { return criterion_meet_join(3, true); }, 0},
      {[] { return criterion_diagonal(10, 99); }, 0},
      {[] { return criterion_refutation(5, 11); }, 0},
  };
  int failed = 0;
  for (auto& line : lines) {
    Criterion c;
    try {
      c = line.check();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("error: ") + e.what();
    }
    bool in_time = line.limit_seconds == 0 || c.seconds < line.limit_seconds;
    bool pass = c.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] criterion %d: %s | %s | %.2f s", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                c.detail.c_str(), c.seconds);
    if (line.limit_seconds > 0) std::printf(" (limit %.0f s)", line.limit_seconds);
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  return failed == 0 ? 0 : 1;
}
