// Runs acceptance criteria 1-10 through the C API and prints one line per
// criterion. Exits 1 when any criterion fails.
//
//   acceptance [--seed N]

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "dynmarket/dynmarket.h"

namespace {

void report(int id, const char* title, int passed, const char* detail, double seconds, void*) {
  std::printf("[%s] criterion %d: %s (%.2fs) %s\n", passed ? "PASS" : "FAIL", id, title, seconds, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  uint64_t seed = dm_default_seed();
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--seed") == 0 && k + 1 < argc) {
      seed = std::strtoull(argv[++k], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--seed N]\n", argv[0]);
      return 2;
    }
  }
  std::printf("acceptance suite, seed %llu\n", static_cast<unsigned long long>(seed));
  int failures = 0;
  if (dm_verify("all", seed, report, nullptr, &failures) != DM_OK) {
    std::fprintf(stderr, "verify failed: %s\n", dm_last_error());
    return 1;
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
