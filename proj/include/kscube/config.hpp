#pragma once

#include <cstdlib>
#include <string>

#include "kscube/errors.hpp"

namespace kscube {

/// Size caps shared by every module. Defaults may be overridden through the
/// environment: KSCUBE_MAX_TABLE_N, KSCUBE_MAX_STREAM_N, KSCUBE_MAX_LP_POINTS.
struct Caps {
  int max_table_n = 4;     // dense 2^{n^2} tables (65,536 points at n = 4)
  int max_stream_n = 5;    // lazy enumeration of M_n(F_2)
  int max_lp_points = 16;  // 2^{N-1} - 1 cut columns
  int max_exact_lp_points = 8;

  static constexpr int kHardMaxN = 8;  // 64-bit point indices
  static constexpr int kHardMaxLpPoints = 20;

  static Caps from_env() {
    Caps caps;
    caps.max_table_n = read("KSCUBE_MAX_TABLE_N", caps.max_table_n, 1, 5);
    caps.max_stream_n = read("KSCUBE_MAX_STREAM_N", caps.max_stream_n, 1, 6);
    caps.max_lp_points =
        read("KSCUBE_MAX_LP_POINTS", caps.max_lp_points, 1, kHardMaxLpPoints);
    return caps;
  }

  static const Caps& global() {
    static const Caps caps = from_env();
    return caps;
  }

 private:
  static int read(const char* name, int fallback, int lo, int hi) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return fallback;
    char* end = nullptr;
    long v = std::strtol(raw, &end, 10);
    if (*end != '\0' || v < lo || v > hi) {
      throw DomainError(std::string(name) + " must be an integer in [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
  }
};

}  // namespace kscube
