#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pguard {

struct BenchConfig {
  std::size_t ext_min = 1;
  std::size_t ext_max = 10;
  std::size_t dom_min = 200;
  std::size_t dom_max = 200;
  std::size_t reps = 5;
  std::uint64_t seed = 1;
};

struct BenchPoint {
  std::size_t extensions = 0;
  std::size_t dom_nodes = 0;       // requested tree size
  std::size_t slots = 0;           // guarded slot count, 2n+1
  std::uint64_t unguarded_ns = 0;  // median over repetitions
  std::uint64_t guarded_ns = 0;
};

/// Medians per configuration plus a least-squares line through the
/// guarded-minus-unguarded overhead as a function of extension count.
/// Absolute numbers are machine-dependent; the fit checks the shape.
struct BenchSummary {
  std::vector<BenchPoint> points;
  double slope_ns_per_extension = 0.0;
  double intercept_ns = 0.0;
  double r_squared = 0.0;
  std::size_t peak_rss_kb = 0;  // VmHWM, 0 when unavailable
};

BenchSummary run_bench(const BenchConfig&);
std::string format_bench(const BenchSummary&);

}  // namespace pguard
