#pragma once

#include <cstdint>
#include <vector>

#include "estimator.hpp"
#include "simulate.hpp"

namespace structest {

// Empirical rejection rate of the test over replicated simulations, with a
// 95% binomial proportion interval.
struct CalibrationResult {
  std::size_t replicates = 0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double alpha_level = 0.0;
  ScenarioSpec spec;
  std::uint64_t seed = 0;
};

struct CalibrationOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  FitOptions fit;
};

// Seed for one replicate, a pure function of (master seed, index) so results
// are independent of scheduling.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate);

// generate + run_test for one replicate.
double replicate_p_value(const ScenarioSpec& spec, std::uint64_t master_seed,
                         std::size_t replicate, const FitOptions& fit = {});

// All replicate p-values, in replicate order regardless of the execution
// concurrency. A failing replicate aborts the run with its index attached.
std::vector<double> replicate_p_values(const ScenarioSpec& spec, std::size_t replicates,
                                       std::uint64_t seed, const CalibrationOptions& options = {});

// Counts p_value < alpha_level over `replicates` runs. Requires
// replicates >= 100 (the binomial interval uses a normal approximation with
// continuity correction) and 0 < alpha_level <= 1.
CalibrationResult rejection_rate(const ScenarioSpec& spec, double alpha_level,
                                 std::size_t replicates, std::uint64_t seed,
                                 const CalibrationOptions& options = {});

// One CalibrationResult per spec, output order matching input order.
std::vector<CalibrationResult> power_curve(const std::vector<ScenarioSpec>& grid,
                                           double alpha_level, std::size_t replicates,
                                           std::uint64_t seed,
                                           const CalibrationOptions& options = {});

}  // namespace structest
