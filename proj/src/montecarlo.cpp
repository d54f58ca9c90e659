#include "montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "errors.hpp"
#include "lrt.hpp"
#include "rng.hpp"

namespace structest {

namespace {

constexpr double kZ95 = 1.959963984540054;

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate) {
  std::uint64_t h = combine_key(master_seed, static_cast<std::uint64_t>(StreamRole::kReplicate));
  return combine_key(h, static_cast<std::uint64_t>(replicate));
}

double replicate_p_value(const ScenarioSpec& spec, std::uint64_t master_seed,
                         std::size_t replicate, const FitOptions& fit) {
  const IndicatorDataset data = generate(spec, replicate_seed(master_seed, replicate));
  return run_test(data, fit).p_value;
}

std::vector<double> replicate_p_values(const ScenarioSpec& spec, std::size_t replicates,
                                       std::uint64_t seed, const CalibrationOptions& options) {
  spec.check();
  std::vector<double> p_values(replicates, std::numeric_limits<double>::quiet_NaN());

  std::size_t threads = options.threads > 0 ? options.threads
                                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, replicates));

  // Each replicate writes only its own slot; failures are collected and the
  // lowest failing index wins, so the outcome is scheduling-independent.
  std::mutex failure_mutex;
  std::size_t failed_index = replicates;
  std::exception_ptr failure;

  auto worker = [&](std::size_t first) {
    for (std::size_t r = first; r < replicates; r += threads) {
      try {
        p_values[r] = replicate_p_value(spec, seed, r, options.fit);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (r < failed_index) {
          failed_index = r;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw_error(e.code(), "replicate " + std::to_string(failed_index) + " failed: " + e.what());
    } catch (const std::exception& e) {
      throw_error(errc::invalid_argument,
                  "replicate " + std::to_string(failed_index) + " failed: " + e.what());
    }
  }
  return p_values;
}

CalibrationResult rejection_rate(const ScenarioSpec& spec, double alpha_level,
                                 std::size_t replicates, std::uint64_t seed,
                                 const CalibrationOptions& options) {
  if (!(alpha_level > 0.0 && alpha_level <= 1.0))
    throw_error(errc::invalid_argument, "alpha level must be in (0, 1]");
  if (replicates < 100)
    throw_error(errc::invalid_argument, "need at least 100 replicates");

  const std::vector<double> p_values = replicate_p_values(spec, replicates, seed, options);

  CalibrationResult result;
  result.replicates = replicates;
  result.alpha_level = alpha_level;
  result.spec = spec;
  result.seed = seed;
  for (double p : p_values) result.rejections += p < alpha_level;
  result.rate = static_cast<double>(result.rejections) / static_cast<double>(replicates);

  // Normal approximation with continuity correction.
  const double n = static_cast<double>(replicates);
  const double half = kZ95 * std::sqrt(result.rate * (1.0 - result.rate) / n) + 0.5 / n;
  result.ci_low = std::max(0.0, result.rate - half);
  result.ci_high = std::min(1.0, result.rate + half);
  return result;
}

std::vector<CalibrationResult> power_curve(const std::vector<ScenarioSpec>& grid,
                                           double alpha_level, std::size_t replicates,
                                           std::uint64_t seed,
                                           const CalibrationOptions& options) {
  if (grid.empty()) throw_error(errc::invalid_argument, "empty scenario grid");
  std::vector<CalibrationResult> results;
  results.reserve(grid.size());
  for (const auto& spec : grid)
    results.push_back(rejection_rate(spec, alpha_level, replicates, seed, options));
  return results;
}

}  // namespace structest
