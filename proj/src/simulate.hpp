#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace structest {

// Causal pathway from the grouping variable Z to the indicators.
enum class Scenario {
  kStructural,       // Z shifts the latent; indicators move only through it
  kDirect,           // Z shifts individual indicators directly
  kConfounded,       // an unrecorded confounder drives both the latent and Z
  kSingleIndicator,  // Z is a binary outcome driven by one indicator
};

enum class NoiseDistribution { kGaussian, kUniform };

// Generator description for one synthetic dataset: indicators are
// X_i = lambda_i * eta + epsilon_i with the scenario deciding how the
// grouping variable enters.
struct ScenarioSpec {
  Scenario scenario = Scenario::kStructural;
  std::size_t n = 2;               // indicator count
  std::size_t num_subjects = 100;  // N
  std::vector<double> lambda;      // length n
  std::vector<double> noise_sd;    // length n, all > 0
  std::vector<double> noise_corr;  // optional n x n correlation, row-major
  NoiseDistribution noise_dist = NoiseDistribution::kGaussian;
  double eta_mean = 0.0;
  double eta_sd = 1.0;
  std::vector<double> group_probs;   // length p, sums to 1
  std::vector<double> eta_shift;     // length p; structural pathway
  std::vector<double> direct_shift;  // n x p row-major; direct pathway
  double confounder_strength = 0.0;
  std::size_t outcome_indicator = 1;  // 1-based, single-indicator scenario
  double outcome_slope = 1.0;
  // Permits a direct-scenario spec to also shift the latent (both pathways
  // active at once); without this flag a nonzero eta_shift there is invalid.
  bool mixed_pathways = false;

  std::size_t num_groups() const { return group_probs.size(); }

  void check() const;  // throws errc::invalid_spec

  static ScenarioSpec from_json(const std::string& text);
  std::string to_json() const;
};

// Draws one dataset. Deterministic in (spec, seed); subjects and variables
// get independent derived substreams, so draws are stable under changes to
// unrelated parts of the spec.
IndicatorDataset generate(const ScenarioSpec& spec, std::uint64_t seed);

// Exact population E(X_i | Z = z) for the structural and direct scenarios
// (n x p row-major). The other scenarios would need integration over the
// confounder or the indicators and are rejected.
std::vector<double> population_cell_means(const ScenarioSpec& spec);

}  // namespace structest
