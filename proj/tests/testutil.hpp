#pragma once

#include <random>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace structest::test {

// Random dataset for property tests. The first p subjects take groups
// 1..p round-robin and stay fully observed, so every cell has at least one
// observation even under missingness.
inline IndicatorDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p,
                                       std::size_t n_subjects, double missing_prob = 0.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, p - 1);

  std::vector<double> row_factor(n), col_factor(p);
  for (auto& a : row_factor) a = 1.0 + gauss(rng);
  for (auto& b : col_factor) b = 1.0 + gauss(rng);

  std::vector<double> values(n_subjects * n);
  std::vector<std::string> groups(n_subjects);
  for (std::size_t k = 0; k < n_subjects; ++k) {
    const std::size_t z = k < p ? k : pick(rng);
    groups[k] = "g" + std::to_string(z + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (k >= p && missing_prob > 0.0 && unif(rng) < missing_prob) {
        values[k * n + i] = missing_value();
      } else {
        values[k * n + i] = row_factor[i] * col_factor[z] + gauss(rng);
      }
    }
  }
  return IndicatorDataset::from_labels(std::move(values), n_subjects, n, groups);
}

// Hand-built cell means for oracle and diagnostics tests.
inline CellMeans make_cell_means(std::size_t n, std::size_t p, std::vector<double> means,
                                 std::vector<std::size_t> counts) {
  CellMeans cm;
  cm.n_indicators = n;
  cm.n_groups = p;
  cm.means = std::move(means);
  cm.counts = std::move(counts);
  cm.group_sizes.assign(p, 0);
  for (std::size_t z = 0; z < p; ++z) cm.group_sizes[z] = cm.counts[z];
  return cm;
}

}  // namespace structest::test
