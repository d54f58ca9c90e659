#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace structest {

inline bool is_missing(double v) { return std::isnan(v); }

// Missing marker used when constructing datasets programmatically.
double missing_value();

// N x n subject-by-indicator value matrix with NaN as the missing marker,
// plus a discrete grouping variable and optional discrete strata.
//
// Group and stratum labels are arbitrary text mapped to dense 0-based
// indices in first-appearance order; reports use the original labels.
// Instances are immutable after construction and safe to share across
// threads.
class IndicatorDataset {
public:
  // Builds a dataset from per-subject label strings. The group (and stratum)
  // universe is inferred from the labels, so every group has at least one
  // subject by construction.
  static IndicatorDataset from_labels(std::vector<double> values,
                                      std::size_t n_subjects,
                                      std::size_t n_indicators,
                                      const std::vector<std::string>& group_labels,
                                      const std::vector<std::string>& stratum_labels = {},
                                      std::vector<std::string> indicator_names = {});

  // Builds a dataset from pre-mapped group indices with an explicit group
  // universe. Simulation output uses this so a group can keep its identity
  // even when a small sample draws no subjects for it (validate() flags such
  // groups and testing rejects them).
  static IndicatorDataset from_indices(std::vector<double> values,
                                       std::size_t n_subjects,
                                       std::size_t n_indicators,
                                       std::vector<int> group,
                                       std::vector<std::string> group_names,
                                       std::vector<std::string> indicator_names = {});

  std::size_t num_subjects() const { return n_subjects_; }
  std::size_t num_indicators() const { return n_indicators_; }
  std::size_t num_groups() const { return group_names_.size(); }
  std::size_t num_strata() const { return stratum_names_.size(); }
  bool has_strata() const { return !stratum_names_.empty(); }

  double value(std::size_t subject, std::size_t indicator) const {
    return values_[subject * n_indicators_ + indicator];
  }
  bool missing(std::size_t subject, std::size_t indicator) const {
    return is_missing(value(subject, indicator));
  }
  int group_of(std::size_t subject) const { return group_[subject]; }
  int stratum_of(std::size_t subject) const { return strata_[subject]; }

  // Count of non-missing entries (M); always > 0.
  std::size_t observed_count() const { return n_observed_; }

  const std::vector<std::string>& indicator_names() const { return indicator_names_; }
  const std::vector<std::string>& group_names() const { return group_names_; }
  const std::vector<std::string>& stratum_names() const { return stratum_names_; }

  // Subjects belonging to stratum `s`, keeping the full group universe so a
  // group absent from the stratum surfaces as an empty cell downstream.
  IndicatorDataset stratum_subset(int s) const;

private:
  IndicatorDataset() = default;

  void check_invariants();

  std::vector<double> values_;  // row-major N x n
  std::vector<int> group_;      // dense 0-based
  std::vector<int> strata_;     // empty when no strata
  std::vector<std::string> indicator_names_;
  std::vector<std::string> group_names_;
  std::vector<std::string> stratum_names_;
  std::size_t n_subjects_ = 0;
  std::size_t n_indicators_ = 0;
  std::size_t n_observed_ = 0;
};

// Per-indicator, per-group sample means over non-missing entries, with the
// matching observation counts. Under the saturated model the MLE of each
// cell parameter is the cell mean, so this doubles as the saturated fit's
// parameter matrix.
struct CellMeans {
  std::size_t n_indicators = 0;
  std::size_t n_groups = 0;
  std::vector<double> means;        // n x p row-major
  std::vector<std::size_t> counts;  // n x p row-major
  std::vector<std::size_t> group_sizes;

  double mean(std::size_t i, std::size_t z) const { return means[i * n_groups + z]; }
  std::size_t count(std::size_t i, std::size_t z) const { return counts[i * n_groups + z]; }
};

// Pure report of dataset shape and the conditions downstream operations
// reject on. Never throws.
struct ValidationReport {
  std::size_t n_subjects = 0;
  std::size_t n_indicators = 0;
  std::size_t n_groups = 0;
  std::size_t n_observed = 0;  // M
  std::size_t n_missing = 0;   // n*N - M
  std::vector<std::size_t> group_sizes;
  std::vector<std::size_t> cell_counts;  // n x p row-major
  std::vector<std::pair<std::size_t, std::size_t>> empty_cells;  // (indicator, group)
  std::vector<std::size_t> constant_indicators;
  std::vector<std::size_t> empty_groups;

  bool testable() const { return empty_cells.empty() && empty_groups.empty(); }
};

ValidationReport validate(const IndicatorDataset& data);

// Exact per-cell averages. Throws errc::empty_cell when some (i, z) cell has
// no non-missing observations (the saturated model is then unidentifiable).
CellMeans cell_means(const IndicatorDataset& data);

}  // namespace structest
