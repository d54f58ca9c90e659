#include "dataset.hpp"

#include <limits>
#include <unordered_map>
#include <utility>

#include "errors.hpp"

namespace structest {

double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

namespace {

std::vector<int> map_labels(const std::vector<std::string>& labels,
                            std::vector<std::string>& names_out) {
  std::unordered_map<std::string, int> index;
  std::vector<int> mapped(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto [it, inserted] = index.emplace(labels[k], static_cast<int>(names_out.size()));
    if (inserted) names_out.push_back(labels[k]);
    mapped[k] = it->second;
  }
  return mapped;
}

std::vector<std::string> default_names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = prefix + std::to_string(i + 1);
  return names;
}

}  // namespace

IndicatorDataset IndicatorDataset::from_labels(std::vector<double> values,
                                               std::size_t n_subjects,
                                               std::size_t n_indicators,
                                               const std::vector<std::string>& group_labels,
                                               const std::vector<std::string>& stratum_labels,
                                               std::vector<std::string> indicator_names) {
  IndicatorDataset ds;
  ds.values_ = std::move(values);
  ds.n_subjects_ = n_subjects;
  ds.n_indicators_ = n_indicators;
  if (group_labels.size() != n_subjects)
    throw_error(errc::invalid_argument, "group labels must have one entry per subject");
  ds.group_ = map_labels(group_labels, ds.group_names_);
  if (!stratum_labels.empty()) {
    if (stratum_labels.size() != n_subjects)
      throw_error(errc::invalid_argument, "stratum labels must have one entry per subject");
    ds.strata_ = map_labels(stratum_labels, ds.stratum_names_);
  }
  ds.indicator_names_ = indicator_names.empty() ? default_names("x", n_indicators)
                                                : std::move(indicator_names);
  ds.check_invariants();
  return ds;
}

IndicatorDataset IndicatorDataset::from_indices(std::vector<double> values,
                                                std::size_t n_subjects,
                                                std::size_t n_indicators,
                                                std::vector<int> group,
                                                std::vector<std::string> group_names,
                                                std::vector<std::string> indicator_names) {
  IndicatorDataset ds;
  ds.values_ = std::move(values);
  ds.n_subjects_ = n_subjects;
  ds.n_indicators_ = n_indicators;
  ds.group_ = std::move(group);
  ds.group_names_ = std::move(group_names);
  ds.indicator_names_ = indicator_names.empty() ? default_names("x", n_indicators)
                                                : std::move(indicator_names);
  ds.check_invariants();
  return ds;
}

void IndicatorDataset::check_invariants() const {
  if (n_subjects_ == 0) throw_error(errc::invalid_argument, "need at least one subject");
  if (n_indicators_ == 0) throw_error(errc::invalid_argument, "need at least one indicator");
  if (values_.size() != n_subjects_ * n_indicators_)
    throw_error(errc::invalid_argument, "value matrix size does not match N x n");
  if (group_.size() != n_subjects_)
    throw_error(errc::invalid_argument, "group assignment must cover every subject");
  if (group_names_.empty()) throw_error(errc::invalid_argument, "need at least one group");
  if (indicator_names_.size() != n_indicators_)
    throw_error(errc::invalid_argument, "indicator names must match indicator count");
  const int p = static_cast<int>(group_names_.size());
  for (int g : group_)
    if (g < 0 || g >= p) throw_error(errc::invalid_argument, "group index out of range");
  if (!strata_.empty()) {
    const int s = static_cast<int>(stratum_names_.size());
    for (int c : strata_)
      if (c < 0 || c >= s) throw_error(errc::invalid_argument, "stratum index out of range");
  }
  std::size_t observed = 0;
  for (double v : values_) observed += !is_missing(v);
  if (observed == 0) throw_error(errc::invalid_argument, "every entry is missing");
  n_observed_ = observed;
}

IndicatorDataset IndicatorDataset::stratum_subset(int s) const {
  IndicatorDataset out;
  out.n_indicators_ = n_indicators_;
  out.indicator_names_ = indicator_names_;
  out.group_names_ = group_names_;
  for (std::size_t k = 0; k < n_subjects_; ++k) {
    if (strata_.empty() || strata_[k] != s) continue;
    out.group_.push_back(group_[k]);
    for (std::size_t i = 0; i < n_indicators_; ++i) out.values_.push_back(value(k, i));
  }
  out.n_subjects_ = out.group_.size();
  if (out.n_subjects_ == 0)
    throw_error(errc::stratum_too_small, "stratum has no subjects");
  out.check_invariants();
  return out;
}

ValidationReport validate(const IndicatorDataset& data) {
  ValidationReport report;
  const std::size_t n = data.num_indicators();
  const std::size_t p = data.num_groups();
  report.n_subjects = data.num_subjects();
  report.n_indicators = n;
  report.n_groups = p;
  report.n_observed = data.observed_count();
  report.n_missing = data.num_subjects() * n - report.n_observed;
  report.group_sizes.assign(p, 0);
  report.cell_counts.assign(n * p, 0);

  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const auto z = static_cast<std::size_t>(data.group_of(k));
    ++report.group_sizes[z];
    for (std::size_t i = 0; i < n; ++i)
      if (!data.missing(k, i)) ++report.cell_counts[i * p + z];
  }

  for (std::size_t z = 0; z < p; ++z)
    if (report.group_sizes[z] == 0) report.empty_groups.push_back(z);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t z = 0; z < p; ++z)
      if (report.cell_counts[i * p + z] == 0) report.empty_cells.emplace_back(i, z);

  // An indicator is constant when all of its non-missing values coincide.
  for (std::size_t i = 0; i < n; ++i) {
    bool seen = false, constant = true;
    double first = 0.0;
    for (std::size_t k = 0; k < data.num_subjects() && constant; ++k) {
      if (data.missing(k, i)) continue;
      if (!seen) {
        first = data.value(k, i);
        seen = true;
      } else if (data.value(k, i) != first) {
        constant = false;
      }
    }
    if (seen && constant) report.constant_indicators.push_back(i);
  }
  return report;
}

CellMeans cell_means(const IndicatorDataset& data) {
  const std::size_t n = data.num_indicators();
  const std::size_t p = data.num_groups();
  CellMeans cm;
  cm.n_indicators = n;
  cm.n_groups = p;
  cm.means.assign(n * p, 0.0);
  cm.counts.assign(n * p, 0);
  cm.group_sizes.assign(p, 0);

  std::vector<double> sums(n * p, 0.0);
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const auto z = static_cast<std::size_t>(data.group_of(k));
    ++cm.group_sizes[z];
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.value(k, i);
      if (is_missing(v)) continue;
      sums[i * p + z] += v;
      ++cm.counts[i * p + z];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t z = 0; z < p; ++z) {
      const std::size_t c = cm.counts[i * p + z];
      if (c == 0)
        throw_error(errc::empty_cell,
                    "no observations for indicator '" + data.indicator_names()[i] +
                        "' in group '" + data.group_names()[z] + "'");
      cm.means[i * p + z] = sums[i * p + z] / static_cast<double>(c);
    }
  }
  return cm;
}

}  // namespace structest
