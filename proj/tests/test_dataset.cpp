#include <doctest.h>

#include <algorithm>
#include <random>

#include "dataset.hpp"
#include "errors.hpp"
#include "testutil.hpp"

using namespace structest;

namespace {

IndicatorDataset small_complete() {
  // 4 subjects, 2 indicators, 2 groups, no missing
  return IndicatorDataset::from_labels({1.0, 2.0,
                                        3.0, 2.0,
                                        5.0, 4.0,
                                        7.0, 6.0},
                                       4, 2, {"a", "a", "b", "b"});
}

}  // namespace

TEST_CASE("validate reports dimensions and counts") {
  const auto report = validate(small_complete());
  CHECK(report.n_subjects == 4);
  CHECK(report.n_indicators == 2);
  CHECK(report.n_groups == 2);
  CHECK(report.n_observed == 8);
  CHECK(report.n_missing == 0);
  CHECK(report.empty_cells.empty());
  CHECK(report.constant_indicators.empty());
  CHECK(report.empty_groups.empty());
  CHECK(report.testable());
}

TEST_CASE("validate flags an empty cell") {
  // indicator 2 missing for every subject in group 1
  const double na = missing_value();
  const auto ds = IndicatorDataset::from_labels({1.0, na,
                                                 3.0, na,
                                                 5.0, 4.0},
                                                3, 2, {"g1", "g1", "g2"});
  const auto report = validate(ds);
  REQUIRE(report.empty_cells.size() == 1);
  CHECK(report.empty_cells[0].first == 1);
  CHECK(report.empty_cells[0].second == 0);
  CHECK(!report.testable());
  CHECK_THROWS_AS((void)cell_means(ds), Error);
}

TEST_CASE("validate counts missing entries") {
  const double na = missing_value();
  const auto ds = IndicatorDataset::from_labels({1.0, na,
                                                 3.0, 2.0,
                                                 5.0, 4.0,
                                                 7.0, 6.0},
                                                4, 2, {"a", "a", "b", "b"});
  const auto report = validate(ds);
  CHECK(report.n_observed == 4 * 2 - 1);
  CHECK(report.n_missing == 1);
}

TEST_CASE("validate flags constant indicators") {
  const auto ds = IndicatorDataset::from_labels({1.0, 5.0,
                                                 2.0, 5.0,
                                                 3.0, 5.0},
                                                3, 2, {"a", "a", "b"});
  const auto report = validate(ds);
  REQUIRE(report.constant_indicators.size() == 1);
  CHECK(report.constant_indicators[0] == 1);
}

TEST_CASE("cell means are exact per-cell averages") {
  const auto cm = cell_means(small_complete());
  CHECK(cm.mean(0, 0) == 2.0);  // {1, 3}
  CHECK(cm.mean(1, 0) == 2.0);  // {2, 2}
  CHECK(cm.mean(0, 1) == 6.0);  // {5, 7}
  CHECK(cm.mean(1, 1) == 5.0);  // {4, 6}
  CHECK(cm.count(0, 0) == 2);
  CHECK(cm.group_sizes[0] == 2);
  CHECK(cm.group_sizes[1] == 2);
}

TEST_CASE("cell means use available cases") {
  // group 1 holds X1 values {1, missing, 3, 4} -> mean 8/3 over 3 cases
  const double na = missing_value();
  const auto ds = IndicatorDataset::from_labels({1.0, na, 3.0, 4.0, 2.0},
                                                5, 1, {"g1", "g1", "g1", "g1", "g2"});
  const auto cm = cell_means(ds);
  CHECK(cm.mean(0, 0) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(cm.count(0, 0) == 3);
  CHECK(cm.mean(0, 1) == 2.0);
}

TEST_CASE("constant data means are the constant") {
  const auto ds = IndicatorDataset::from_labels({3.5, 3.5, 3.5, 3.5},
                                                2, 2, {"a", "b"});
  const auto cm = cell_means(ds);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t z = 0; z < 2; ++z) CHECK(cm.mean(i, z) == 3.5);
}

TEST_CASE("cell means are invariant to subject permutation") {
  std::mt19937_64 rng(11);
  const auto ds = test::random_dataset(rng, 3, 2, 40, 0.15);
  const auto cm = cell_means(ds);

  // rebuild with rows reversed
  const std::size_t n = ds.num_indicators();
  std::vector<double> values;
  std::vector<std::string> groups;
  for (std::size_t k = ds.num_subjects(); k-- > 0;) {
    groups.push_back(ds.group_names()[static_cast<std::size_t>(ds.group_of(k))]);
    for (std::size_t i = 0; i < n; ++i) values.push_back(ds.value(k, i));
  }
  const auto reversed =
      IndicatorDataset::from_labels(std::move(values), ds.num_subjects(), n, groups);
  const auto cm2 = cell_means(reversed);

  // group label order differs; compare by label
  for (std::size_t z = 0; z < ds.num_groups(); ++z) {
    const auto& label = ds.group_names()[z];
    const auto it = std::find(reversed.group_names().begin(), reversed.group_names().end(),
                              label);
    REQUIRE(it != reversed.group_names().end());
    const auto z2 = static_cast<std::size_t>(it - reversed.group_names().begin());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(cm2.mean(i, z2) == doctest::Approx(cm.mean(i, z)).epsilon(1e-13));
      CHECK(cm2.count(i, z2) == cm.count(i, z));
    }
  }
}

TEST_CASE("relabeling groups permutes cell-mean columns") {
  const auto ds = small_complete();
  const auto cm = cell_means(ds);
  // swap the labels: subjects previously in 'a' now carry 'b'
  const auto swapped = IndicatorDataset::from_labels({1.0, 2.0,
                                                      3.0, 2.0,
                                                      5.0, 4.0,
                                                      7.0, 6.0},
                                                     4, 2, {"b", "b", "a", "a"});
  const auto cm2 = cell_means(swapped);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(cm2.mean(i, 0) == cm.mean(i, 0));  // first-appearance column is still first
    CHECK(cm2.mean(i, 1) == cm.mean(i, 1));
  }
  // label identity moved
  CHECK(swapped.group_names()[0] == "b");
}

TEST_CASE("complete data counts equal group sizes") {
  std::mt19937_64 rng(5);
  const auto ds = test::random_dataset(rng, 4, 3, 60);
  const auto cm = cell_means(ds);
  std::size_t total = 0;
  for (std::size_t z = 0; z < cm.n_groups; ++z) {
    total += cm.group_sizes[z];
    for (std::size_t i = 0; i < cm.n_indicators; ++i)
      CHECK(cm.count(i, z) == cm.group_sizes[z]);
  }
  CHECK(total == ds.num_subjects());
}

TEST_CASE("construction rejects bad shapes") {
  CHECK_THROWS_AS(IndicatorDataset::from_labels({1.0}, 1, 2, {"a"}), Error);
  CHECK_THROWS_AS(IndicatorDataset::from_labels({}, 0, 1, {}), Error);
  const double na = missing_value();
  CHECK_THROWS_AS(IndicatorDataset::from_labels({na, na}, 1, 2, {"a"}), Error);
  CHECK_THROWS_AS(IndicatorDataset::from_labels({1.0, 2.0}, 2, 1, {"a"}), Error);
}

TEST_CASE("explicit group universe can leave a group empty") {
  const auto ds = IndicatorDataset::from_indices({1.0, 2.0}, 2, 1, {0, 0}, {"1", "2"});
  const auto report = validate(ds);
  REQUIRE(report.empty_groups.size() == 1);
  CHECK(report.empty_groups[0] == 1);
  CHECK_THROWS_AS((void)cell_means(ds), Error);
}

TEST_CASE("stratum subsets keep the full group universe") {
  const auto ds = IndicatorDataset::from_labels({1.0, 2.0, 3.0, 4.0},
                                                4, 1, {"a", "a", "b", "b"},
                                                {"s1", "s2", "s1", "s1"});
  const auto sub = ds.stratum_subset(0);
  CHECK(sub.num_subjects() == 3);
  CHECK(sub.num_groups() == 2);
  const auto sub2 = ds.stratum_subset(1);
  CHECK(sub2.num_subjects() == 1);
  CHECK(sub2.num_groups() == 2);  // group "b" absent but still in the universe
  const auto report = validate(sub2);
  CHECK(!report.testable());
}
