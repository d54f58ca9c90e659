#include "structest/structest.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chi_squared.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "lrt.hpp"
#include "montecarlo.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "simulate.hpp"

struct structest_dataset {
  std::shared_ptr<const structest::IndicatorDataset> data;
};

struct structest_test_result {
  std::shared_ptr<const structest::IndicatorDataset> data;
  std::optional<structest::TestResult> test;
  std::optional<structest::StratifiedResult> stratified;
  std::optional<structest::DiagnosticsTables> diagnostics;
  std::optional<structest::OracleCheck> oracle;
};

struct structest_calibration {
  std::vector<structest::CalibrationResult> rows;
};

namespace {

using structest::errc;
using structest::Error;

thread_local std::string g_last_error;

structest_status status_from(errc code) {
  switch (code) {
    case errc::invalid_argument:
    case errc::invalid_spec:
    case errc::unsupported_scenario:
      return STRUCTEST_ERR_INVALID_ARGUMENT;
    case errc::parse_error:
    case errc::missing_column:
    case errc::non_numeric_indicator:
      return STRUCTEST_ERR_PARSE;
    case errc::empty_cell:
    case errc::insufficient_groups:
    case errc::stratum_too_small:
      return STRUCTEST_ERR_DATA;
    case errc::zero_denominator:
    case errc::degenerate_initialization:
    case errc::all_means_zero:
    case errc::zero_full_variance:
    case errc::not_converged:
      return STRUCTEST_ERR_NUMERICAL;
    case errc::io_error:
      return STRUCTEST_ERR_IO;
  }
  return STRUCTEST_ERR_INVALID_ARGUMENT;
}

template <typename F>
structest_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return STRUCTEST_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STRUCTEST_ERR_INVALID_ARGUMENT;
  } catch (...) {
    g_last_error = "unknown failure";
    return STRUCTEST_ERR_INVALID_ARGUMENT;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(csv.substr(start));
      break;
    }
    out.push_back(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void require(bool ok, const char* message) {
  if (!ok) structest::throw_error(errc::invalid_argument, message);
}

structest::ReportInputs result_report_inputs(const structest_test_result& r,
                                             const char* invocation) {
  structest::ReportInputs inputs;
  inputs.invocation = invocation ? invocation : "";
  inputs.dataset = r.data.get();
  if (r.test) inputs.test = &*r.test;
  if (r.stratified) inputs.stratified = &*r.stratified;
  if (r.diagnostics) inputs.diagnostics = &*r.diagnostics;
  if (r.oracle) inputs.oracle = &*r.oracle;
  return inputs;
}

const structest::TestResult* primary_test(const structest_test_result* r) {
  return r->test ? &*r->test : nullptr;
}

}  // namespace

extern "C" {

const char* structest_version(void) { return structest::kVersion; }

const char* structest_last_error(void) { return g_last_error.c_str(); }

void structest_string_free(char* s) { std::free(s); }

structest_status structest_dataset_from_csv(const char* path, const char* indicator_columns,
                                            const char* group_column,
                                            const char* strata_columns,
                                            structest_dataset** out) {
  return guarded([&] {
    require(path && indicator_columns && group_column && out, "null argument");
    structest::CsvReadOptions options;
    options.indicators = split_list(indicator_columns);
    options.group = group_column;
    if (strata_columns && *strata_columns) options.strata = split_list(strata_columns);
    auto data = std::make_shared<structest::IndicatorDataset>(
        structest::read_csv_file(path, options));
    *out = new structest_dataset{std::move(data)};
  });
}

structest_status structest_dataset_from_arrays(const double* values, int64_t n_subjects,
                                               int64_t n_indicators,
                                               const char* const* group_labels,
                                               const char* const* stratum_labels,
                                               structest_dataset** out) {
  return guarded([&] {
    require(values && group_labels && out, "null argument");
    require(n_subjects > 0 && n_indicators > 0, "dimensions must be positive");
    const auto N = static_cast<std::size_t>(n_subjects);
    const auto n = static_cast<std::size_t>(n_indicators);
    std::vector<double> v(values, values + N * n);
    std::vector<std::string> groups(N);
    for (std::size_t k = 0; k < N; ++k) {
      require(group_labels[k] != nullptr, "null group label");
      groups[k] = group_labels[k];
    }
    std::vector<std::string> strata;
    if (stratum_labels) {
      strata.resize(N);
      for (std::size_t k = 0; k < N; ++k) {
        require(stratum_labels[k] != nullptr, "null stratum label");
        strata[k] = stratum_labels[k];
      }
    }
    auto data = std::make_shared<structest::IndicatorDataset>(
        structest::IndicatorDataset::from_labels(std::move(v), N, n, groups, strata));
    *out = new structest_dataset{std::move(data)};
  });
}

void structest_dataset_free(structest_dataset* ds) { delete ds; }

int64_t structest_dataset_subjects(const structest_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->data->num_subjects()) : -1;
}

int64_t structest_dataset_indicators(const structest_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->data->num_indicators()) : -1;
}

int64_t structest_dataset_groups(const structest_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->data->num_groups()) : -1;
}

int64_t structest_dataset_observed(const structest_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->data->observed_count()) : -1;
}

structest_status structest_dataset_validation_json(const structest_dataset* ds, char** out) {
  return guarded([&] {
    require(ds && out, "null argument");
    const auto v = structest::validate(*ds->data);
    nlohmann::json flags;
    flags["empty_cells"] = nlohmann::json::array();
    for (const auto& [i, z] : v.empty_cells)
      flags["empty_cells"].push_back(
          {ds->data->indicator_names()[i], ds->data->group_names()[z]});
    flags["constant_indicators"] = nlohmann::json::array();
    for (std::size_t i : v.constant_indicators)
      flags["constant_indicators"].push_back(ds->data->indicator_names()[i]);
    flags["empty_groups"] = nlohmann::json::array();
    for (std::size_t z : v.empty_groups)
      flags["empty_groups"].push_back(ds->data->group_names()[z]);
    const nlohmann::json j{{"N", v.n_subjects},     {"n", v.n_indicators},
                           {"p", v.n_groups},       {"m_obs", v.n_observed},
                           {"n_missing", v.n_missing}, {"group_sizes", v.group_sizes},
                           {"flags", flags}};
    *out = dup_string(j.dump());
  });
}

structest_status structest_dataset_to_csv(const structest_dataset* ds, char** out) {
  return guarded([&] {
    require(ds && out, "null argument");
    std::ostringstream s;
    structest::write_csv(*ds->data, s);
    *out = dup_string(s.str());
  });
}

structest_status structest_dataset_write_csv(const structest_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds && path, "null argument");
    structest::write_csv_file(*ds->data, path);
  });
}

void structest_test_options_init(structest_test_options* options) {
  if (!options) return;
  options->tol = 1e-9;
  options->max_iter = 500;
  options->ref_group = nullptr;
  options->stratified = 0;
  options->with_oracle = 0;
  options->lambda = nullptr;
  options->lambda_len = 0;
  options->implied_diagnostics = 0;
}

structest_status structest_run_test(const structest_dataset* ds,
                                    const structest_test_options* options,
                                    structest_test_result** out) {
  return guarded([&] {
    require(ds && out, "null argument");
    structest_test_options defaults;
    structest_test_options_init(&defaults);
    const structest_test_options& opt = options ? *options : defaults;

    structest::FitOptions fit;
    require(opt.tol > 0.0, "tol must be positive");
    require(opt.max_iter > 0, "max_iter must be positive");
    fit.tol = opt.tol;
    fit.max_iter = static_cast<std::size_t>(opt.max_iter);
    if (opt.ref_group) fit.ref_group = std::string(opt.ref_group);

    auto result = std::make_unique<structest_test_result>();
    result->data = ds->data;
    if (opt.stratified) {
      require(!opt.with_oracle && !opt.lambda && !opt.implied_diagnostics,
              "oracle and diagnostics are only available for unstratified tests");
      result->stratified = structest::run_stratified(*ds->data, fit);
    } else {
      result->test = structest::run_test(*ds->data, fit);
      if (opt.with_oracle)
        result->oracle = structest::oracle_check(*ds->data, result->test->fit);
      if (opt.lambda || opt.implied_diagnostics) {
        std::optional<std::vector<double>> lambda;
        if (opt.lambda) {
          require(opt.lambda_len == static_cast<int64_t>(ds->data->num_indicators()),
                  "lambda length must equal the indicator count");
          lambda = std::vector<double>(opt.lambda, opt.lambda + opt.lambda_len);
        }
        result->diagnostics = structest::compute_diagnostics(
            *ds->data, result->test->fit, lambda, std::nullopt, 0);
      }
    }
    *out = result.release();
  });
}

void structest_test_result_free(structest_test_result* result) { delete result; }

double structest_test_result_statistic(const structest_test_result* r) {
  if (!r) return -1.0;
  if (const auto* t = primary_test(r)) return t->statistic;
  return r->stratified->combined_statistic;
}

int64_t structest_test_result_df(const structest_test_result* r) {
  if (!r) return -1;
  if (const auto* t = primary_test(r)) return static_cast<int64_t>(t->df);
  return static_cast<int64_t>(r->stratified->combined_df);
}

double structest_test_result_p_value(const structest_test_result* r) {
  if (!r) return -1.0;
  if (const auto* t = primary_test(r)) return t->p_value;
  return r->stratified->combined_p;
}

double structest_test_result_sigma2_restricted(const structest_test_result* r) {
  const auto* t = r ? primary_test(r) : nullptr;
  return t ? t->sigma2_restricted : -1.0;
}

double structest_test_result_sigma2_full(const structest_test_result* r) {
  const auto* t = r ? primary_test(r) : nullptr;
  return t ? t->sigma2_full : -1.0;
}

int64_t structest_test_result_m_obs(const structest_test_result* r) {
  if (!r) return -1;
  if (const auto* t = primary_test(r)) return static_cast<int64_t>(t->m_obs);
  int64_t m = 0;
  for (const auto& s : r->stratified->per_stratum) m += static_cast<int64_t>(s.result.m_obs);
  return m;
}

int structest_test_result_converged(const structest_test_result* r) {
  if (!r) return 0;
  if (const auto* t = primary_test(r)) return t->fit.converged ? 1 : 0;
  for (const auto& s : r->stratified->per_stratum)
    if (!s.result.fit.converged) return 0;
  return 1;
}

int structest_test_result_degenerate(const structest_test_result* r) {
  if (!r) return 0;
  if (const auto* t = primary_test(r)) return t->degenerate ? 1 : 0;
  for (const auto& s : r->stratified->per_stratum)
    if (s.result.degenerate) return 1;
  return 0;
}

int structest_test_result_stratified(const structest_test_result* r) {
  return r && r->stratified ? 1 : 0;
}

int64_t structest_test_result_strata(const structest_test_result* r) {
  if (!r || !r->stratified) return 0;
  return static_cast<int64_t>(r->stratified->per_stratum.size());
}

structest_status structest_test_result_render(const structest_test_result* r,
                                              const char* format, const char* invocation,
                                              char** out) {
  return guarded([&] {
    require(r && format && out, "null argument");
    const auto fmt = structest::report_format_from_name(format);
    *out = dup_string(structest::render_report(result_report_inputs(*r, invocation), fmt));
  });
}

double structest_chi_sq_sf(double x, int64_t df) {
  double value = std::numeric_limits<double>::quiet_NaN();
  guarded([&] {
    require(df > 0, "df must be positive");
    value = structest::chi_sq_sf(x, static_cast<std::size_t>(df));
  });
  return value;
}

int64_t structest_degrees_of_freedom(int64_t n, int64_t p) {
  if (n < 1 || p < 1) return -1;
  return (n - 1) * (p - 1);
}

structest_status structest_simulate(const char* scenario_json, uint64_t seed,
                                    structest_dataset** out) {
  return guarded([&] {
    require(scenario_json && out, "null argument");
    const auto spec = structest::ScenarioSpec::from_json(scenario_json);
    auto data = std::make_shared<structest::IndicatorDataset>(structest::generate(spec, seed));
    *out = new structest_dataset{std::move(data)};
  });
}

structest_status structest_population_cell_means(const char* scenario_json, char** out) {
  return guarded([&] {
    require(scenario_json && out, "null argument");
    const auto spec = structest::ScenarioSpec::from_json(scenario_json);
    const auto means = structest::population_cell_means(spec);
    const std::size_t p = spec.num_groups();
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < spec.n; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t z = 0; z < p; ++z) row.push_back(means[i * p + z]);
      rows.push_back(row);
    }
    *out = dup_string(rows.dump());
  });
}

structest_status structest_calibrate(const char* scenario_json, double alpha_level,
                                     int64_t replicates, uint64_t seed, int64_t threads,
                                     structest_calibration** out) {
  return guarded([&] {
    require(scenario_json && out, "null argument");
    require(replicates > 0, "replicates must be positive");
    require(threads >= 0, "threads must be nonnegative");
    const auto spec = structest::ScenarioSpec::from_json(scenario_json);
    structest::CalibrationOptions options;
    options.threads = static_cast<std::size_t>(threads);
    auto result = std::make_unique<structest_calibration>();
    result->rows.push_back(structest::rejection_rate(
        spec, alpha_level, static_cast<std::size_t>(replicates), seed, options));
    *out = result.release();
  });
}

structest_status structest_power_curve(const char* grid_json, double alpha_level,
                                       int64_t replicates, uint64_t seed, int64_t threads,
                                       structest_calibration** out) {
  return guarded([&] {
    require(grid_json && out, "null argument");
    require(replicates > 0, "replicates must be positive");
    require(threads >= 0, "threads must be nonnegative");
    nlohmann::json grid;
    try {
      grid = nlohmann::json::parse(grid_json);
    } catch (const nlohmann::json::exception& e) {
      structest::throw_error(errc::invalid_spec,
                             std::string("grid is not valid JSON: ") + e.what());
    }
    if (!grid.is_array())
      structest::throw_error(errc::invalid_spec, "grid must be a JSON array of scenarios");
    std::vector<structest::ScenarioSpec> specs;
    specs.reserve(grid.size());
    for (const auto& entry : grid)
      specs.push_back(structest::ScenarioSpec::from_json(entry.dump()));
    structest::CalibrationOptions options;
    options.threads = static_cast<std::size_t>(threads);
    auto result = std::make_unique<structest_calibration>();
    result->rows = structest::power_curve(specs, alpha_level,
                                          static_cast<std::size_t>(replicates), seed, options);
    *out = result.release();
  });
}

void structest_calibration_free(structest_calibration* c) { delete c; }

int64_t structest_calibration_rows(const structest_calibration* c) {
  return c ? static_cast<int64_t>(c->rows.size()) : -1;
}

double structest_calibration_rate(const structest_calibration* c, int64_t row) {
  if (!c || row < 0 || row >= static_cast<int64_t>(c->rows.size())) return -1.0;
  return c->rows[static_cast<std::size_t>(row)].rate;
}

double structest_calibration_ci_low(const structest_calibration* c, int64_t row) {
  if (!c || row < 0 || row >= static_cast<int64_t>(c->rows.size())) return -1.0;
  return c->rows[static_cast<std::size_t>(row)].ci_low;
}

double structest_calibration_ci_high(const structest_calibration* c, int64_t row) {
  if (!c || row < 0 || row >= static_cast<int64_t>(c->rows.size())) return -1.0;
  return c->rows[static_cast<std::size_t>(row)].ci_high;
}

int64_t structest_calibration_rejections(const structest_calibration* c, int64_t row) {
  if (!c || row < 0 || row >= static_cast<int64_t>(c->rows.size())) return -1;
  return static_cast<int64_t>(c->rows[static_cast<std::size_t>(row)].rejections);
}

structest_status structest_calibration_render(const structest_calibration* c, const char* format,
                                              const char* invocation, char** out) {
  return guarded([&] {
    require(c && format && out, "null argument");
    structest::ReportInputs inputs;
    inputs.invocation = invocation ? invocation : "";
    inputs.calibration = &c->rows;
    const auto fmt = structest::report_format_from_name(format);
    *out = dup_string(structest::render_report(inputs, fmt));
  });
}

structest_status structest_diagnose(const structest_dataset* ds, const double* lambda,
                                    int64_t lambda_len, const char* ref_group,
                                    int64_t ref_indicator, const char* format,
                                    const char* invocation, char** out) {
  return guarded([&] {
    require(ds && format && out, "null argument");
    require(ref_indicator >= 1, "ref_indicator is 1-based");
    std::optional<std::vector<double>> lam;
    if (lambda) {
      require(lambda_len == static_cast<int64_t>(ds->data->num_indicators()),
              "lambda length must equal the indicator count");
      lam = std::vector<double>(lambda, lambda + lambda_len);
    }
    const auto fit = structest::fit_restricted(*ds->data);
    std::optional<std::string> ref;
    if (ref_group) ref = std::string(ref_group);
    const auto tables = structest::compute_diagnostics(
        *ds->data, fit, lam, ref, static_cast<std::size_t>(ref_indicator - 1));

    structest::ReportInputs inputs;
    inputs.invocation = invocation ? invocation : "";
    inputs.dataset = ds->data.get();
    inputs.diagnostics = &tables;
    const auto fmt = structest::report_format_from_name(format);
    *out = dup_string(structest::render_report(inputs, fmt));
  });
}

}  // extern "C"
