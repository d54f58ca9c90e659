// Command-line front end; all analysis goes through the structest C API.

#include "structest/structest.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

int exit_code_for(structest_status status) {
  switch (status) {
    case STRUCTEST_OK: return 0;
    case STRUCTEST_ERR_INVALID_ARGUMENT: return 1;
    case STRUCTEST_ERR_PARSE:
    case STRUCTEST_ERR_DATA:
    case STRUCTEST_ERR_IO: return 2;
    case STRUCTEST_ERR_NUMERICAL: return 3;
  }
  return 1;
}

int fail(structest_status status) {
  std::cerr << "structest: " << structest_last_error() << "\n";
  return exit_code_for(status);
}

struct DatasetDeleter {
  void operator()(structest_dataset* ds) const { structest_dataset_free(ds); }
};
struct ResultDeleter {
  void operator()(structest_test_result* r) const { structest_test_result_free(r); }
};
struct CalibrationDeleter {
  void operator()(structest_calibration* c) const { structest_calibration_free(c); }
};
using DatasetHandle = std::unique_ptr<structest_dataset, DatasetDeleter>;
using ResultHandle = std::unique_ptr<structest_test_result, ResultDeleter>;
using CalibrationHandle = std::unique_ptr<structest_calibration, CalibrationDeleter>;

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { structest_string_free(value); }
};

std::string join_invocation(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

uint64_t env_default_seed() {
  const char* env = std::getenv("STRUCTEST_SEED");
  if (!env || !*env) return 0;
  return std::strtoull(env, nullptr, 10);
}

// Atomic replace so a crashed run never leaves a truncated report behind.
int emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
    return 0;
  }
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "structest: cannot open '" << tmp << "' for writing\n";
      return 2;
    }
    out << content;
    if (!out.flush()) {
      std::cerr << "structest: write to '" << tmp << "' failed\n";
      return 2;
    }
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0) {
    std::remove(tmp.c_str());
    std::cerr << "structest: cannot rename '" << tmp << "' to '" << out_path << "'\n";
    return 2;
  }
  return 0;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::optional<std::string> read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- test ----

struct TestArgs {
  std::string data_path, indicators, group, strata;
  double tol = 1e-9;
  int64_t max_iter = 500;
  std::string ref_group;
  bool with_oracle = false;
  std::string lambda;
  bool implied = false;
  std::string out_path, format = "json", dump_path;
};

int run_test_command(const TestArgs& args, const std::string& invocation) {
  DatasetHandle ds;
  {
    structest_dataset* raw = nullptr;
    const auto status = structest_dataset_from_csv(
        args.data_path.c_str(), args.indicators.c_str(), args.group.c_str(),
        args.strata.empty() ? nullptr : args.strata.c_str(), &raw);
    if (status != STRUCTEST_OK) return fail(status);
    ds.reset(raw);
  }

  if (!args.dump_path.empty()) {
    const auto status = structest_dataset_write_csv(ds.get(), args.dump_path.c_str());
    if (status != STRUCTEST_OK) return fail(status);
  }

  structest_test_options options;
  structest_test_options_init(&options);
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  if (!args.ref_group.empty()) options.ref_group = args.ref_group.c_str();
  options.stratified = args.strata.empty() ? 0 : 1;
  options.with_oracle = args.with_oracle ? 1 : 0;
  std::vector<double> lambda;
  if (!args.lambda.empty()) {
    lambda = parse_double_list(args.lambda);
    options.lambda = lambda.data();
    options.lambda_len = static_cast<int64_t>(lambda.size());
  }
  options.implied_diagnostics = args.implied ? 1 : 0;

  ResultHandle result;
  {
    structest_test_result* raw = nullptr;
    const auto status = structest_run_test(ds.get(), &options, &raw);
    if (status != STRUCTEST_OK) return fail(status);
    result.reset(raw);
  }

  OwnedString rendered;
  const auto status = structest_test_result_render(result.get(), args.format.c_str(),
                                                   invocation.c_str(), &rendered.value);
  if (status != STRUCTEST_OK) return fail(status);
  const int emitted = emit(rendered.value, args.out_path);
  if (emitted != 0) return emitted;

  if (!structest_test_result_converged(result.get())) {
    std::cerr << "structest: fit did not converge within " << args.max_iter
              << " iterations\n";
    return 3;
  }
  return 0;
}

// ------------------------------------------------------------ simulate ----

struct SimulateArgs {
  std::string spec_path;
  std::string scenario = "structural";
  int64_t n = 0, p = 0, subjects = 0;
  std::string group_probs, lambda, noise_sd, eta_shift;
  std::vector<std::string> direct_shift;  // i:z:value entries
  std::string noise_dist;
  double eta_mean = 0.0, eta_sd = 1.0;
  double confounder_strength = 0.0, outcome_slope = 1.0;
  int64_t outcome_indicator = 1;
  bool mixed_pathways = false;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out_path;
};

std::string build_scenario_json(const SimulateArgs& args) {
  json spec;
  spec["scenario"] = args.scenario;
  spec["n"] = args.n;
  spec["N"] = args.subjects;
  if (!args.group_probs.empty())
    spec["group_probs"] = parse_double_list(args.group_probs);
  else
    spec["p"] = args.p;
  if (!args.lambda.empty()) spec["lambda"] = parse_double_list(args.lambda);
  if (!args.noise_sd.empty()) {
    const auto values = parse_double_list(args.noise_sd);
    if (values.size() == 1)
      spec["noise_sd"] = values[0];
    else
      spec["noise_sd"] = values;
  }
  if (!args.noise_dist.empty()) spec["noise_dist"] = args.noise_dist;
  spec["eta_mean"] = args.eta_mean;
  spec["eta_sd"] = args.eta_sd;
  if (!args.eta_shift.empty()) spec["eta_shift"] = parse_double_list(args.eta_shift);
  if (!args.direct_shift.empty()) {
    const auto p = args.group_probs.empty()
                       ? static_cast<std::size_t>(args.p)
                       : parse_double_list(args.group_probs).size();
    std::vector<std::vector<double>> shift(static_cast<std::size_t>(args.n),
                                           std::vector<double>(p, 0.0));
    for (const auto& entry : args.direct_shift) {
      std::stringstream stream(entry);
      std::string i_s, z_s, v_s;
      if (!std::getline(stream, i_s, ':') || !std::getline(stream, z_s, ':') ||
          !std::getline(stream, v_s))
        throw CLI::ValidationError("--direct-shift", "expected i:z:value");
      const auto i = static_cast<std::size_t>(std::stoll(i_s));
      const auto z = static_cast<std::size_t>(std::stoll(z_s));
      if (i < 1 || i > static_cast<std::size_t>(args.n) || z < 1 || z > p)
        throw CLI::ValidationError("--direct-shift", "index out of range");
      shift[i - 1][z - 1] = std::stod(v_s);
    }
    spec["direct_shift"] = shift;
  }
  if (args.confounder_strength != 0.0) spec["confounder_strength"] = args.confounder_strength;
  if (args.scenario == "single_indicator") {
    spec["outcome_indicator"] = args.outcome_indicator;
    spec["outcome_slope"] = args.outcome_slope;
  }
  if (args.mixed_pathways) spec["mixed_pathways"] = true;
  return spec.dump();
}

int run_simulate_command(const SimulateArgs& args) {
  std::string scenario_json;
  if (!args.spec_path.empty()) {
    const auto text = read_text_file(args.spec_path);
    if (!text) {
      std::cerr << "structest: cannot read '" << args.spec_path << "'\n";
      return 2;
    }
    scenario_json = *text;
  } else {
    if (args.n < 1 || args.subjects < 1 || (args.p < 1 && args.group_probs.empty())) {
      std::cerr << "structest: simulate needs --n, --N and --p (or --group-probs), "
                   "or a --spec file\n";
      return 1;
    }
    scenario_json = build_scenario_json(args);
  }

  const uint64_t seed = args.seed_given ? args.seed : env_default_seed();
  DatasetHandle ds;
  {
    structest_dataset* raw = nullptr;
    const auto status = structest_simulate(scenario_json.c_str(), seed, &raw);
    if (status != STRUCTEST_OK) return fail(status);
    ds.reset(raw);
  }
  if (args.out_path.empty()) {
    OwnedString csv;
    const auto status = structest_dataset_to_csv(ds.get(), &csv.value);
    if (status != STRUCTEST_OK) return fail(status);
    std::cout << csv.value;
    return 0;
  }
  const auto status = structest_dataset_write_csv(ds.get(), args.out_path.c_str());
  if (status != STRUCTEST_OK) return fail(status);
  return 0;
}

// ------------------------------------------------------------ calibrate ----

struct CalibrateArgs {
  std::string spec_path;
  double alpha = 0.05;
  int64_t replicates = 1000;
  uint64_t seed = 0;
  bool seed_given = false;
  int64_t threads = 0;
  std::string out_path, format = "csv-table";
};

int run_calibrate_command(const CalibrateArgs& args, const std::string& invocation) {
  const auto text = read_text_file(args.spec_path);
  if (!text) {
    std::cerr << "structest: cannot read '" << args.spec_path << "'\n";
    return 2;
  }
  const uint64_t seed = args.seed_given ? args.seed : env_default_seed();

  // A JSON array is a grid (one row per scenario); an object is one row.
  bool is_grid = false;
  for (char c : *text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    is_grid = c == '[';
    break;
  }

  CalibrationHandle result;
  {
    structest_calibration* raw = nullptr;
    const auto status =
        is_grid ? structest_power_curve(text->c_str(), args.alpha, args.replicates, seed,
                                        args.threads, &raw)
                : structest_calibrate(text->c_str(), args.alpha, args.replicates, seed,
                                      args.threads, &raw);
    if (status != STRUCTEST_OK) return fail(status);
    result.reset(raw);
  }

  OwnedString rendered;
  const auto status = structest_calibration_render(result.get(), args.format.c_str(),
                                                   invocation.c_str(), &rendered.value);
  if (status != STRUCTEST_OK) return fail(status);
  return emit(rendered.value, args.out_path);
}

// ------------------------------------------------------------- diagnose ----

struct DiagnoseArgs {
  std::string data_path, indicators, group;
  std::string lambda;
  bool implied = false;
  std::string ref_group;
  int64_t ref_indicator = 1;
  std::string out_path, format = "text";
};

int run_diagnose_command(const DiagnoseArgs& args, const std::string& invocation) {
  if (args.lambda.empty() && !args.implied) {
    std::cerr << "structest: diagnose needs --lambda or --implied\n";
    return 1;
  }
  DatasetHandle ds;
  {
    structest_dataset* raw = nullptr;
    const auto status = structest_dataset_from_csv(args.data_path.c_str(),
                                                   args.indicators.c_str(),
                                                   args.group.c_str(), nullptr, &raw);
    if (status != STRUCTEST_OK) return fail(status);
    ds.reset(raw);
  }
  std::vector<double> lambda;
  if (!args.lambda.empty()) lambda = parse_double_list(args.lambda);

  OwnedString rendered;
  const auto status = structest_diagnose(
      ds.get(), lambda.empty() ? nullptr : lambda.data(),
      static_cast<int64_t>(lambda.size()),
      args.ref_group.empty() ? nullptr : args.ref_group.c_str(), args.ref_indicator,
      args.format.c_str(), invocation.c_str(), &rendered.value);
  if (status != STRUCTEST_OK) return fail(status);
  return emit(rendered.value, args.out_path);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string invocation = join_invocation(argc, argv);

  CLI::App app{std::string("structest ") + structest_version() +
               " - likelihood-ratio test of a rank-1 indicator-by-group mean structure"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Test a CSV dataset");
  test->add_option("data", test_args.data_path, "input CSV file")->required();
  test->add_option("--indicators", test_args.indicators,
                   "comma-separated indicator column names")->required();
  test->add_option("--group", test_args.group, "grouping column name")->required();
  test->add_option("--strata", test_args.strata,
                   "comma-separated stratum column names (runs per-stratum tests)");
  test->add_option("--tol", test_args.tol, "convergence tolerance on the residual mean square");
  test->add_option("--max-iter", test_args.max_iter, "iteration cap for the alternating fit");
  test->add_option("--ref-group", test_args.ref_group, "initialization group label");
  test->add_flag("--oracle", test_args.with_oracle,
                 "cross-check the fit against an independent spectral solution");
  test->add_option("--lambda", test_args.lambda,
                   "comma-separated loadings for the diagnostic tables");
  test->add_flag("--implied", test_args.implied, "diagnostic tables with fitted loadings");
  test->add_option("--out", test_args.out_path, "output file (default: stdout)");
  test->add_option("--format", test_args.format, "json, text or csv-table")
      ->check(CLI::IsMember({"json", "text", "csv-table"}));
  test->add_option("--dump-data", test_args.dump_path, "write the ingested dataset back as CSV");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset as CSV");
  sim->add_option("--spec", sim_args.spec_path, "scenario spec JSON file");
  sim->add_option("--scenario", sim_args.scenario,
                  "structural, direct, confounded or single_indicator");
  sim->add_option("--n", sim_args.n, "indicator count");
  sim->add_option("--p", sim_args.p, "group count (equal probabilities)");
  sim->add_option("--group-probs", sim_args.group_probs, "comma-separated group probabilities");
  sim->add_option("--N", sim_args.subjects, "subject count");
  sim->add_option("--lambda", sim_args.lambda, "comma-separated loadings (default: all 1)");
  sim->add_option("--noise-sd", sim_args.noise_sd, "error sd, scalar or comma-separated");
  sim->add_option("--noise-dist", sim_args.noise_dist, "gaussian or uniform");
  sim->add_option("--eta-mean", sim_args.eta_mean, "latent mean");
  sim->add_option("--eta-sd", sim_args.eta_sd, "latent sd");
  sim->add_option("--eta-shift", sim_args.eta_shift, "comma-separated latent shift per group");
  sim->add_option("--direct-shift", sim_args.direct_shift,
                  "i:z:value direct indicator shift (repeatable, 1-based)");
  sim->add_option("--confounder-strength", sim_args.confounder_strength,
                  "confounded scenario slope");
  sim->add_option("--outcome-indicator", sim_args.outcome_indicator,
                  "single_indicator scenario: driving indicator (1-based)");
  sim->add_option("--outcome-slope", sim_args.outcome_slope,
                  "single_indicator scenario: logistic slope");
  sim->add_flag("--mixed-pathways", sim_args.mixed_pathways,
                "allow eta_shift alongside direct shifts");
  sim->add_option("--seed", sim_args.seed, "generator seed (default: $STRUCTEST_SEED or 0)")
      ->each([&](const std::string&) { sim_args.seed_given = true; });
  sim->add_option("--out", sim_args.out_path, "output CSV file (default: stdout)");

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate",
                                 "Estimate the empirical rejection rate over replicates");
  cal->add_option("--spec", cal_args.spec_path,
                  "scenario spec JSON file (an array runs a grid)")->required();
  cal->add_option("--alpha", cal_args.alpha, "nominal level");
  cal->add_option("--replicates", cal_args.replicates, "number of simulated datasets");
  cal->add_option("--seed", cal_args.seed, "master seed (default: $STRUCTEST_SEED or 0)")
      ->each([&](const std::string&) { cal_args.seed_given = true; });
  cal->add_option("--threads", cal_args.threads, "worker threads (0: hardware)");
  cal->add_option("--out", cal_args.out_path, "output file (default: stdout)");
  cal->add_option("--format", cal_args.format, "json, text or csv-table")
      ->check(CLI::IsMember({"json", "text", "csv-table"}));

  DiagnoseArgs diag_args;
  auto* diag = app.add_subcommand("diagnose", "Diagnostic tables for a CSV dataset");
  diag->add_option("data", diag_args.data_path, "input CSV file")->required();
  diag->add_option("--indicators", diag_args.indicators,
                   "comma-separated indicator column names")->required();
  diag->add_option("--group", diag_args.group, "grouping column name")->required();
  diag->add_option("--lambda", diag_args.lambda, "comma-separated loadings");
  diag->add_flag("--implied", diag_args.implied, "use loadings implied by the fit");
  diag->add_option("--ref-group", diag_args.ref_group, "contrast reference group label");
  diag->add_option("--ref-indicator", diag_args.ref_indicator,
                   "ratio reference indicator (1-based)");
  diag->add_option("--out", diag_args.out_path, "output file (default: stdout)");
  diag->add_option("--format", diag_args.format, "json, text or csv-table")
      ->check(CLI::IsMember({"json", "text", "csv-table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (test->parsed()) return run_test_command(test_args, invocation);
    if (sim->parsed()) return run_simulate_command(sim_args);
    if (cal->parsed()) return run_calibrate_command(cal_args, invocation);
    if (diag->parsed()) return run_diagnose_command(diag_args, invocation);
  } catch (const std::exception& e) {
    std::cerr << "structest: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
