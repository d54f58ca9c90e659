#include "simulate.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <cmath>
#include <utility>

#include "errors.hpp"
#include "rng.hpp"

namespace structest {

namespace {

using nlohmann::json;

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

double logit(double q) { return std::log(q / (1.0 - q)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kStructural: return "structural";
    case Scenario::kDirect: return "direct";
    case Scenario::kConfounded: return "confounded";
    case Scenario::kSingleIndicator: return "single_indicator";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "structural") return Scenario::kStructural;
  if (name == "direct") return Scenario::kDirect;
  if (name == "confounded") return Scenario::kConfounded;
  if (name == "single_indicator") return Scenario::kSingleIndicator;
  throw_error(errc::invalid_spec, "unknown scenario '" + name + "'");
}

// Lower Cholesky factor of the noise correlation, or empty when none given.
Eigen::MatrixXd noise_cholesky(const ScenarioSpec& spec) {
  if (spec.noise_corr.empty()) return {};
  const auto n = static_cast<Eigen::Index>(spec.n);
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      corr(i, j) = spec.noise_corr[static_cast<std::size_t>(i) * spec.n +
                                   static_cast<std::size_t>(j)];
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success)
    throw_error(errc::invalid_spec, "noise correlation is not positive definite");
  return llt.matrixL();
}

std::size_t draw_group(SplitMix64& stream, const std::vector<double>& probs) {
  const double u = stream.uniform01();
  double cum = 0.0;
  for (std::size_t z = 0; z + 1 < probs.size(); ++z) {
    cum += probs[z];
    if (u < cum) return z;
  }
  return probs.size() - 1;
}

// Unit-variance error draw for one indicator substream.
double unit_noise(SplitMix64& stream, NoiseDistribution dist) {
  if (dist == NoiseDistribution::kGaussian) return stream.normal();
  constexpr double kHalfWidth = 1.7320508075688772;  // sqrt(3): sd 1
  return stream.uniform(-kHalfWidth, kHalfWidth);
}

}  // namespace

void ScenarioSpec::check() const {
  const std::size_t p = num_groups();
  if (n < 1) throw_error(errc::invalid_spec, "need at least one indicator");
  if (num_subjects < 1) throw_error(errc::invalid_spec, "need at least one subject");
  if (lambda.size() != n) throw_error(errc::invalid_spec, "lambda must have length n");
  if (noise_sd.size() != n) throw_error(errc::invalid_spec, "noise_sd must have length n");
  for (double s : noise_sd)
    if (!(s > 0.0)) throw_error(errc::invalid_spec, "noise_sd entries must be positive");
  if (!(eta_sd > 0.0)) throw_error(errc::invalid_spec, "eta_sd must be positive");
  if (p == 0) throw_error(errc::invalid_spec, "group_probs must be nonempty");
  double sum = 0.0;
  for (double q : group_probs) {
    if (!(q >= 0.0)) throw_error(errc::invalid_spec, "group probabilities must be nonnegative");
    sum += q;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw_error(errc::invalid_spec, "group_probs must sum to 1");
  if (eta_shift.size() != p) throw_error(errc::invalid_spec, "eta_shift must have length p");
  if (direct_shift.size() != n * p)
    throw_error(errc::invalid_spec, "direct_shift must be an n x p matrix");

  if (!noise_corr.empty()) {
    if (noise_corr.size() != n * n)
      throw_error(errc::invalid_spec, "noise_corr must be an n x n matrix");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::fabs(noise_corr[i * n + i] - 1.0) > 1e-12)
        throw_error(errc::invalid_spec, "noise_corr must have a unit diagonal");
      for (std::size_t j = 0; j < i; ++j)
        if (std::fabs(noise_corr[i * n + j] - noise_corr[j * n + i]) > 1e-12)
          throw_error(errc::invalid_spec, "noise_corr must be symmetric");
    }
    if (noise_dist == NoiseDistribution::kUniform)
      throw_error(errc::invalid_spec, "correlated noise requires gaussian errors");
  }

  switch (scenario) {
    case Scenario::kStructural:
      if (!all_zero(direct_shift))
        throw_error(errc::invalid_spec, "structural scenario forbids direct_shift");
      break;
    case Scenario::kDirect:
      if (!all_zero(eta_shift) && !mixed_pathways)
        throw_error(errc::invalid_spec,
                    "direct scenario forbids eta_shift unless mixed_pathways is set");
      break;
    case Scenario::kConfounded:
      if (p != 2) throw_error(errc::invalid_spec, "confounded scenario requires two groups");
      if (!all_zero(eta_shift) || !all_zero(direct_shift))
        throw_error(errc::invalid_spec, "confounded scenario forbids shift parameters");
      if (!(group_probs[1] > 0.0 && group_probs[1] < 1.0))
        throw_error(errc::invalid_spec, "confounded scenario needs a non-degenerate base rate");
      break;
    case Scenario::kSingleIndicator:
      if (p != 2)
        throw_error(errc::invalid_spec, "single_indicator scenario requires two groups");
      if (!all_zero(eta_shift) || !all_zero(direct_shift))
        throw_error(errc::invalid_spec, "single_indicator scenario forbids shift parameters");
      if (outcome_indicator < 1 || outcome_indicator > n)
        throw_error(errc::invalid_spec, "outcome_indicator out of range");
      if (!(group_probs[1] > 0.0 && group_probs[1] < 1.0))
        throw_error(errc::invalid_spec,
                    "single_indicator scenario needs a non-degenerate base rate");
      break;
  }
}

IndicatorDataset generate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.check();
  const std::size_t n = spec.n;
  const std::size_t p = spec.num_groups();
  const std::size_t N = spec.num_subjects;
  const Eigen::MatrixXd chol = noise_cholesky(spec);

  std::vector<double> values(N * n);
  std::vector<int> group(N);

  std::vector<double> eps(n), raw(n);
  for (std::size_t k = 0; k < N; ++k) {
    // Error draws, one substream per indicator.
    for (std::size_t i = 0; i < n; ++i) {
      auto s = substream(seed, k, StreamRole::kEpsilon, i);
      raw[i] = unit_noise(s, spec.noise_dist);
    }
    if (chol.size() > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j <= i; ++j)
          v += chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * raw[j];
        eps[i] = spec.noise_sd[i] * v;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) eps[i] = spec.noise_sd[i] * raw[i];
    }

    const double xi = substream(seed, k, StreamRole::kEta).normal();
    std::size_t z = 0;
    double eta = spec.eta_mean + spec.eta_sd * xi;

    switch (spec.scenario) {
      case Scenario::kStructural: {
        auto gs = substream(seed, k, StreamRole::kGroup);
        z = draw_group(gs, spec.group_probs);
        eta += spec.eta_shift[z];
        for (std::size_t i = 0; i < n; ++i) values[k * n + i] = spec.lambda[i] * eta + eps[i];
        break;
      }
      case Scenario::kDirect: {
        auto gs = substream(seed, k, StreamRole::kGroup);
        z = draw_group(gs, spec.group_probs);
        if (spec.mixed_pathways) eta += spec.eta_shift[z];
        for (std::size_t i = 0; i < n; ++i)
          values[k * n + i] = spec.lambda[i] * eta + spec.direct_shift[i * p + z] + eps[i];
        break;
      }
      case Scenario::kConfounded: {
        const double c = substream(seed, k, StreamRole::kConfounder).normal();
        eta += spec.confounder_strength * c;
        const double pr =
            logistic(logit(spec.group_probs[1]) + spec.confounder_strength * c);
        auto gs = substream(seed, k, StreamRole::kGroup);
        z = gs.uniform01() < pr ? 1 : 0;
        for (std::size_t i = 0; i < n; ++i) values[k * n + i] = spec.lambda[i] * eta + eps[i];
        break;
      }
      case Scenario::kSingleIndicator: {
        for (std::size_t i = 0; i < n; ++i) values[k * n + i] = spec.lambda[i] * eta + eps[i];
        const std::size_t l = spec.outcome_indicator - 1;
        const double centered = values[k * n + l] - spec.lambda[l] * spec.eta_mean;
        const double pr = logistic(logit(spec.group_probs[1]) + spec.outcome_slope * centered);
        auto os = substream(seed, k, StreamRole::kOutcome);
        z = os.uniform01() < pr ? 1 : 0;
        break;
      }
    }
    group[k] = static_cast<int>(z);
  }

  std::vector<std::string> group_names(p);
  for (std::size_t z = 0; z < p; ++z) group_names[z] = std::to_string(z + 1);
  return IndicatorDataset::from_indices(std::move(values), N, n, std::move(group),
                                        std::move(group_names));
}

std::vector<double> population_cell_means(const ScenarioSpec& spec) {
  spec.check();
  if (spec.scenario != Scenario::kStructural && spec.scenario != Scenario::kDirect)
    throw_error(errc::unsupported_scenario,
                "population cell means are only available for the structural and "
                "direct scenarios");
  const std::size_t p = spec.num_groups();
  std::vector<double> means(spec.n * p);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t z = 0; z < p; ++z) {
      double eta = spec.eta_mean;
      if (spec.scenario == Scenario::kStructural || spec.mixed_pathways)
        eta += spec.eta_shift[z];
      double m = spec.lambda[i] * eta;
      if (spec.scenario == Scenario::kDirect) m += spec.direct_shift[i * p + z];
      means[i * p + z] = m;
    }
  }
  return means;
}

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_error(errc::invalid_spec, std::string("scenario spec is not valid JSON: ") + e.what());
  }
  ScenarioSpec spec;
  try {
    spec.scenario = scenario_from_name(j.value("scenario", "structural"));
    spec.n = j.at("n").get<std::size_t>();
    spec.num_subjects = j.at("N").get<std::size_t>();

    std::size_t p = 0;
    if (j.contains("group_probs")) {
      spec.group_probs = j["group_probs"].get<std::vector<double>>();
      p = spec.group_probs.size();
    } else if (j.contains("p")) {
      p = j["p"].get<std::size_t>();
      if (p < 1) throw_error(errc::invalid_spec, "p must be at least 1");
      spec.group_probs.assign(p, 1.0 / static_cast<double>(p));
    } else {
      throw_error(errc::invalid_spec, "scenario spec needs either p or group_probs");
    }

    spec.lambda = j.contains("lambda") ? j["lambda"].get<std::vector<double>>()
                                       : std::vector<double>(spec.n, 1.0);
    if (j.contains("noise_sd")) {
      if (j["noise_sd"].is_number())
        spec.noise_sd.assign(spec.n, j["noise_sd"].get<double>());
      else
        spec.noise_sd = j["noise_sd"].get<std::vector<double>>();
    } else {
      spec.noise_sd.assign(spec.n, 1.0);
    }
    if (j.contains("noise_corr")) {
      const auto rows = j["noise_corr"].get<std::vector<std::vector<double>>>();
      for (const auto& row : rows)
        spec.noise_corr.insert(spec.noise_corr.end(), row.begin(), row.end());
    }
    if (j.contains("noise_dist")) {
      const auto name = j["noise_dist"].get<std::string>();
      if (name == "gaussian") spec.noise_dist = NoiseDistribution::kGaussian;
      else if (name == "uniform") spec.noise_dist = NoiseDistribution::kUniform;
      else throw_error(errc::invalid_spec, "noise_dist must be gaussian or uniform");
    }
    spec.eta_mean = j.value("eta_mean", 0.0);
    spec.eta_sd = j.value("eta_sd", 1.0);
    spec.eta_shift = j.contains("eta_shift") ? j["eta_shift"].get<std::vector<double>>()
                                             : std::vector<double>(p, 0.0);
    if (j.contains("direct_shift")) {
      const auto rows = j["direct_shift"].get<std::vector<std::vector<double>>>();
      for (const auto& row : rows)
        spec.direct_shift.insert(spec.direct_shift.end(), row.begin(), row.end());
    } else {
      spec.direct_shift.assign(spec.n * p, 0.0);
    }
    spec.confounder_strength = j.value("confounder_strength", 0.0);
    spec.outcome_indicator = j.value("outcome_indicator", std::size_t{1});
    spec.outcome_slope = j.value("outcome_slope", 1.0);
    spec.mixed_pathways = j.value("mixed_pathways", false);
  } catch (const json::exception& e) {
    throw_error(errc::invalid_spec, std::string("bad scenario spec: ") + e.what());
  }
  spec.check();
  return spec;
}

std::string ScenarioSpec::to_json() const {
  const std::size_t p = num_groups();
  json j;
  j["scenario"] = scenario_name(scenario);
  j["n"] = n;
  j["N"] = num_subjects;
  j["lambda"] = lambda;
  j["noise_sd"] = noise_sd;
  if (!noise_corr.empty()) {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(std::vector<double>(noise_corr.begin() + static_cast<long>(i * n),
                                         noise_corr.begin() + static_cast<long>((i + 1) * n)));
    j["noise_corr"] = rows;
  }
  if (noise_dist == NoiseDistribution::kUniform) j["noise_dist"] = "uniform";
  j["eta_mean"] = eta_mean;
  j["eta_sd"] = eta_sd;
  j["group_probs"] = group_probs;
  j["eta_shift"] = eta_shift;
  {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(std::vector<double>(direct_shift.begin() + static_cast<long>(i * p),
                                         direct_shift.begin() + static_cast<long>((i + 1) * p)));
    j["direct_shift"] = rows;
  }
  if (scenario == Scenario::kConfounded) j["confounder_strength"] = confounder_strength;
  if (scenario == Scenario::kSingleIndicator) {
    j["outcome_indicator"] = outcome_indicator;
    j["outcome_slope"] = outcome_slope;
  }
  if (mixed_pathways) j["mixed_pathways"] = true;
  return j.dump();
}

}  // namespace structest
