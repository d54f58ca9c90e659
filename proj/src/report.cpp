#include "report.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

#include "csv.hpp"
#include "errors.hpp"

namespace structest {

namespace {

using nlohmann::json;

json validation_to_json(const ValidationReport& v, const IndicatorDataset& data) {
  json flags;
  flags["empty_cells"] = json::array();
  for (const auto& [i, z] : v.empty_cells)
    flags["empty_cells"].push_back({data.indicator_names()[i], data.group_names()[z]});
  flags["constant_indicators"] = json::array();
  for (std::size_t i : v.constant_indicators)
    flags["constant_indicators"].push_back(data.indicator_names()[i]);
  flags["empty_groups"] = json::array();
  for (std::size_t z : v.empty_groups) flags["empty_groups"].push_back(data.group_names()[z]);

  json cells = json::array();
  for (std::size_t i = 0; i < v.n_indicators; ++i) {
    json row = json::array();
    for (std::size_t z = 0; z < v.n_groups; ++z)
      row.push_back(v.cell_counts[i * v.n_groups + z]);
    cells.push_back(row);
  }

  return json{{"N", v.n_subjects},
              {"n", v.n_indicators},
              {"p", v.n_groups},
              {"m_obs", v.n_observed},
              {"n_missing", v.n_missing},
              {"indicator_names", data.indicator_names()},
              {"group_names", data.group_names()},
              {"group_sizes", v.group_sizes},
              {"cell_counts", cells},
              {"flags", flags}};
}

json test_to_json(const TestResult& t) {
  return json{{"statistic", t.statistic},
              {"df", t.df},
              {"p_value", t.p_value},
              {"sigma2_restricted", t.sigma2_restricted},
              {"sigma2_full", t.sigma2_full},
              {"m_obs", t.m_obs},
              {"degenerate", t.degenerate},
              {"exact_fit", t.exact_fit},
              {"fit",
               {{"alpha", t.fit.alpha},
                {"beta", t.fit.beta},
                {"converged", t.fit.converged},
                {"iterations", t.fit.iterations},
                {"mse_trace", t.fit.mse_trace}}}};
}

json matrix_to_json(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t i = 0; i < rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cols; ++j) row.push_back(m[i * cols + j]);
    out.push_back(row);
  }
  return out;
}

json build_document(const ReportInputs& in) {
  json doc;
  doc["tool_version"] = kVersion;
  doc["invocation"] = in.invocation;
  if (in.dataset) doc["dataset_summary"] = validation_to_json(validate(*in.dataset), *in.dataset);

  if (in.test) {
    doc["result"] = test_to_json(*in.test);
    doc["result"]["type"] = "test";
  } else if (in.stratified) {
    json strata = json::array();
    for (const auto& s : in.stratified->per_stratum) {
      json row = test_to_json(s.result);
      row["label"] = s.label;
      row["bonferroni_p"] = s.bonferroni_p;
      strata.push_back(row);
    }
    doc["result"] = json{{"type", "stratified"},
                         {"combined_statistic", in.stratified->combined_statistic},
                         {"combined_df", in.stratified->combined_df},
                         {"combined_p", in.stratified->combined_p},
                         {"strata", strata}};
  } else if (in.calibration) {
    json rows = json::array();
    for (const auto& c : *in.calibration) {
      rows.push_back(json{{"replicates", c.replicates},
                          {"rejections", c.rejections},
                          {"rate", c.rate},
                          {"ci_low", c.ci_low},
                          {"ci_high", c.ci_high},
                          {"alpha_level", c.alpha_level},
                          {"seed", c.seed},
                          {"scenario", json::parse(c.spec.to_json())}});
    }
    doc["result"] = json{{"type", "calibration"}, {"rows", rows}};
  }

  if (in.oracle) {
    doc["oracle"] = json{{"oracle_lack_of_fit", in.oracle->oracle_lack_of_fit},
                         {"fit_lack_of_fit", in.oracle->fit_lack_of_fit},
                         {"abs_diff", in.oracle->abs_diff}};
  }

  // Omitted entirely when absent, never null.
  if (in.diagnostics && in.dataset) {
    const auto& d = *in.diagnostics;
    const std::size_t n = d.lambda.size();
    const std::size_t p = d.contrasts.size() / std::max<std::size_t>(1, n);
    doc["diagnostics"] =
        json{{"implied", d.implied},
             {"lambda", d.lambda},
             {"reference_group", in.dataset->group_names()[d.z_ref]},
             {"reference_indicator", in.dataset->indicator_names()[d.ref_indicator]},
             {"scaled_contrasts", matrix_to_json(d.contrasts, n, p)},
             {"reliability_ratios", d.ratios},
             {"pair_residual_max", matrix_to_json(d.pair_residual_max, n, n)}};
  }
  return doc;
}

void append_test_text(std::ostringstream& out, const TestResult& t, const std::string& indent) {
  out << indent << "statistic = " << format_double(t.statistic) << "   df = " << t.df
      << "   p_value = " << format_double(t.p_value) << "\n";
  out << indent << "sigma2_restricted = " << format_double(t.sigma2_restricted)
      << "   sigma2_full = " << format_double(t.sigma2_full) << "   m_obs = " << t.m_obs << "\n";
  out << indent << "fit: " << (t.fit.converged ? "converged" : "NOT CONVERGED") << " after "
      << t.fit.iterations << " iteration(s)";
  if (t.degenerate) out << " [degenerate: all group means vanish]";
  if (t.exact_fit) out << " [exact fit: no within-cell variance]";
  out << "\n" << indent << "alpha:";
  for (double a : t.fit.alpha) out << ' ' << format_double(a);
  out << "\n" << indent << "beta:";
  for (double b : t.fit.beta) out << ' ' << format_double(b);
  out << "\n";
}

std::string render_text(const ReportInputs& in) {
  std::ostringstream out;
  out << "structest " << kVersion << "\n";
  if (!in.invocation.empty()) out << "invocation: " << in.invocation << "\n";
  if (in.dataset) {
    const auto v = validate(*in.dataset);
    out << "dataset: N=" << v.n_subjects << " n=" << v.n_indicators << " p=" << v.n_groups
        << " M=" << v.n_observed << " missing=" << v.n_missing << "\n";
    if (!v.empty_cells.empty()) {
      out << "empty cells:";
      for (const auto& [i, z] : v.empty_cells)
        out << " (" << in.dataset->indicator_names()[i] << ","
            << in.dataset->group_names()[z] << ")";
      out << "\n";
    }
    if (!v.constant_indicators.empty()) {
      out << "constant indicators:";
      for (std::size_t i : v.constant_indicators) out << ' ' << in.dataset->indicator_names()[i];
      out << "\n";
    }
  }
  if (in.test) {
    out << "test result:\n";
    append_test_text(out, *in.test, "  ");
  } else if (in.stratified) {
    out << "stratified test result:\n";
    for (const auto& s : in.stratified->per_stratum) {
      out << "  stratum '" << s.label
          << "' (bonferroni_p = " << format_double(s.bonferroni_p) << "):\n";
      append_test_text(out, s.result, "    ");
    }
    out << "  combined: statistic = " << format_double(in.stratified->combined_statistic)
        << "   df = " << in.stratified->combined_df
        << "   p_value = " << format_double(in.stratified->combined_p) << "\n";
  } else if (in.calibration) {
    out << "calibration:\n";
    for (std::size_t r = 0; r < in.calibration->size(); ++r) {
      const auto& c = (*in.calibration)[r];
      out << "  [" << r << "] rate = " << format_double(c.rate) << " ("
          << c.rejections << "/" << c.replicates << "), 95% CI ["
          << format_double(c.ci_low) << ", " << format_double(c.ci_high)
          << "], alpha = " << format_double(c.alpha_level) << "\n";
    }
  }
  if (in.oracle) {
    out << "oracle check: fit lack-of-fit = " << format_double(in.oracle->fit_lack_of_fit)
        << ", oracle = " << format_double(in.oracle->oracle_lack_of_fit)
        << ", |diff| = " << format_double(in.oracle->abs_diff) << "\n";
  }
  if (in.diagnostics && in.dataset) {
    const auto& d = *in.diagnostics;
    const std::size_t n = d.lambda.size();
    const std::size_t p = in.dataset->num_groups();
    out << "diagnostics (" << (d.implied ? "implied from fit" : "user-supplied lambda")
        << "):\n";
    out << "  lambda:";
    for (double l : d.lambda) out << ' ' << format_double(l);
    out << "\n  scaled contrasts vs group '" << in.dataset->group_names()[d.z_ref]
        << "' (rows = indicators):\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << "    " << in.dataset->indicator_names()[i] << ":";
      for (std::size_t z = 0; z < p; ++z) out << ' ' << format_double(d.contrasts[i * p + z]);
      out << "\n";
    }
    out << "  reliability ratios vs '" << in.dataset->indicator_names()[d.ref_indicator]
        << "':";
    for (double r : d.ratios) out << ' ' << format_double(r);
    out << "\n  max cross-indicator residual by pair:\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << "    ";
      for (std::size_t j = 0; j < n; ++j)
        out << (j ? " " : "") << format_double(d.pair_residual_max[i * n + j]);
      out << "\n";
    }
  }
  return out.str();
}

std::string render_csv_table(const ReportInputs& in) {
  std::ostringstream out;
  if (in.test) {
    out << "statistic,df,p_value,sigma2_restricted,sigma2_full,m_obs,converged,iterations,"
           "degenerate,exact_fit\n";
    const auto& t = *in.test;
    out << format_double(t.statistic) << ',' << t.df << ',' << format_double(t.p_value) << ','
        << format_double(t.sigma2_restricted) << ',' << format_double(t.sigma2_full) << ','
        << t.m_obs << ',' << (t.fit.converged ? 1 : 0) << ',' << t.fit.iterations << ','
        << (t.degenerate ? 1 : 0) << ',' << (t.exact_fit ? 1 : 0) << "\n";
  } else if (in.stratified) {
    out << "stratum,statistic,df,p_value,bonferroni_p,m_obs,converged\n";
    for (const auto& s : in.stratified->per_stratum) {
      const auto& t = s.result;
      out << s.label << ',' << format_double(t.statistic) << ',' << t.df << ','
          << format_double(t.p_value) << ',' << format_double(s.bonferroni_p) << ',' << t.m_obs
          << ',' << (t.fit.converged ? 1 : 0) << "\n";
    }
    out << "<combined>," << format_double(in.stratified->combined_statistic) << ','
        << in.stratified->combined_df << ',' << format_double(in.stratified->combined_p)
        << ",,,\n";
  } else if (in.calibration) {
    out << "index,scenario,n,p,N,alpha,replicates,rejections,rate,ci_low,ci_high,seed\n";
    for (std::size_t r = 0; r < in.calibration->size(); ++r) {
      const auto& c = (*in.calibration)[r];
      const char* name = "structural";
      switch (c.spec.scenario) {
        case Scenario::kStructural: name = "structural"; break;
        case Scenario::kDirect: name = "direct"; break;
        case Scenario::kConfounded: name = "confounded"; break;
        case Scenario::kSingleIndicator: name = "single_indicator"; break;
      }
      out << r << ',' << name << ',' << c.spec.n << ',' << c.spec.num_groups() << ','
          << c.spec.num_subjects << ',' << format_double(c.alpha_level) << ',' << c.replicates
          << ',' << c.rejections << ',' << format_double(c.rate) << ','
          << format_double(c.ci_low) << ',' << format_double(c.ci_high) << ',' << c.seed
          << "\n";
    }
  } else if (in.diagnostics && in.dataset) {
    const auto& d = *in.diagnostics;
    const std::size_t n = d.lambda.size();
    const std::size_t p = in.dataset->num_groups();
    out << "table,indicator";
    for (std::size_t z = 0; z < p; ++z) out << ',' << in.dataset->group_names()[z];
    out << "\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << "scaled_contrasts," << in.dataset->indicator_names()[i];
      for (std::size_t z = 0; z < p; ++z) out << ',' << format_double(d.contrasts[i * p + z]);
      out << "\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
      out << "reliability_ratio," << in.dataset->indicator_names()[i] << ','
          << format_double(d.ratios[i]) << "\n";
    }
  }
  return out.str();
}

}  // namespace

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "text") return ReportFormat::kText;
  if (name == "csv-table" || name == "csv") return ReportFormat::kCsvTable;
  throw_error(errc::invalid_argument, "unknown format '" + name + "'");
}

DiagnosticsTables compute_diagnostics(const IndicatorDataset& data, const RestrictedFit& fit,
                                      const std::optional<std::vector<double>>& lambda,
                                      const std::optional<std::string>& z_ref_label,
                                      std::size_t ref_indicator) {
  DiagnosticsTables tables;
  tables.implied = !lambda.has_value();
  ReliabilityVector rel =
      lambda ? ReliabilityVector::checked(*lambda) : ReliabilityVector::checked(fit.alpha);
  if (rel.lambda.size() != data.num_indicators())
    throw_error(errc::invalid_argument, "lambda length must equal the indicator count");
  tables.lambda = rel.lambda;

  tables.z_ref = 0;
  if (z_ref_label) {
    const auto& names = data.group_names();
    bool found = false;
    for (std::size_t z = 0; z < names.size(); ++z)
      if (names[z] == *z_ref_label) {
        tables.z_ref = z;
        found = true;
      }
    if (!found) throw_error(errc::invalid_argument, "unknown group label '" + *z_ref_label + "'");
  }
  if (ref_indicator >= data.num_indicators())
    throw_error(errc::invalid_argument, "reference indicator out of range");
  tables.ref_indicator = ref_indicator;

  const CellMeans cm = cell_means(data);
  tables.contrasts = scaled_contrasts(cm, rel, tables.z_ref);
  tables.ratios = implied_reliability_ratios(fit, ref_indicator);

  const auto residuals = theorem1_residuals(cm, rel);
  const std::size_t n = cm.n_indicators;
  const std::size_t p = cm.n_groups;
  tables.pair_residual_max.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t z = 0; z < p; ++z)
        tables.pair_residual_max[i * n + j] = std::max(
            tables.pair_residual_max[i * n + j], std::fabs(residuals[i * n * p + j * p + z]));
  return tables;
}

std::string render_report(const ReportInputs& inputs, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return build_document(inputs).dump(2) + "\n";
    case ReportFormat::kText:
      return render_text(inputs);
    case ReportFormat::kCsvTable:
      return render_csv_table(inputs);
  }
  throw_error(errc::invalid_argument, "unhandled format");
}

}  // namespace structest
