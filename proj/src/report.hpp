#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "diagnostics.hpp"
#include "lrt.hpp"
#include "montecarlo.hpp"
#include "oracle.hpp"

namespace structest {

inline constexpr const char* kVersion = "0.1.0";

enum class ReportFormat { kJson, kText, kCsvTable };

ReportFormat report_format_from_name(const std::string& name);

// Presentation bundle of the diagnostic identities for one dataset: scaled
// mean contrasts, loading ratios, and the per-pair worst cross-indicator
// residual.
struct DiagnosticsTables {
  bool implied = false;  // lambda taken from the fit rather than supplied
  std::vector<double> lambda;
  std::size_t z_ref = 0;
  std::size_t ref_indicator = 0;
  std::vector<double> contrasts;          // n x p
  std::vector<double> ratios;             // n
  std::vector<double> pair_residual_max;  // n x n, max over z of |residual|
};

DiagnosticsTables compute_diagnostics(const IndicatorDataset& data, const RestrictedFit& fit,
                                      const std::optional<std::vector<double>>& lambda,
                                      const std::optional<std::string>& z_ref_label,
                                      std::size_t ref_indicator);

// Everything a rendered report may contain; null sections are omitted.
struct ReportInputs {
  std::string invocation;
  const IndicatorDataset* dataset = nullptr;
  const TestResult* test = nullptr;
  const StratifiedResult* stratified = nullptr;
  const std::vector<CalibrationResult>* calibration = nullptr;
  const DiagnosticsTables* diagnostics = nullptr;
  const OracleCheck* oracle = nullptr;
};

// JSON is the canonical machine format; numeric fields round-trip exactly.
std::string render_report(const ReportInputs& inputs, ReportFormat format);

}  // namespace structest
