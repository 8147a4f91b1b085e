#pragma once

#include <string>
#include <vector>

#include "results.hpp"

namespace slelab::cli {

// Tolerances shared by --check and report.
inline constexpr double kSigmaBand = 3.0;         // |estimate - exact| <= 3 stderr
inline constexpr double kPdeGridRel = 1e-3;       // relative grid error allowed for PDE values
inline constexpr double kLambdaRel = 0.10;        // decay-rate fits
inline constexpr double kEigenTolerance = 1e-10;  // eigenfunction residual

/// Relative tolerance for a walker exponent fit: one pack 10%, two single
/// walks 15%, anything rarer 20%.
double walker_tolerance(const std::vector<int>& packs);

struct ReportRow {
    std::string quantity;
    double predicted = 0.0;
    double estimate = 0.0;
    double ci = 0.0;  // allowed deviation (or CI half-width for fits)
    bool pass = false;
};

/// Pools estimate rows that describe the same quantity through their
/// sufficient statistics. Deterministic rows (n = 0) are deduplicated.
/// Throws SchemaError when two rows share a seed and overlapping samples.
std::vector<EstimateRow> merge_estimate_rows(const std::vector<EstimateRow>& rows);

std::vector<ReportRow> build_report(const ParsedFile& input);

std::string report_markdown(const std::vector<ReportRow>& rows);
std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_json(const std::vector<ReportRow>& rows);

std::vector<int> parse_packs(const std::string& text);

}  // namespace slelab::cli
