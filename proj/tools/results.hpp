#pragma once

// Result files written by the command-line tool and read back by `report`.
//
// Estimate files (CSV header fixed):
//   method,observable,kappa,x0,w1,w2,s,mean,stderr,n,seed,first,target
// Walker files:
//   packs,radius,estimate,log_ci,population,seed
// Eigenfunction residual files:
//   kappa,w1,w2,points,residual
// Both may start with one '#' line holding the resolved run configuration.
// JSON output carries the same fields: {"config": {...}, "rows": [...]}.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace slelab::cli {

struct EstimateRow {
    std::string method;      // sde, pde, loewner
    std::string observable;  // h1, hG, H, Q
    double kappa = 0.0;
    double x0 = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
    double s = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t first = 0;
    std::optional<double> target;  // closed-form value when one exists
};

struct WalkerRow {
    std::string packs;  // e.g. "1,1"
    double radius = 0.0;
    double estimate = 0.0;
    double log_ci = 0.0;
    std::uint64_t population = 0;
    std::uint64_t seed = 0;
};

struct EigenRow {
    double kappa = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
    std::uint64_t points = 0;
    double residual = 0.0;
};

using Config = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string> kEstimateHeader = {"method", "observable", "kappa", "x0",    "w1",
                                                         "w2",     "s",          "mean",  "stderr", "n",
                                                         "seed",   "first",      "target"};
inline const std::vector<std::string> kWalkerHeader = {"packs", "radius", "estimate", "log_ci", "population", "seed"};
inline const std::vector<std::string> kEigenHeader = {"kappa", "w1", "w2", "points", "residual"};

std::string estimates_csv(const Config& config, const std::vector<EstimateRow>& rows);
std::string walkers_csv(const Config& config, const std::vector<WalkerRow>& rows);
std::string eigen_csv(const Config& config, const std::vector<EigenRow>& rows);
nlohmann::ordered_json config_json(const Config& config);
nlohmann::ordered_json to_json(const EstimateRow& row);
nlohmann::ordered_json to_json(const WalkerRow& row);
nlohmann::ordered_json to_json(const EigenRow& row);

struct ParsedFile {
    std::vector<EstimateRow> estimates;
    std::vector<WalkerRow> walkers;
    std::vector<EigenRow> eigen;
};

/// Parses a CSV or JSON result file. Throws SchemaError on anything that
/// does not match one of the schemas.
ParsedFile parse_result_file(std::string_view text);

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace slelab::cli
