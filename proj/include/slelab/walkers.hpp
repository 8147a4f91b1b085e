#pragma once

// Half-plane non-intersection of packs of simple random walks on Z^2,
// estimated by fixed-population multilevel splitting over dyadic radii.
//
// The half-plane is {y >= 1}. Pack l starts at one site on the line y = 1;
// every walk runs until it first reaches Euclidean distance R from the
// origin. A tuple survives level R if no walk has left the half-plane and
// the site sets of different packs are pairwise disjoint (walks inside one
// pack may overlap).

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slelab/stats.hpp"

namespace slelab {

struct WalkPairConfig {
    std::vector<int> pack_sizes{1, 1};
    int start_separation = 2;
    std::vector<int> radius_levels{2, 4, 8, 16, 32, 64};
    std::size_t population = 10000;
    std::uint64_t seed = 20011107;
    unsigned workers = 1;

    void validate() const;
    [[nodiscard]] std::size_t walk_count() const;
};

struct Site {
    int x = 0;
    int y = 1;
    friend bool operator==(const Site&, const Site&) = default;
};

/// Moves of one walk between two radius levels, packed 2 bits per move.
class MoveSegment {
public:
    void push(unsigned move);
    [[nodiscard]] unsigned at(std::size_t i) const { return (bytes_[i >> 2] >> ((i & 3) * 2)) & 3u; }
    [[nodiscard]] std::size_t size() const { return size_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t size_ = 0;
};

/// One population member: every walk's tip plus its shared move history.
struct WalkTuple {
    std::vector<Site> tips;
    std::vector<std::vector<std::shared_ptr<const MoveSegment>>> history;
};

WalkTuple initial_tuple(const WalkPairConfig& config);
Site start_site(const WalkPairConfig& config, std::size_t pack);

struct LevelOutcome {
    std::vector<WalkTuple> survivors;
    std::size_t trials = 0;
    double fraction = 0.0;
};

/// Extends every member of `population` to radius_levels[level].
LevelOutcome simulate_pack_level(const WalkPairConfig& config, std::span<const WalkTuple> population,
                                 std::size_t level, std::uint64_t attempt = 0);

struct SplittingRun {
    std::vector<int> radii;
    std::vector<std::size_t> population;       // trials per level
    std::vector<double> survival_fractions;
    std::vector<double> estimates;             // cumulative products
    std::vector<double> log_ci;                // 95% half-width of log(estimate)
    double estimate = 0.0;
    double log_ci_final = 0.0;
};

class ExtinctionError : public std::runtime_error {
public:
    ExtinctionError(const std::string& what, std::size_t level) : std::runtime_error(what), level_(level) {}
    [[nodiscard]] std::size_t level() const { return level_; }

private:
    std::size_t level_;
};

/// Survivors of each level are resampled with replacement back to the
/// population size. A level that dies out is retried with twice the
/// population (up to four times) before ExtinctionError.
SplittingRun splitting_estimate(const WalkPairConfig& config);

struct RadiusEstimate {
    double radius = 0.0;
    double estimate = 0.0;
    double log_ci = 0.0;
};

/// Weighted fit of log(estimate) against log(radius); lambda_hat is the
/// exponent. Needs >= 3 radii spanning at least two octaves.
DecayFit fit_xi_tilde(std::span<const RadiusEstimate> runs);

/// Rows of a run restricted to radii >= min_radius.
std::vector<RadiusEstimate> radius_estimates(const SplittingRun& run, double min_radius = 0.0);

}  // namespace slelab
