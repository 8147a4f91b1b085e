#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace slelab {

/// Mean and standard error of a Monte Carlo expectation.
struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::string seed_range;  // e.g. "seed=7 samples=[0,100000)"
};

/// Welford accumulator; merge() combines partial runs (Chan et al.).
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    [[nodiscard]] std::uint64_t count() const { return n_; }
    [[nodiscard]] double mean() const { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    [[nodiscard]] double variance() const;
    [[nodiscard]] MonteCarloEstimate estimate(std::string seed_range = {}) const;

    /// Rebuilds the sufficient statistics of a serialized estimate.
    static RunningStats from_estimate(const MonteCarloEstimate& e);

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Pools two estimates over disjoint sample sets.
MonteCarloEstimate merge_estimates(const MonteCarloEstimate& a, const MonteCarloEstimate& b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Least squares y = intercept + slope*x with weights 1/sigma^2. When any
/// sigma is zero the fit is unweighted and the slope error comes from the
/// residuals.
LineFit weighted_line_fit(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> sigmas);

/// Decay rate extracted from log-linear Monte Carlo decay.
struct DecayFit {
    double lambda_hat = 0.0;
    double ci_halfwidth = 0.0;  // 95% normal interval
    double intercept = 0.0;
    std::vector<double> s_grid;
    std::vector<double> log_means;
    std::vector<double> weights;
};

/// lambda_hat = -slope of log(mean) against s. Needs >= 3 distinct s values
/// and every mean > 2 stderr.
DecayFit fit_lambda(std::span<const std::pair<double, MonteCarloEstimate>> estimates);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value c(alpha) sqrt((n+m)/(nm)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace slelab
