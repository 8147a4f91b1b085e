#pragma once

// Chordal SLE_kappa from x0 in (0, 1) via a discretized Loewner chain that
// tracks the two marked boundary points 0 and 1.
//
// Over each step the driving value is frozen, so the flow is the exact
// vertical-slit map u -> W + sign(u - W) sqrt((u - W)^2 + 4 dt); the driving
// value then jumps by a N(0, kappa dt) increment. The time change is
// s = log(g_t(1) - g_t(0)), and alpha = s - log g_t'(0), beta = s - log g_t'(1)
// are the log-derivatives of the normalized map f_t at 0 and 1.

#include <cstdint>
#include <span>
#include <vector>

#include "slelab/rng.hpp"
#include "slelab/stats.hpp"

namespace slelab {

inline constexpr std::uint64_t kDefaultSeed = 20011107;

/// Sample range of a Monte Carlo run and how many threads split it.
struct SamplePlan {
    std::uint64_t n = 0;
    std::uint64_t first = 0;
    unsigned workers = 1;
};

struct ChainParams {
    double kappa = 6.0;
    double x0 = 0.5;
    /// Base capacity step, in units of (g1 - g0)^2 so the scheme is
    /// scale-free as the hull grows.
    double dt = 2.5e-4;
    std::uint64_t seed = kDefaultSeed;
    /// Guard band around the tracked images, relative to g1 - g0.
    double swallow_tol = 1e-9;
    /// Near a marked image the step is gap_step * min(gap)^2, about a 0.1 Z
    /// step in s.
    double gap_step = 0.0125;

    void validate() const;
};

struct ChainState {
    double t = 0.0;
    double W = 0.5;
    double g0 = 0.0;
    double g1 = 1.0;
    double logd0 = 0.0;
    double logd1 = 0.0;
    double s = 0.0;
    bool swallowed = false;

    static ChainState start(double x0);

    /// Z_t = (W - g0) / (g1 - g0), the image of the tip under f_t.
    [[nodiscard]] double z() const { return (W - g0) / (g1 - g0); }
    [[nodiscard]] double alpha() const { return s - logd0; }
    [[nodiscard]] double beta() const { return s - logd1; }
};

/// One step of capacity `dt` with the driving value frozen, followed by the
/// driving jump `dW`. A state already inside the guard band, or whose driving
/// value lands on or past a tracked image, comes back swallowed.
ChainState advance_step(const ChainState& state, double dt, double dW, double swallow_tol);

inline ChainState advance_step(const ChainState& state, const ChainParams& params, double dW) {
    return advance_step(state, params.dt, dW, params.swallow_tol);
}

/// Capacity step for the next move: dt (g1-g0)^2, shrunk to
/// gap_step min(gap)^2 when the tip nears a marked image, floored at 1e-6
/// of the base step.
double adaptive_step(const ChainState& state, const ChainParams& params);

struct TwoSidedSample {
    bool reached_s = false;
    double alpha = 0.0;
    double beta = 0.0;
    double y = 0.0;
};

/// Cap on w1*alpha + w2*beta beyond which a path's weight is below 1e-300
/// and it is dropped with contribution 0.
struct WeightCap {
    double w1 = 0.0;
    double w2 = 0.0;
};

/// Runs one chain through increasing targets s_1 < s_2 < ..., returning one
/// sample per target. Values at a target are interpolated linearly in s
/// between the bracketing steps. A path dropped by the weight cap reports
/// reached_s = false for the remaining targets.
std::vector<TwoSidedSample> run_to_s_grid(const ChainParams& params, std::span<const double> s_targets,
                                          StreamRng& rng, const WeightCap* cap = nullptr);

/// Sample `sample_index` of the run keyed by params.seed.
TwoSidedSample run_to_s(const ChainParams& params, double s_target, std::uint64_t sample_index = 0);

/// E[1{t(s) < T} f'(0)^w1 f'(1)^w2] at each target, over the samples in
/// `plan`. Weights of zero are accepted as an exploratory mode.
std::vector<MonteCarloEstimate> estimate_h1_grid(const ChainParams& params, std::span<const double> s_targets,
                                                 double w1, double w2, const SamplePlan& plan);

MonteCarloEstimate estimate_h1(const ChainParams& params, double s_target, double w1, double w2,
                               const SamplePlan& plan);

/// Extremal-distance observable at scale R, stopped at sigma_R = t(log R)
/// with the derivative weights standing in for the extremal distances.
MonteCarloEstimate estimate_H(const ChainParams& params, double log_r, double w1, double w2,
                              const SamplePlan& plan);

/// Y = Z_{t(s)} of every surviving sample, in sample order.
std::vector<double> sample_y_loewner(const ChainParams& params, double s, const SamplePlan& plan);

std::string describe_samples(std::uint64_t seed, const SamplePlan& plan);

}  // namespace slelab
