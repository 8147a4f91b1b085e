#pragma once

// The boundary diffusion
//   dY = sqrt(kappa Y (1 - Y) / 2) dB + (1 - 2Y) ds,
//   d alpha = ds / Y,  d beta = ds / (1 - Y),
// killed when Y reaches {0, 1}, with Feynman-Kac weight
// exp(-w1 alpha - w2 beta).

#include <cstdint>
#include <span>
#include <vector>

#include "slelab/loewner.hpp"
#include "slelab/rng.hpp"
#include "slelab/stats.hpp"

namespace slelab {

struct SDEParams {
    double kappa = 6.0;
    double w1 = 1.0;
    double w2 = 1.0;
    double ds_max = 1e-3;
    double absorb_tol = 1e-6;
    std::uint64_t seed = kDefaultSeed;
    /// ds = min(ds_max, step_fraction * min(y, 1 - y)).
    double step_fraction = 0.1;

    void validate() const;
};

struct DiffusionState {
    double y = 0.5;
    double alpha = 0.0;
    double beta = 0.0;
    double s = 0.0;
    bool absorbed = false;

    static DiffusionState start(double x, double absorb_tol);
};

double sde_step_size(const DiffusionState& state, const SDEParams& params);

/// Milstein step of size ds driven by dB ~ N(0, ds), clamped to [0, 1].
/// alpha and beta accrue the exact integrals of 1/y and 1/(1-y) along the
/// straight segment between the endpoints (ds times the reciprocal
/// logarithmic mean). Leaving (absorb_tol, 1 - absorb_tol) absorbs
/// permanently.
DiffusionState step_sde(const DiffusionState& state, const SDEParams& params, double ds, double dB);

/// Evolves one path through increasing checkpoints, landing on each exactly.
/// Returns the state at every checkpoint; absorbed (or weight-floored)
/// paths keep absorbed = true from then on.
std::vector<DiffusionState> run_sde(const SDEParams& params, double x, std::span<const double> checkpoints,
                                    StreamRng& rng);

/// h1 (F = 1) and hG (F = G) estimated from the same paths.
struct FeynmanKacPair {
    MonteCarloEstimate h1;
    MonteCarloEstimate hG;
};

std::vector<FeynmanKacPair> estimate_feynman_kac(const SDEParams& params, double x,
                                                 std::span<const double> s_targets, const SamplePlan& plan);

/// E[1{s < S} G(Y_s) exp(-w1 alpha - w2 beta)]; exactly exp(-lambda s) G(x).
MonteCarloEstimate estimate_hG(const SDEParams& params, double x, double s, const SamplePlan& plan);

MonteCarloEstimate estimate_h1_diffusion(const SDEParams& params, double x, double s, const SamplePlan& plan);

/// Q_s = exp(-lambda (s0 - s)) G(Y_s) exp(-w1 alpha(s) - w2 beta(s)) at each
/// checkpoint (all in (0, s0)); every mean should equal exp(-lambda s0) G(x).
std::vector<MonteCarloEstimate> martingale_check(const SDEParams& params, double x, double s0,
                                                 std::span<const double> checkpoints, const SamplePlan& plan);

/// Y_s of every unabsorbed sample, in sample order.
std::vector<double> sample_y_diffusion(const SDEParams& params, double x, double s, const SamplePlan& plan);

/// max over xs of |(L + lambda) G| / G for the closed-form G, lambda, where L
/// is the generator of Y with the killing potential w1/x + w2/(1-x).
double eigen_residual(double kappa, double w1, double w2, std::span<const double> xs);

}  // namespace slelab
