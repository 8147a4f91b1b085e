#include "slelab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slelab/exponents.hpp"
#include "slelab/parallel.hpp"

namespace slelab {

namespace {

constexpr std::uint64_t kDiffusionTag = 2;
constexpr double kLogWeightFloor = 690.8;

void check_start(double x) {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("x must lie in (0, 1)");
}

void check_checkpoints(std::span<const double> cps) {
    if (cps.empty()) throw std::invalid_argument("need at least one checkpoint");
    double prev = 0.0;
    for (double s : cps) {
        if (!(s > prev)) throw std::invalid_argument("checkpoints must be positive and increasing");
        prev = s;
    }
}

// Mean of 1/y along the straight segment from a to b: log(b/a) / (b - a).
// Infinite when b hits 0, which the absorption check then discards.
double reciprocal_log_mean(double a, double b) {
    const double d = b - a;
    if (std::abs(d) < 1e-6 * a) return 2.0 / (a + b);
    return std::log1p(d / a) / d;
}

}  // namespace

void SDEParams::validate() const {
    if (!(kappa > 0.0)) throw std::domain_error("kappa must be > 0");
    if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw std::domain_error("weights must be >= 0");
    if (!(ds_max > 0.0 && ds_max <= 0.01)) throw std::domain_error("ds_max must lie in (0, 0.01]");
    if (!(absorb_tol > 0.0 && absorb_tol < 0.01)) throw std::domain_error("absorb_tol must lie in (0, 0.01)");
    if (!(step_fraction > 0.0 && step_fraction <= 1.0)) throw std::domain_error("step_fraction must lie in (0, 1]");
}

DiffusionState DiffusionState::start(double x, double absorb_tol) {
    DiffusionState st;
    st.y = x;
    st.absorbed = !(x > absorb_tol && x < 1.0 - absorb_tol);
    return st;
}

double sde_step_size(const DiffusionState& state, const SDEParams& params) {
    return std::min(params.ds_max, params.step_fraction * std::min(state.y, 1.0 - state.y));
}

DiffusionState step_sde(const DiffusionState& state, const SDEParams& params, double ds, double dB) {
    DiffusionState next = state;
    if (state.absorbed) return next;

    const double y = state.y;
    const double sigma = std::sqrt(0.5 * params.kappa * y * (1.0 - y));
    // sigma * sigma' = kappa (1 - 2y) / 4
    const double sigma_dsigma = 0.25 * params.kappa * (1.0 - 2.0 * y);
    double y_new = y + (1.0 - 2.0 * y) * ds + sigma * dB + 0.5 * sigma_dsigma * (dB * dB - ds);
    y_new = std::clamp(y_new, 0.0, 1.0);

    next.alpha += ds * reciprocal_log_mean(y, y_new);
    next.beta += ds * reciprocal_log_mean(1.0 - y, 1.0 - y_new);
    next.y = y_new;
    next.s += ds;
    if (!(y_new > params.absorb_tol && y_new < 1.0 - params.absorb_tol)) next.absorbed = true;
    return next;
}

std::vector<DiffusionState> run_sde(const SDEParams& params, double x, std::span<const double> checkpoints,
                                    StreamRng& rng) {
    std::vector<DiffusionState> out;
    out.reserve(checkpoints.size());
    DiffusionState st = DiffusionState::start(x, params.absorb_tol);
    for (double target : checkpoints) {
        while (!st.absorbed && st.s < target) {
            if (params.w1 * st.alpha + params.w2 * st.beta > kLogWeightFloor) {
                st.absorbed = true;
                break;
            }
            const double remaining = target - st.s;
            double ds = sde_step_size(st, params);
            const bool last = ds >= remaining;
            if (last) ds = remaining;
            st = step_sde(st, params, ds, std::sqrt(ds) * rng.normal());
            if (last) st.s = target;
        }
        out.push_back(st);
    }
    return out;
}

std::vector<FeynmanKacPair> estimate_feynman_kac(const SDEParams& params, double x,
                                                 std::span<const double> s_targets, const SamplePlan& plan) {
    params.validate();
    check_start(x);
    check_checkpoints(s_targets);
    if (plan.n == 0) throw std::invalid_argument("sample count must be >= 1");
    // G needs strictly positive weights; with a zero weight only h1 is meaningful.
    const bool has_g = params.w1 > 0.0 && params.w2 > 0.0;
    const ExponentParams ep{params.kappa, has_g ? params.w1 : 1.0, has_g ? params.w2 : 1.0};

    auto partial = run_partitioned(plan.first, plan.n, plan.workers, [&](WorkRange range) {
        std::vector<std::pair<RunningStats, RunningStats>> stats(s_targets.size());
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            StreamRng rng(params.seed, stream_id(kDiffusionTag, i));
            const auto states = run_sde(params, x, s_targets, rng);
            for (std::size_t j = 0; j < states.size(); ++j) {
                const auto& st = states[j];
                const double weight = st.absorbed ? 0.0 : std::exp(-params.w1 * st.alpha - params.w2 * st.beta);
                stats[j].first.add(weight);
                stats[j].second.add(weight > 0.0 && has_g ? weight * eigenfunction_G(ep, st.y) : 0.0);
            }
        }
        return stats;
    });

    const auto label = describe_samples(params.seed, plan);
    std::vector<FeynmanKacPair> out;
    for (std::size_t j = 0; j < s_targets.size(); ++j) {
        RunningStats h1, hg;
        for (const auto& p : partial) {
            h1.merge(p[j].first);
            hg.merge(p[j].second);
        }
        out.push_back({h1.estimate(label), hg.estimate(label)});
    }
    return out;
}

MonteCarloEstimate estimate_hG(const SDEParams& params, double x, double s, const SamplePlan& plan) {
    if (!(params.w1 > 0.0 && params.w2 > 0.0)) throw std::domain_error("h_G needs w1, w2 > 0");
    const double targets[] = {s};
    return estimate_feynman_kac(params, x, targets, plan).front().hG;
}

MonteCarloEstimate estimate_h1_diffusion(const SDEParams& params, double x, double s, const SamplePlan& plan) {
    const double targets[] = {s};
    return estimate_feynman_kac(params, x, targets, plan).front().h1;
}

std::vector<MonteCarloEstimate> martingale_check(const SDEParams& params, double x, double s0,
                                                 std::span<const double> checkpoints, const SamplePlan& plan) {
    params.validate();
    check_start(x);
    check_checkpoints(checkpoints);
    if (!(checkpoints.back() < s0)) throw std::invalid_argument("checkpoints must lie below s0");
    if (plan.n == 0) throw std::invalid_argument("sample count must be >= 1");
    const ExponentParams ep{params.kappa, params.w1, params.w2};
    const double lambda = lambda_kappa(ep);

    auto partial = run_partitioned(plan.first, plan.n, plan.workers, [&](WorkRange range) {
        std::vector<RunningStats> stats(checkpoints.size());
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            StreamRng rng(params.seed, stream_id(kDiffusionTag, i));
            const auto states = run_sde(params, x, checkpoints, rng);
            for (std::size_t j = 0; j < states.size(); ++j) {
                const auto& st = states[j];
                double q = 0.0;
                if (!st.absorbed) {
                    q = std::exp(-lambda * (s0 - checkpoints[j]) - params.w1 * st.alpha - params.w2 * st.beta) *
                        eigenfunction_G(ep, st.y);
                }
                stats[j].add(q);
            }
        }
        return stats;
    });

    const auto label = describe_samples(params.seed, plan);
    std::vector<MonteCarloEstimate> out;
    for (std::size_t j = 0; j < checkpoints.size(); ++j) {
        RunningStats total;
        for (const auto& p : partial) total.merge(p[j]);
        out.push_back(total.estimate(label));
    }
    return out;
}

std::vector<double> sample_y_diffusion(const SDEParams& params, double x, double s, const SamplePlan& plan) {
    params.validate();
    check_start(x);
    if (plan.n == 0) throw std::invalid_argument("sample count must be >= 1");
    // Survival alone is the event of interest: no weight floor.
    SDEParams unweighted = params;
    unweighted.w1 = 0.0;
    unweighted.w2 = 0.0;
    const double targets[] = {s};
    check_checkpoints(targets);
    auto partial = run_partitioned(plan.first, plan.n, plan.workers, [&](WorkRange range) {
        std::vector<double> ys;
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            StreamRng rng(params.seed, stream_id(kDiffusionTag, i));
            const auto st = run_sde(unweighted, x, targets, rng).front();
            if (!st.absorbed) ys.push_back(st.y);
        }
        return ys;
    });
    std::vector<double> out;
    for (auto& p : partial) out.insert(out.end(), p.begin(), p.end());
    return out;
}

double eigen_residual(double kappa, double w1, double w2, std::span<const double> xs) {
    const ExponentParams ep{kappa, w1, w2};
    const double lambda = lambda_kappa(ep);
    const auto a = boundary_exponents(ep);
    double worst = 0.0;
    for (double x : xs) {
        if (!(x > 0.0 && x < 1.0)) throw std::domain_error("eigen_residual: x must lie in (0, 1)");
        const double d1 = a.a1 / x - a.a2 / (1.0 - x);                               // G'/G
        const double d2 = d1 * d1 - a.a1 / (x * x) - a.a2 / ((1.0 - x) * (1.0 - x));  // G''/G
        const double r = (1.0 - 2.0 * x) * d1 + 0.25 * kappa * x * (1.0 - x) * d2 - (w1 / x + w2 / (1.0 - x)) +
                         lambda;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace slelab
