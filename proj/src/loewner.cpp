#include "slelab/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slelab/parallel.hpp"

namespace slelab {

namespace {

constexpr std::uint64_t kLoewnerTag = 1;
// exp(-690.8) ~ 1e-300
constexpr double kLogWeightFloor = 690.8;

void check_targets(std::span<const double> s_targets) {
    if (s_targets.empty()) throw std::invalid_argument("need at least one s target");
    double prev = 0.0;
    for (double s : s_targets) {
        if (!(s > prev)) throw std::invalid_argument("s targets must be positive and increasing");
        prev = s;
    }
}

void check_weights(double w1, double w2, const SamplePlan& plan) {
    if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw std::domain_error("weights must be >= 0");
    if (plan.n == 0) throw std::invalid_argument("sample count must be >= 1");
}

}  // namespace

void ChainParams::validate() const {
    if (!(kappa > 0.0)) throw std::domain_error("kappa must be > 0");
    if (!(x0 > 0.0 && x0 < 1.0)) throw std::domain_error("x0 must lie in (0, 1)");
    if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
    if (!(gap_step > 0.0)) throw std::domain_error("gap_step must be > 0");
    if (!(swallow_tol > 0.0) || swallow_tol >= 0.01 * std::min(x0, 1.0 - x0)) {
        throw std::domain_error("swallow_tol must be > 0 and well below min(x0, 1-x0)");
    }
}

ChainState ChainState::start(double x0) {
    ChainState st;
    st.W = x0;
    return st;
}

ChainState advance_step(const ChainState& state, double dt, double dW, double swallow_tol) {
    ChainState next = state;
    if (state.swallowed) return next;

    const double band = swallow_tol * (state.g1 - state.g0);
    const double gap0 = state.W - state.g0;
    const double gap1 = state.g1 - state.W;
    if (gap0 <= band || gap1 <= band) {
        next.swallowed = true;
        return next;
    }

    const double four_dt = 4.0 * dt;
    next.g0 = state.W - std::sqrt(gap0 * gap0 + four_dt);
    next.g1 = state.W + std::sqrt(gap1 * gap1 + four_dt);
    // log of |u - W| / sqrt((u - W)^2 + 4 dt)
    next.logd0 = state.logd0 - 0.5 * std::log1p(four_dt / (gap0 * gap0));
    next.logd1 = state.logd1 - 0.5 * std::log1p(four_dt / (gap1 * gap1));
    next.t = state.t + dt;
    next.s = std::log(next.g1 - next.g0);
    next.W = state.W + dW;

    const double new_band = swallow_tol * (next.g1 - next.g0);
    if (next.W <= next.g0 + new_band || next.W >= next.g1 - new_band) next.swallowed = true;
    return next;
}

double adaptive_step(const ChainState& state, const ChainParams& params) {
    const double width = state.g1 - state.g0;
    const double gap = std::min(state.W - state.g0, state.g1 - state.W);
    const double base = params.dt * width * width;
    return std::max(base * 1e-6, std::min(base, params.gap_step * gap * gap));
}

std::vector<TwoSidedSample> run_to_s_grid(const ChainParams& params, std::span<const double> s_targets,
                                          StreamRng& rng, const WeightCap* cap) {
    std::vector<TwoSidedSample> out(s_targets.size());
    std::size_t next_target = 0;
    ChainState st = ChainState::start(params.x0);
    const double sqrt_kappa = std::sqrt(params.kappa);

    while (next_target < s_targets.size() && !st.swallowed) {
        if (cap && cap->w1 * st.alpha() + cap->w2 * st.beta() > kLogWeightFloor) break;

        const double dt = adaptive_step(st, params);
        const ChainState prev = st;
        st = advance_step(prev, dt, sqrt_kappa * std::sqrt(dt) * rng.normal(), params.swallow_tol);
        if (st.swallowed && st.s == prev.s) break;  // rejected inside the guard band

        // s only moves during the slit map, with W frozen at prev.W; the
        // tip's image right after the map closes the bracket.
        const double z_prev = prev.z();
        const double z_mapped = (prev.W - st.g0) / (st.g1 - st.g0);
        while (next_target < s_targets.size() && st.s >= s_targets[next_target]) {
            const double target = s_targets[next_target];
            const double frac = (target - prev.s) / (st.s - prev.s);
            const double logd0 = prev.logd0 + frac * (st.logd0 - prev.logd0);
            const double logd1 = prev.logd1 + frac * (st.logd1 - prev.logd1);
            out[next_target] = {true, target - logd0, target - logd1, z_prev + frac * (z_mapped - z_prev)};
            ++next_target;
        }
    }
    for (std::size_t i = next_target; i < out.size(); ++i) {
        out[i] = {false, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};
    }
    return out;
}

TwoSidedSample run_to_s(const ChainParams& params, double s_target, std::uint64_t sample_index) {
    params.validate();
    const double targets[] = {s_target};
    check_targets(targets);
    StreamRng rng(params.seed, stream_id(kLoewnerTag, sample_index));
    return run_to_s_grid(params, targets, rng).front();
}

std::string describe_samples(std::uint64_t seed, const SamplePlan& plan) {
    return "seed=" + std::to_string(seed) + " samples=[" + std::to_string(plan.first) + "," +
           std::to_string(plan.first + plan.n) + ")";
}

std::vector<MonteCarloEstimate> estimate_h1_grid(const ChainParams& params, std::span<const double> s_targets,
                                                 double w1, double w2, const SamplePlan& plan) {
    params.validate();
    check_targets(s_targets);
    check_weights(w1, w2, plan);
    const WeightCap cap{w1, w2};

    auto partial = run_partitioned(plan.first, plan.n, plan.workers, [&](WorkRange range) {
        std::vector<RunningStats> stats(s_targets.size());
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            StreamRng rng(params.seed, stream_id(kLoewnerTag, i));
            const auto samples = run_to_s_grid(params, s_targets, rng, &cap);
            for (std::size_t j = 0; j < samples.size(); ++j) {
                const auto& smp = samples[j];
                stats[j].add(smp.reached_s ? std::exp(-w1 * smp.alpha - w2 * smp.beta) : 0.0);
            }
        }
        return stats;
    });

    std::vector<MonteCarloEstimate> out;
    const auto label = describe_samples(params.seed, plan);
    for (std::size_t j = 0; j < s_targets.size(); ++j) {
        RunningStats total;
        for (const auto& p : partial) total.merge(p[j]);
        out.push_back(total.estimate(label));
    }
    return out;
}

MonteCarloEstimate estimate_h1(const ChainParams& params, double s_target, double w1, double w2,
                               const SamplePlan& plan) {
    const double targets[] = {s_target};
    return estimate_h1_grid(params, targets, w1, w2, plan).front();
}

MonteCarloEstimate estimate_H(const ChainParams& params, double log_r, double w1, double w2,
                              const SamplePlan& plan) {
    if (!(log_r > 0.0)) throw std::domain_error("log R must be > 0");
    return estimate_h1(params, log_r, w1, w2, plan);
}

std::vector<double> sample_y_loewner(const ChainParams& params, double s, const SamplePlan& plan) {
    params.validate();
    const double targets[] = {s};
    check_targets(targets);
    check_weights(0.0, 0.0, plan);
    auto partial = run_partitioned(plan.first, plan.n, plan.workers, [&](WorkRange range) {
        std::vector<double> ys;
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            StreamRng rng(params.seed, stream_id(kLoewnerTag, i));
            const auto smp = run_to_s_grid(params, targets, rng).front();
            if (smp.reached_s) ys.push_back(smp.y);
        }
        return ys;
    });
    std::vector<double> out;
    for (auto& p : partial) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace slelab
