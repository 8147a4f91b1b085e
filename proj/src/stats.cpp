#include "slelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace slelab {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
}

double RunningStats::variance() const {
    return n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0;
}

MonteCarloEstimate RunningStats::estimate(std::string seed_range) const {
    MonteCarloEstimate e;
    e.mean = mean_;
    e.n = n_;
    e.std_error = n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    e.seed_range = std::move(seed_range);
    return e;
}

RunningStats RunningStats::from_estimate(const MonteCarloEstimate& e) {
    RunningStats s;
    s.n_ = e.n;
    s.mean_ = e.mean;
    const double n = static_cast<double>(e.n);
    s.m2_ = e.n > 1 ? e.std_error * e.std_error * n * (n - 1.0) : 0.0;
    return s;
}

MonteCarloEstimate merge_estimates(const MonteCarloEstimate& a, const MonteCarloEstimate& b) {
    auto s = RunningStats::from_estimate(a);
    s.merge(RunningStats::from_estimate(b));
    std::string range = a.seed_range;
    if (!b.seed_range.empty()) range += (range.empty() ? "" : ";") + b.seed_range;
    return s.estimate(std::move(range));
}

LineFit weighted_line_fit(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> sigmas) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n || sigmas.size() != n) {
        throw std::invalid_argument("weighted_line_fit: need >= 2 matching points");
    }
    const bool weighted = std::all_of(sigmas.begin(), sigmas.end(), [](double s) { return s > 0.0; });

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weighted ? 1.0 / (sigmas[i] * sigmas[i]) : 1.0;
        sw += w;
        sx += w * xs[i];
        sy += w * ys[i];
        sxx += w * xs[i] * xs[i];
        sxy += w * xs[i] * ys[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 0.0)) throw std::invalid_argument("weighted_line_fit: degenerate abscissae");

    LineFit fit;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sxx * sy - sx * sxy) / det;
    if (weighted) {
        fit.slope_se = std::sqrt(sw / det);
    } else if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - fit.intercept - fit.slope * xs[i];
            rss += r * r;
        }
        fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) * sw / det);
    }
    return fit;
}

DecayFit fit_lambda(std::span<const std::pair<double, MonteCarloEstimate>> estimates) {
    std::set<double> distinct;
    for (const auto& [s, e] : estimates) distinct.insert(s);
    if (distinct.size() < 3) throw std::invalid_argument("fit_lambda: need >= 3 distinct s values");

    DecayFit out;
    std::vector<double> sigmas;
    for (const auto& [s, e] : estimates) {
        if (!(e.mean > 0.0) || e.mean <= 2.0 * e.std_error) {
            throw std::domain_error("fit_lambda: mean not resolved above 2 stderr at s=" + std::to_string(s));
        }
        out.s_grid.push_back(s);
        out.log_means.push_back(std::log(e.mean));
        // delta method: sd(log m) = stderr / m
        const double sigma = e.std_error / e.mean;
        sigmas.push_back(sigma);
        out.weights.push_back(sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0);
    }
    const auto line = weighted_line_fit(out.s_grid, out.log_means, sigmas);
    out.lambda_hat = -line.slope;
    out.intercept = line.intercept;
    out.ci_halfwidth = 1.96 * line.slope_se;
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace slelab
