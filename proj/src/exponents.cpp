#include "slelab/exponents.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace slelab {

namespace {

constexpr double kOneOver24 = 1.0 / 24.0;

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

// sqrt(24 w + 1), the quantity every closed form is built from.
double root_term(double w) { return std::sqrt(24.0 * w + 1.0); }

double lambda_root(double kappa, double w) {
    return std::sqrt((kappa - 4.0) * (kappa - 4.0) + 16.0 * kappa * w);
}

// Exact value (A - B*sqrt(m)) / C in reduced form, with m square-free-ish.
std::string format_surd(long long a, long long b, long long m, long long c) {
    long long outside = 1;
    for (long long f = 2; f * f <= m; ++f) {
        while (m % (f * f) == 0) {
            m /= f * f;
            outside *= f;
        }
    }
    b *= outside;
    if (m == 1) {
        a -= b;
        b = 0;
    }
    long long g = std::gcd(std::gcd(a, b), c);
    if (g == 0) g = 1;
    a /= g;
    b /= g;
    c /= g;
    if (c < 0) {
        a = -a;
        b = -b;
        c = -c;
    }
    std::ostringstream os;
    if (b == 0) {
        os << a;
        if (c != 1) os << '/' << c;
        return os.str();
    }
    std::ostringstream num;
    num << a << "−";
    if (b != 1) num << b;
    num << "√" << m;
    if (c == 1) return num.str();
    os << '(' << num.str() << ")/" << c;
    return os.str();
}

// Common integer weight when all entries agree and are integers.
std::optional<long long> common_integer_weight(const WeightVector& w) {
    const double first = w[0];
    if (first != std::floor(first) || first > 1e6) return std::nullopt;
    for (double v : w.values()) {
        if (v != first) return std::nullopt;
    }
    return static_cast<long long>(first);
}

}  // namespace

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
    require(!weights_.empty(), "weight vector must be nonempty");
    for (double v : weights_) {
        require(std::isfinite(v) && v >= 0.0, "weights must be finite and >= 0");
    }
}

std::size_t WeightVector::count_at_least_one() const {
    std::size_t n = 0;
    for (double v : weights_) n += v >= 1.0 ? 1 : 0;
    return n;
}

void ExponentParams::validate() const {
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(w1) && w1 > 0.0, "w1 must be > 0");
    require(std::isfinite(w2) && w2 > 0.0, "w2 must be > 0");
}

double u_map(double x) {
    require(x >= 0.0, "u_map: x must be >= 0");
    return std::sqrt(x + kOneOver24) - std::sqrt(kOneOver24);
}

double u_inverse(double y) {
    require(y >= 0.0, "u_inverse: y must be >= 0");
    const double r = y + std::sqrt(kOneOver24);
    return r * r - kOneOver24;
}

double xi_tilde(const WeightVector& w) {
    const auto k = static_cast<double>(w.size());
    double sum = 0.0;
    for (double v : w.values()) sum += root_term(v);
    const double inner = sum - (k - 1.0);
    return (inner * inner - 1.0) / 24.0;
}

double eta(double x, EtaDomain domain) {
    const double lower = domain == EtaDomain::proven ? 10.0 / 3.0 : 1.0;
    // 10/3 itself must be accepted even after rounding in xi_tilde(1,1).
    require(std::isfinite(x) && x >= lower * (1.0 - 1e-15), "eta: argument below its domain");
    const double r = root_term(x) - 1.0;
    return (r * r - 4.0) / 48.0;
}

double xi(const WeightVector& w) {
    require(w.size() >= 2, "xi: needs at least two weights");
    require(w.count_at_least_one() >= 2, "xi: needs at least two weights >= 1");
    const auto k = static_cast<double>(w.size());
    double sum = 0.0;
    for (double v : w.values()) sum += root_term(v);
    const double inner = sum - k;
    return (inner * inner - 4.0) / 48.0;
}

double lambda_kappa(const ExponentParams& p) {
    p.validate();
    const double k = p.kappa;
    const double inner = lambda_root(k, p.w1) + lambda_root(k, p.w2) + k;
    return (inner * inner - (8.0 - k) * (8.0 - k)) / (16.0 * k);
}

BoundaryExponents boundary_exponents(const ExponentParams& p) {
    p.validate();
    const double k = p.kappa;
    return {(k - 4.0 + lambda_root(k, p.w1)) / (2.0 * k),
            (k - 4.0 + lambda_root(k, p.w2)) / (2.0 * k)};
}

double eigenfunction_G(const ExponentParams& p, double x) {
    require(x >= 0.0 && x <= 1.0, "eigenfunction_G: x must lie in [0, 1]");
    const auto a = boundary_exponents(p);
    return std::pow(x, a.a1) * std::pow(1.0 - x, a.a2);
}

CascadeResidual cascade_residual(const WeightVector& w, std::size_t j) {
    if (j < 1 || j + 1 > w.size()) {
        throw std::out_of_range("cascade_residual: need 1 <= j <= k-1");
    }
    const auto all = w.values();
    const double tail = xi_tilde(WeightVector(std::vector<double>(all.begin() + j, all.end())));
    std::vector<double> head(all.begin(), all.begin() + j);
    head.push_back(tail);
    const WeightVector collapsed(std::move(head));

    CascadeResidual out;
    out.xi_tilde = std::abs(xi_tilde(w) - xi_tilde(collapsed));
    if (w.size() >= 2 && w.count_at_least_one() >= 2 && collapsed.count_at_least_one() >= 2) {
        out.xi = std::abs(xi(w) - xi(collapsed));
    }
    return out;
}

double cook_residual(double w, double w_prime, double w_double_prime) {
    auto lambda6 = [](double a, double b) { return lambda_kappa({6.0, a, b}); };
    const double lhs = lambda6(xi_tilde({w, 1.0, w_prime}), w_double_prime);
    const double rhs = xi_tilde({w, 1.0, lambda6(w_prime, w_double_prime)});
    return std::abs(lhs - rhs);
}

std::string xi_closed_form_label(const WeightVector& w) {
    if (w.size() < 2 || w.count_at_least_one() < 2) return {};
    const auto weight = common_integer_weight(w);
    if (!weight) return {};
    const auto k = static_cast<long long>(w.size());
    const long long m = 24 * *weight + 1;
    // ((k sqrt(m) - k)^2 - 4) / 48
    return format_surd(k * k * (m + 1) - 4, 2 * k * k, m, 48);
}

std::string xi_tilde_closed_form_label(const WeightVector& w) {
    const auto weight = common_integer_weight(w);
    if (!weight) return {};
    const auto k = static_cast<long long>(w.size());
    const long long m = 24 * *weight + 1;
    // ((k sqrt(m) - (k-1))^2 - 1) / 24
    return format_surd(k * k * m + (k - 1) * (k - 1) - 1, 2 * k * (k - 1), m, 24);
}

}  // namespace slelab
