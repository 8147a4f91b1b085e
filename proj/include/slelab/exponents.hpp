#pragma once

// Closed-form Brownian / SLE intersection-exponent algebra.
//
// All functions are pure and throw std::domain_error when an argument lies
// outside the range on which the corresponding formula is established.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slelab {

/// Ordered pack weights (w_1, ..., w_k); every entry finite and >= 0, k >= 1.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights);
    WeightVector(std::initializer_list<double> weights)
        : WeightVector(std::vector<double>(weights)) {}

    [[nodiscard]] std::span<const double> values() const { return weights_; }
    [[nodiscard]] std::size_t size() const { return weights_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }

    /// Number of weights >= 1 (the full-plane formula needs at least two).
    [[nodiscard]] std::size_t count_at_least_one() const;

private:
    std::vector<double> weights_;
};

/// SLE parameter and the two boundary weights of the two-sided derivative
/// observable.
struct ExponentParams {
    double kappa = 6.0;
    double w1 = 1.0;
    double w2 = 1.0;

    /// Throws std::domain_error unless kappa, w1, w2 are all > 0.
    void validate() const;
};

struct BoundaryExponents {
    double a1 = 0.0;
    double a2 = 0.0;
};

enum class EtaDomain {
    proven,             // x >= 10/3
    analytic_extension  // x >= 1, the conjectured analytic continuation
};

/// U(x) = sqrt(x + 1/24) - sqrt(1/24).
double u_map(double x);
double u_inverse(double y);

/// Half-plane exponent; symmetric in the weights. A single weight maps to
/// itself (the convention the cascade relations force).
double xi_tilde(const WeightVector& w);

/// eta(x) = ((sqrt(24x+1) - 1)^2 - 4) / 48.
double eta(double x, EtaDomain domain = EtaDomain::proven);

/// Full-plane exponent; needs k >= 2 and at least two weights >= 1.
double xi(const WeightVector& w);

/// Decay rate of E[1{t(s)<T} f'(0)^w1 f'(1)^w2] in s.
double lambda_kappa(const ExponentParams& p);

BoundaryExponents boundary_exponents(const ExponentParams& p);

/// G(x) = x^a1 (1-x)^a2 on [0, 1].
double eigenfunction_G(const ExponentParams& p, double x);

struct CascadeResidual {
    double xi_tilde = 0.0;
    /// Present only when both sides of the full-plane identity are defined.
    std::optional<double> xi;
};

/// |F(w) - F(w_1..w_j, xi_tilde(w_{j+1}..w_k))| for F = xi_tilde and, when
/// admissible, F = xi. Requires 1 <= j <= k-1.
CascadeResidual cascade_residual(const WeightVector& w, std::size_t j);

/// |lambda_6(xi_tilde(w,1,w'), w'') - xi_tilde(w, 1, lambda_6(w', w''))|.
double cook_residual(double w, double w_prime, double w_double_prime);

/// Exact label such as "5/4" or "(73−2√73)/12" when every weight is the same
/// integer; empty otherwise.
std::string xi_closed_form_label(const WeightVector& w);
std::string xi_tilde_closed_form_label(const WeightVector& w);

}  // namespace slelab
