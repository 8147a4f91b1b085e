#include "slelab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slelab/exponents.hpp"

namespace slelab {

namespace {

// Interior rows of the spatial operator: L h_i = lo h_{i-1} + di h_i + up h_{i+1}.
struct Tridiagonal {
    std::vector<double> lo, di, up;
};

Tridiagonal assemble(double kappa, double w1, double w2, std::size_t nx) {
    const std::size_t m = nx - 2;
    const double dx = 1.0 / static_cast<double>(nx - 1);
    Tridiagonal op{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t r = 0; r < m; ++r) {
        const double x = static_cast<double>(r + 1) * dx;
        const double drift = 1.0 - 2.0 * x;
        const double diff = 0.25 * kappa * x * (1.0 - x);
        const double potential = w1 / x + w2 / (1.0 - x);
        op.lo[r] = diff / (dx * dx) - drift / (2.0 * dx);
        op.up[r] = diff / (dx * dx) + drift / (2.0 * dx);
        op.di[r] = -2.0 * diff / (dx * dx) - potential;
    }
    return op;
}

// One theta-step: (I - theta k L) u_new = (I + (1 - theta) k L) u_old on the
// interior, Thomas algorithm.
void theta_step(const Tridiagonal& op, double k, double theta, const double* u_old, double* u_new,
                std::vector<double>& c_prime, std::vector<double>& d_prime) {
    const std::size_t m = op.di.size();
    auto old_at = [&](std::size_t r, long off) -> double {
        const long idx = static_cast<long>(r) + off;
        return (idx < 0 || idx >= static_cast<long>(m)) ? 0.0 : u_old[idx];
    };
    const double ex = (1.0 - theta) * k;
    const double im = theta * k;
    for (std::size_t r = 0; r < m; ++r) {
        const double rhs = old_at(r, 0) + ex * (op.lo[r] * old_at(r, -1) + op.di[r] * old_at(r, 0) +
                                                op.up[r] * old_at(r, 1));
        const double a = -im * op.lo[r];
        const double b = 1.0 - im * op.di[r];
        const double c = -im * op.up[r];
        if (r == 0) {
            c_prime[r] = c / b;
            d_prime[r] = rhs / b;
        } else {
            const double denom = b - a * c_prime[r - 1];
            c_prime[r] = c / denom;
            d_prime[r] = (rhs - a * d_prime[r - 1]) / denom;
        }
    }
    u_new[m - 1] = d_prime[m - 1];
    for (std::size_t r = m - 1; r-- > 0;) u_new[r] = d_prime[r] - c_prime[r] * u_new[r + 1];
}

}  // namespace

PDEGrid::PDEGrid(std::size_t nx, std::size_t ns, double s_max)
    : nx_(nx), ns_(ns), s_max_(s_max), values_(nx * (ns + 1), 0.0) {}

double PDEGrid::value(double x, double s) const {
    x = std::clamp(x, 0.0, 1.0);
    s = std::clamp(s, 0.0, s_max_);
    const double fx = x * static_cast<double>(nx_ - 1);
    const double fs = s / s_max_ * static_cast<double>(ns_);
    const auto i = std::min(static_cast<std::size_t>(fx), nx_ - 2);
    const auto k = std::min(static_cast<std::size_t>(fs), ns_ - 1);
    const double tx = fx - static_cast<double>(i);
    const double ts = fs - static_cast<double>(k);
    const double lo = (1.0 - tx) * at(i, k) + tx * at(i + 1, k);
    const double hi = (1.0 - tx) * at(i, k + 1) + tx * at(i + 1, k + 1);
    return (1.0 - ts) * lo + ts * hi;
}

PDEGrid solve_h_pde(double kappa, double w1, double w2, const PDEGridSpec& spec, InitialProfile initial) {
    if (spec.nx < 16 || spec.ns < 16) throw std::invalid_argument("PDE grid needs nx, ns >= 16");
    if (spec.nx * (spec.ns + 1) > (std::size_t{1} << 28)) throw std::invalid_argument("PDE grid too large");
    if (!(spec.s_max > 0.0)) throw std::invalid_argument("s_max must be > 0");
    if (!(kappa > 0.0) || !(w1 >= 0.0) || !(w2 >= 0.0)) throw std::domain_error("bad PDE coefficients");
    if (initial == InitialProfile::eigenfunction && !(w1 > 0.0 && w2 > 0.0)) {
        throw std::domain_error("eigenfunction initial layer needs w1, w2 > 0");
    }

    PDEGrid grid(spec.nx, spec.ns, spec.s_max);
    const ExponentParams ep{kappa, w1, w2};
    double initial_max = 0.0;
    for (std::size_t i = 1; i + 1 < spec.nx; ++i) {
        const double v = initial == InitialProfile::one ? 1.0 : eigenfunction_G(ep, grid.x(i));
        grid.at(i, 0) = v;
        initial_max = std::max(initial_max, v);
    }

    const Tridiagonal op = assemble(kappa, w1, w2, spec.nx);
    const double ds = spec.s_max / static_cast<double>(spec.ns);
    const double dx = 1.0 / static_cast<double>(spec.nx - 1);
    const std::size_t m = spec.nx - 2;
    std::vector<double> c_prime(m), d_prime(m), scratch(m);
    const std::size_t euler_layers = std::min(spec.rannacher_steps / 2, spec.ns);

    for (std::size_t k = 0; k < spec.ns; ++k) {
        const double* u_old = &grid.at(1, k);
        double* u_new = &grid.at(1, k + 1);
        if (k < euler_layers) {
            theta_step(op, 0.5 * ds, 1.0, u_old, scratch.data(), c_prime, d_prime);
            theta_step(op, 0.5 * ds, 1.0, scratch.data(), u_new, c_prime, d_prime);
        } else {
            theta_step(op, ds, 0.5, u_old, u_new, c_prime, d_prime);
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (!std::isfinite(u_new[r]) || std::abs(u_new[r]) > 2.0 * initial_max + 1e-12) {
                std::ostringstream os;
                os << "PDE solution blew up at layer " << k + 1 << " (ds/dx^2 = " << ds / (dx * dx) << ")";
                throw PdeInstability(os.str(), ds / (dx * dx));
            }
        }
    }
    return grid;
}

}  // namespace slelab
