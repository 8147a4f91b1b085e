#pragma once

// Crank-Nicolson solver for
//   d_s h = (1 - 2x) h_x + kappa x (1 - x) / 4 h_xx - (w1/x + w2/(1-x)) h
// on [0, 1] with h(0, s) = h(1, s) = 0.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace slelab {

enum class InitialProfile {
    one,            // h(x, 0) = 1 on the interior: h_1
    eigenfunction,  // h(x, 0) = G(x): h_G
};

struct PDEGridSpec {
    std::size_t nx = 401;  // nodes on [0, 1], boundaries included
    std::size_t ns = 800;  // time steps up to s_max
    double s_max = 1.0;
    /// Implicit Euler half-steps replacing the first two CN steps; damps the
    /// corner discontinuity of the h_1 initial layer.
    std::size_t rannacher_steps = 4;
};

/// h on nodes x_i = i / (nx - 1) and layers s_k = k s_max / ns, k = 0..ns.
class PDEGrid {
public:
    PDEGrid(std::size_t nx, std::size_t ns, double s_max);

    [[nodiscard]] std::size_t nx() const { return nx_; }
    [[nodiscard]] std::size_t ns() const { return ns_; }
    [[nodiscard]] double s_max() const { return s_max_; }
    [[nodiscard]] double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(nx_ - 1); }
    [[nodiscard]] double s(std::size_t k) const { return s_max_ * static_cast<double>(k) / static_cast<double>(ns_); }

    [[nodiscard]] double at(std::size_t i, std::size_t k) const { return values_[k * nx_ + i]; }
    double& at(std::size_t i, std::size_t k) { return values_[k * nx_ + i]; }

    /// Bilinear interpolation in (x, s).
    [[nodiscard]] double value(double x, double s) const;

private:
    std::size_t nx_;
    std::size_t ns_;
    double s_max_;
    std::vector<double> values_;
};

class PdeInstability : public std::runtime_error {
public:
    PdeInstability(const std::string& what, double step_ratio)
        : std::runtime_error(what), step_ratio_(step_ratio) {}
    /// ds / dx^2 of the failing run.
    [[nodiscard]] double step_ratio() const { return step_ratio_; }

private:
    double step_ratio_;
};

PDEGrid solve_h_pde(double kappa, double w1, double w2, const PDEGridSpec& spec,
                    InitialProfile initial = InitialProfile::one);

}  // namespace slelab
