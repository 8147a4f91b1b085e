// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "slelab/diffusion.hpp"
#include "slelab/exponents.hpp"
#include "slelab/io.hpp"
#include "slelab/loewner.hpp"
#include "slelab/pde.hpp"
#include "slelab/stats.hpp"
#include "slelab/walkers.hpp"

using namespace slelab;

namespace {

constexpr double kKappa = 6.0;
constexpr std::uint64_t kSamples = 100000;

unsigned worker_count() {
    if (const char* env = std::getenv("SLE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string g(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Collects failures of one criterion; the first few go on the summary line.
struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

// Discretization knobs halved for the robustness run.
struct Resolution {
    double dt;          // Loewner base capacity step
    double ds_max;      // SDE step cap
    double absorb_tol;  // SDE absorption band
    std::size_t pde_ns;
};

constexpr Resolution kBase{2.5e-4, 1e-3, 1e-6, 4000};
constexpr Resolution kHalved{1.25e-4, 5e-4, 5e-7, 8000};

struct Measured {
    std::string name;
    double mean;
    double se;
};

// Results of criteria 3-6 at one resolution.
struct SuiteRun {
    Verdict c3, c4, c5, c6;
    std::vector<Measured> values;
};

SDEParams sde_params(const Resolution& res, double w1, double w2) {
    SDEParams p;
    p.kappa = kKappa;
    p.w1 = w1;
    p.w2 = w2;
    p.ds_max = res.ds_max;
    p.absorb_tol = res.absorb_tol;
    return p;
}

ChainParams chain_params(const Resolution& res) {
    ChainParams p;
    p.kappa = kKappa;
    p.x0 = 0.5;
    p.dt = res.dt;
    return p;
}

double predicted_h(double x, double s, double w1, double w2) {
    const ExponentParams ep{kKappa, w1, w2};
    return eigenfunction_G(ep, x) * std::exp(-lambda_kappa(ep) * s);
}

Verdict criterion1(std::string& detail) {
    Verdict v;
    v.require(xi({1, 1}) == 1.25, "xi(1,1) = " + g(xi({1, 1})));
    const double r33 = std::abs(12.0 * xi({3, 3}) + 2.0 * std::sqrt(73.0) - 73.0);
    v.require(r33 < 1e-10, "xi(3,3) residual " + g(r33));
    const double rt = std::abs(xi_tilde({1, 1}) - 10.0 / 3.0);
    v.require(rt < 1e-12, "xi_tilde(1,1) off by " + g(rt));

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    std::uniform_int_distribution<int> len(2, 6);
    double cascade = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> w(static_cast<std::size_t>(len(gen)));
        for (auto& e : w) e = u(gen);
        const WeightVector wv(w);
        for (std::size_t j = 1; j < w.size(); ++j) {
            const auto r = cascade_residual(wv, j);
            cascade = std::max(cascade, r.xi_tilde);
            if (r.xi) cascade = std::max(cascade, *r.xi);
        }
    }
    v.require(cascade < 1e-12, "cascade residual " + g(cascade));

    double cook = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 1; j <= 10; ++j)
            for (int k = 1; k <= 10; ++k) cook = std::max(cook, cook_residual(0.4 * i, 0.4 * j, 0.4 * k));
    v.require(cook < 1e-12, "cook residual " + g(cook));

    double bridge = 0.0;
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
            const double w = 0.2 * i, wp = 0.2 * j;
            bridge = std::max(bridge, std::abs(lambda_kappa({6.0, w, wp}) - xi_tilde({w, 1.0, wp})));
        }
    v.require(bridge < 1e-12, "kappa=6 bridge residual " + g(bridge));

    detail = "xi(3,3) residual " + g(r33) + ", cascade " + g(cascade) + ", cook " + g(cook) + ", bridge " + g(bridge);
    return v;
}

Verdict criterion2(std::string& detail) {
    Verdict v;
    std::vector<double> xs;
    for (int i = 0; i < 97; ++i) xs.push_back(0.02 + 0.96 * i / 96.0);
    double worst = 0.0;
    for (double kappa : {8.0 / 3.0, 4.0, 6.0}) {
        for (auto [w1, w2] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {0.5, 3.0}}) {
            const double r = eigen_residual(kappa, w1, w2, xs);
            worst = std::max(worst, r);
            v.require(r < 1e-10, "kappa=" + g(kappa) + " w=(" + g(w1) + "," + g(w2) + ") residual " + g(r));
        }
    }
    detail = "max residual " + g(worst) + " over 9 cases x 97 points";
    return v;
}

void criterion3(const Resolution& res, unsigned workers, SuiteRun& run) {
    const double grid[] = {0.5, 1.0, 2.0};
    for (double x : {0.3, 0.5, 0.7}) {
        const auto pairs = estimate_feynman_kac(sde_params(res, 1, 1), x, grid, {kSamples, 0, workers});
        for (std::size_t j = 0; j < 3; ++j) {
            const auto& e = pairs[j].hG;
            const double target = predicted_h(x, grid[j], 1, 1);
            const std::string name = "hG(" + g(x) + "," + g(grid[j]) + ")";
            run.c3.require(std::abs(e.mean - target) <= 3.0 * e.std_error,
                           name + " = " + g(e.mean) + " vs " + g(target) + " (se " + g(e.std_error) + ")");
            run.values.push_back({"c3 " + name, e.mean, e.std_error});
        }
    }
}

void criterion4(const Resolution& res, unsigned workers, SuiteRun& run) {
    const double checkpoints[] = {0.25, 0.5, 0.75};
    const auto qs = martingale_check(sde_params(res, 1, 1), 0.5, 1.0, checkpoints, {kSamples, 0, workers});
    const double target = predicted_h(0.5, 1.0, 1, 1);
    for (std::size_t j = 0; j < 3; ++j) {
        const std::string name = "Q(" + g(checkpoints[j]) + ")";
        run.c4.require(std::abs(qs[j].mean - target) <= 3.0 * qs[j].std_error,
                       name + " = " + g(qs[j].mean) + " vs " + g(target) + " (se " + g(qs[j].std_error) + ")");
        run.values.push_back({"c4 " + name, qs[j].mean, qs[j].std_error});
    }
}

void criterion5(const Resolution& res, unsigned workers, SuiteRun& run) {
    const SamplePlan plan{kSamples, 0, workers};
    const auto sde = estimate_h1_diffusion(sde_params(res, 1, 1), 0.5, 1.0, plan);
    const auto loewner = estimate_h1(chain_params(res), 1.0, 1, 1, plan);

    PDEGridSpec fine{2001, res.pde_ns, 1.0};
    PDEGridSpec coarse{1001, res.pde_ns / 2, 1.0};
    const double pde = solve_h_pde(kKappa, 1, 1, fine).value(0.5, 1.0);
    const double pde_coarse = solve_h_pde(kKappa, 1, 1, coarse).value(0.5, 1.0);
    // The corner in the initial data slows convergence below 4x per
    // doubling, so the whole coarse-to-fine change bounds the fine error.
    const double grid_rel = std::abs(pde - pde_coarse) / pde;
    run.c5.require(grid_rel <= 1e-3, "pde grid error estimate " + g(grid_rel) + " above 1e-3");

    run.c5.require(std::abs(sde.mean - pde) <= 3.0 * sde.std_error + 1e-3 * pde,
                   "sde " + g(sde.mean) + " vs pde " + g(pde) + " (se " + g(sde.std_error) + ")");
    run.c5.require(std::abs(loewner.mean - pde) <= 3.0 * loewner.std_error + 1e-3 * pde,
                   "loewner " + g(loewner.mean) + " vs pde " + g(pde) + " (se " + g(loewner.std_error) + ")");
    run.c5.require(std::abs(loewner.mean - sde.mean) <= 3.0 * std::hypot(loewner.std_error, sde.std_error),
                   "loewner " + g(loewner.mean) + " vs sde " + g(sde.mean));
    run.values.push_back({"c5 sde h1(0.5,1)", sde.mean, sde.std_error});
    run.values.push_back({"c5 loewner h1(0.5,1)", loewner.mean, loewner.std_error});
    run.values.push_back({"c5 pde h1(0.5,1)", pde, 1e-3 * pde});
    run.values.push_back({"c5 pde grid error", grid_rel, 0.0});
}

void criterion6(const Resolution& res, unsigned workers, SuiteRun& run) {
    const double grid[] = {0.5, 1.0, 1.5, 2.0, 2.5};
    const SamplePlan plan{kSamples, 0, workers};
    for (auto [w1, w2] : {std::pair{1.0, 1.0}, {1.0, 2.0}}) {
        const double lambda = lambda_kappa({kKappa, w1, w2});
        const std::string w = "(" + g(w1) + "," + g(w2) + ")";

        std::vector<std::pair<std::string, std::vector<MonteCarloEstimate>>> engines;
        std::vector<MonteCarloEstimate> sde;
        const auto pairs = estimate_feynman_kac(sde_params(res, w1, w2), 0.5, grid, plan);
        for (const auto& p : pairs) sde.push_back(p.h1);
        engines.emplace_back("sde", sde);
        engines.emplace_back("loewner", estimate_h1_grid(chain_params(res), grid, w1, w2, plan));

        for (const auto& [engine, estimates] : engines) {
            std::vector<std::pair<double, MonteCarloEstimate>> points;
            for (std::size_t j = 0; j < 5; ++j) {
                const auto& e = estimates[j];
                const double bound = predicted_h(0.5, grid[j], w1, w2);
                run.c6.require(e.mean + 3.0 * e.std_error >= bound, engine + " h1" + w + " at s=" + g(grid[j]) +
                                                                         " below the lower bound " + g(bound));
                points.emplace_back(grid[j], e);
                run.values.push_back({"c6 " + engine + " h1" + w + " s=" + g(grid[j]), e.mean, e.std_error});
            }
            try {
                const auto fit = fit_lambda(points);
                const bool ok = w1 == w2 ? (fit.lambda_hat >= 6.3 && fit.lambda_hat <= 7.7)
                                         : std::abs(fit.lambda_hat - lambda) <= 0.10 * lambda;
                run.c6.require(ok, engine + " lambda_hat" + w + " = " + g(fit.lambda_hat) + " vs " + g(lambda));
                run.values.push_back({"c6 " + engine + " lambda_hat" + w, fit.lambda_hat, fit.ci_halfwidth / 1.96});
            } catch (const std::exception& e) {
                run.c6.require(false, engine + " lambda fit" + w + ": " + e.what());
            }
        }
    }
}

SuiteRun run_suite(const Resolution& res, unsigned workers) {
    SuiteRun run;
    criterion3(res, workers, run);
    criterion4(res, workers, run);
    criterion5(res, workers, run);
    criterion6(res, workers, run);
    return run;
}

Verdict criterion7(unsigned workers, std::string& detail) {
    Verdict v;
    constexpr std::size_t kPerSide = 10000;
    // Roughly e^-1 of the paths survive to s = 1; draw enough for 10^4 each.
    const SamplePlan plan{40000, 0, workers};
    auto loewner = sample_y_loewner(chain_params(kBase), 1.0, plan);
    auto sde = sample_y_diffusion(sde_params(kBase, 1, 1), 0.5, 1.0, plan);
    v.require(loewner.size() >= kPerSide, "only " + std::to_string(loewner.size()) + " Loewner survivors");
    v.require(sde.size() >= kPerSide, "only " + std::to_string(sde.size()) + " SDE survivors");
    loewner.resize(std::min(loewner.size(), kPerSide));
    sde.resize(std::min(sde.size(), kPerSide));
    const double d = ks_statistic(loewner, sde);
    const double crit = ks_critical_value(loewner.size(), sde.size(), 0.01);
    v.require(d < crit, "KS statistic " + g(d) + " >= critical " + g(crit));
    detail = "D = " + g(d) + ", 1% critical value " + g(crit) + ", " + std::to_string(loewner.size()) + " + " +
             std::to_string(sde.size()) + " samples";
    return v;
}

Verdict criterion8(unsigned workers, std::string& detail) {
    Verdict v;
    for (const std::vector<int>& packs : {std::vector<int>{1}, std::vector<int>{1, 1}}) {
        WalkPairConfig config;
        config.pack_sizes = packs;
        config.radius_levels = {4, 8, 16, 32, 64, 128, 256, 512};
        config.population = 10000;
        config.workers = workers;
        std::vector<double> w(packs.begin(), packs.end());
        const double target = xi_tilde(WeightVector(w));
        const double tol = packs.size() == 1 ? 0.10 : 0.15;
        const std::string label = packs.size() == 1 ? "(1)" : "(1,1)";
        try {
            const auto run = splitting_estimate(config);
            const auto window = radius_estimates(run, 16.0);
            const auto fit = fit_xi_tilde(window);
            v.require(std::abs(fit.lambda_hat - target) <= tol * target,
                      label + " exponent " + g(fit.lambda_hat) + " vs " + g(target));
            detail += (detail.empty() ? "" : ", ") + label + " " + g(fit.lambda_hat) + " +/- " + g(fit.ci_halfwidth) +
                      " (predicted " + g(target) + ")";
        } catch (const std::exception& e) {
            v.require(false, label + ": " + e.what());
        }
    }
    return v;
}

void compare_shifts(const SuiteRun& base, const SuiteRun& halved, Verdict& v, std::string& detail) {
    if (base.values.size() != halved.values.size()) {
        v.require(false, "runs measured different quantities");
        return;
    }
    double worst = 0.0;
    std::string worst_name;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < base.values.size(); ++i) {
        const auto& a = base.values[i];
        const auto& b = halved.values[i];
        if (a.se == 0.0) continue;
        ++compared;
        const double combined = std::hypot(a.se, b.se);
        const double z = std::abs(a.mean - b.mean) / combined;
        if (z > worst) {
            worst = z;
            worst_name = a.name;
        }
        v.require(z < 2.0, a.name + " shifted " + g(a.mean) + " -> " + g(b.mean) + " (" + g(z) + " combined se)");
    }
    detail += "largest shift " + g(worst) + " combined se (" + worst_name + ") over " +
              std::to_string(compared) + " quantities";
}

std::string run_cli_to_file(const std::vector<std::string>& args, const std::string& path, Verdict& v) {
    auto full = args;
    full.insert(full.end(), {"--out", path});
    std::ostringstream out, err;
    const int code = cli::run_cli(full, out, err);
    v.require(code == cli::kExitOk, args.front() + " exited " + std::to_string(code) + ": " + err.str());
    return std::filesystem::exists(path) ? read_file(path) : std::string{};
}

void check_reproducible(Verdict& v, std::string& detail) {
    const auto dir = std::filesystem::temp_directory_path() / "slelab_acceptance";
    std::filesystem::create_directories(dir);
    const std::vector<std::vector<std::string>> commands = {
        {"sim-loewner", "--s-grid", "0.5,1", "--samples", "2000", "--workers", "2"},
        {"sim-diffusion", "--s-grid", "0.5,1", "--samples", "2000", "--workers", "2"},
        {"solve-pde", "--s-grid", "0.5,1"},
        {"martingale-check", "--samples", "2000"},
        {"walkers", "--packs", "1,1", "--radii", "4,8,16,32", "--population", "500", "--workers", "2"},
    };
    for (const auto& cmd : commands) {
        const auto a = run_cli_to_file(cmd, (dir / "a.csv").string(), v);
        const auto b = run_cli_to_file(cmd, (dir / "b.csv").string(), v);
        v.require(!a.empty() && a == b, cmd.front() + " output differs between identical runs");
    }
    std::filesystem::remove_all(dir);
    detail += "; " + std::to_string(commands.size()) + " commands byte-identical on rerun";
}

std::string summarize(const Verdict& v, const std::string& detail) {
    if (v.pass) return detail;
    std::string out;
    for (std::size_t i = 0; i < v.notes.size() && i < 4; ++i) out += (i ? "; " : "") + v.notes[i];
    if (v.notes.size() > 4) out += "; +" + std::to_string(v.notes.size() - 4) + " more";
    return out;
}

}  // namespace

int main() {
    const unsigned workers = worker_count();
    int failures = 0;
    auto report = [&](int id, const std::string& title, const Verdict& v, const std::string& detail, double secs) {
        if (!v.pass) ++failures;
        // criteria 3-6 share one run; its time goes on the line for 3
        const std::string t = secs < 0 ? "with 3" : std::to_string(static_cast<long>(std::lround(secs))) + "s";
        std::printf("criterion %d %-26s %s  [%s] %s\n", id, title.c_str(), v.pass ? "PASS" : "FAIL", t.c_str(),
                    summarize(v, detail).c_str());
        std::fflush(stdout);
    };
    auto timed = [](const std::function<void()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    std::string detail;
    Verdict v;
    double secs = timed([&] { v = criterion1(detail); });
    report(1, "algebra anchors", v, detail, secs);

    secs = timed([&] { v = criterion2(detail); });
    report(2, "eigenfunction identity", v, detail, secs);

    SuiteRun base;
    secs = timed([&] { base = run_suite(kBase, workers); });
    report(3, "exact Feynman-Kac", base.c3, "9 points within 3 se", secs);
    report(4, "martingale flatness", base.c4, "3 checkpoints within 3 se", -1);
    std::string c5_detail;
    for (const auto& m : base.values)
        if (m.name.rfind("c5", 0) == 0 && m.se > 0) c5_detail += (c5_detail.empty() ? "" : ", ") + m.name.substr(3) + " " + g(m.mean);
    for (const auto& m : base.values)
        if (m.name == "c5 pde grid error") c5_detail += ", grid error bound " + g(m.mean);
    report(5, "PDE/MC cross-oracle", base.c5, c5_detail, -1);
    std::string c6_detail;
    for (const auto& m : base.values)
        if (m.name.find("lambda_hat") != std::string::npos)
            c6_detail += (c6_detail.empty() ? "" : ", ") + m.name.substr(3) + " " + g(m.mean);
    report(6, "decay-rate reproduction", base.c6, c6_detail, -1);

    secs = timed([&] { v = criterion7(workers, detail); });
    report(7, "law equivalence", v, detail, secs);

    detail.clear();
    secs = timed([&] { v = criterion8(workers, detail); });
    report(8, "walk cross-check", v, detail, secs);

    secs = timed([&] {
        const SuiteRun halved = run_suite(kHalved, workers);
        v = Verdict{};
        detail.clear();
        for (const auto* c : {&halved.c3, &halved.c4, &halved.c5, &halved.c6})
            for (const auto& note : c->notes) v.require(false, "halved run: " + note);
        compare_shifts(base, halved, v, detail);
        check_reproducible(v, detail);
    });
    report(9, "robustness", v, detail, secs);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
