#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>

#include "report.hpp"
#include "results.hpp"
#include "slelab/diffusion.hpp"
#include "slelab/exponents.hpp"
#include "slelab/io.hpp"
#include "slelab/loewner.hpp"
#include "slelab/pde.hpp"
#include "slelab/walkers.hpp"

namespace slelab::cli {

namespace {

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    double kappa = 6.0;
    double x0 = 0.5;
    double w1 = 1.0;
    double w2 = 1.0;
    std::optional<double> s;
    std::vector<double> s_grid;
    std::vector<double> logr_grid;
    std::uint64_t samples = 100000;
    unsigned workers = 1;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t first = 0;
    double dt = ChainParams{}.dt;
    double ds_max = SDEParams{}.ds_max;
    double absorb_tol = SDEParams{}.absorb_tol;
    std::size_t nx = PDEGridSpec{}.nx;
    std::size_t ns = PDEGridSpec{}.ns;
    std::string packs = "1,1";
    std::vector<int> radii{4, 8, 16, 32, 64, 128, 256, 512};
    std::size_t population = 10000;
    double fit_from = 16.0;
    std::string out_path;
    std::string format = "csv";
    bool check = false;
    std::string dump_grid;

    std::vector<double> xi_args;
    std::vector<double> xi_tilde_args;
    std::optional<double> eta_arg;
    bool analytic_extension = false;
    bool kappa_given = false;

    std::vector<std::string> files;
};

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
    return out;
}

// Collects --check violations; the command still writes its output first.
struct Checks {
    bool enabled = false;
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (enabled && !ok) failures.push_back(what);
    }
};

class Command {
public:
    Command(const Options& opt, std::ostream& out) : opt_(opt), out_(out) { checks_.enabled = opt.check; }

    Config base_config(const std::string& command) const {
        return {{"command", command}, {"seed", std::to_string(opt_.seed)}, {"workers", std::to_string(opt_.workers)}};
    }

    void emit(const std::string& csv, const nlohmann::ordered_json& json) const {
        if (opt_.out_path.empty()) return;
        write_atomic(opt_.out_path, opt_.format == "json" ? json.dump(2) + "\n" : csv);
    }

    template <class Row>
    void emit_rows(const Config& config, const std::vector<Row>& rows,
                   std::string (*to_csv)(const Config&, const std::vector<Row>&)) const {
        nlohmann::ordered_json doc;
        doc["config"] = config_json(config);
        doc["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) doc["rows"].push_back(to_json(r));
        emit(to_csv(config, rows), doc);
    }

    std::vector<double> s_targets(double fallback) const {
        if (!opt_.s_grid.empty()) return opt_.s_grid;
        return {opt_.s.value_or(fallback)};
    }

    SamplePlan plan() const { return {opt_.samples, opt_.first, opt_.workers}; }

    // Decay fit over the rows of one observable; failures are numerical.
    void fit_summary(const std::vector<EstimateRow>& rows, const std::string& label) {
        if (rows.size() < 3 || !(opt_.w1 > 0.0 && opt_.w2 > 0.0)) return;
        std::vector<std::pair<double, MonteCarloEstimate>> points;
        for (const auto& r : rows) points.push_back({r.s, {r.mean, r.std_error, r.n, {}}});
        const double lambda = lambda_kappa({opt_.kappa, opt_.w1, opt_.w2});
        DecayFit fit;
        try {
            fit = fit_lambda(points);
        } catch (const std::exception& e) {
            if (opt_.check) throw NumericalFailure(label + " decay fit: " + e.what());
            out_ << label << " decay fit unavailable: " << e.what() << "\n";
            return;
        }
        out_ << label << " lambda_hat = " << g(fit.lambda_hat) << " +/- " << g(fit.ci_halfwidth) << " (predicted "
             << g(lambda) << ")\n";
        checks_.require(std::abs(fit.lambda_hat - lambda) <= kLambdaRel * lambda,
                        label + " lambda_hat " + g(fit.lambda_hat) + " outside 10% of " + g(lambda));
    }

    void lower_bound_check(const EstimateRow& r) {
        if (!(opt_.w1 > 0.0 && opt_.w2 > 0.0)) return;
        const ExponentParams ep{opt_.kappa, opt_.w1, opt_.w2};
        const double bound = std::exp(-lambda_kappa(ep) * r.s) * eigenfunction_G(ep, r.x0);
        out_ << r.method << " " << r.observable << "(x=" << g(r.x0) << ", s=" << g(r.s) << ") = " << g(r.mean)
             << " +/- " << g(r.std_error) << " (n=" << r.n << "); lower bound G(x)exp(-lambda s) = " << g(bound)
             << "\n";
        checks_.require(r.mean + kSigmaBand * r.std_error >= bound,
                        r.observable + " at s=" + g(r.s) + " below the lower bound");
    }

    void exact_check(const EstimateRow& r) {
        out_ << r.method << " " << r.observable << "(x=" << g(r.x0) << ", s=" << g(r.s) << ") = " << g(r.mean)
             << " +/- " << g(r.std_error) << " (n=" << r.n << "); exact " << g(*r.target) << "\n";
        checks_.require(std::abs(r.mean - *r.target) <= kSigmaBand * r.std_error,
                        r.observable + " at s=" + g(r.s) + " more than 3 stderr from " + g(*r.target));
    }

    EstimateRow row(const std::string& method, const std::string& observable, double s,
                    const MonteCarloEstimate& e) const {
        return {method, observable, opt_.kappa, opt_.x0, opt_.w1, opt_.w2, s, e.mean, e.std_error, e.n, opt_.seed,
                opt_.first, std::nullopt};
    }

    int run_exponents();
    int run_sim_loewner();
    int run_sim_diffusion();
    int run_solve_pde();
    int run_eigen_check();
    int run_martingale_check();
    int run_walkers();
    int run_report();

    int finish(std::ostream& err) const {
        if (checks_.failures.empty()) return kExitOk;
        for (const auto& f : checks_.failures) err << "check failed: " << f << "\n";
        return kExitCheckFailed;
    }

private:
    const Options& opt_;
    std::ostream& out_;
    Checks checks_;
};

int Command::run_exponents() {
    if (opt_.xi_args.empty() && opt_.xi_tilde_args.empty() && !opt_.eta_arg && !opt_.kappa_given) {
        throw std::invalid_argument("exponents needs --xi, --xi-tilde, --eta or --kappa");
    }
    struct Line {
        std::string quantity;
        std::string args;
        double value;
        std::string label;
    };
    std::vector<Line> lines;
    auto args_of = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + g(v[i]);
        return s;
    };
    auto cascade_ok = [](const WeightVector& w) {
        for (std::size_t j = 1; j < w.size(); ++j) {
            const auto r = cascade_residual(w, j);
            if (r.xi_tilde >= 1e-12 || (r.xi && *r.xi >= 1e-12)) return false;
        }
        return true;
    };

    if (!opt_.xi_args.empty()) {
        const WeightVector w(opt_.xi_args);
        const double v = xi(w);
        lines.push_back({"xi", args_of(opt_.xi_args), v, xi_closed_form_label(w)});
        checks_.require(std::abs(v - eta(xi_tilde(w))) < 1e-12, "xi differs from eta(xi_tilde)");
        checks_.require(cascade_ok(w), "cascade residual for xi");
    }
    if (!opt_.xi_tilde_args.empty()) {
        const WeightVector w(opt_.xi_tilde_args);
        lines.push_back({"xi_tilde", args_of(opt_.xi_tilde_args), xi_tilde(w), xi_tilde_closed_form_label(w)});
        checks_.require(cascade_ok(w), "cascade residual for xi_tilde");
    }
    if (opt_.eta_arg) {
        const auto domain = opt_.analytic_extension ? EtaDomain::analytic_extension : EtaDomain::proven;
        lines.push_back({"eta", g(*opt_.eta_arg), eta(*opt_.eta_arg, domain), ""});
    }
    if (opt_.kappa_given) {
        const ExponentParams ep{opt_.kappa, opt_.w1, opt_.w2};
        const std::string a = g(opt_.kappa) + "," + g(opt_.w1) + "," + g(opt_.w2);
        const double lambda = lambda_kappa(ep);
        const auto b = boundary_exponents(ep);
        lines.push_back({"lambda", a, lambda, ""});
        lines.push_back({"a1", a, b.a1, ""});
        lines.push_back({"a2", a, b.a2, ""});
        if (opt_.kappa == 6.0) {
            checks_.require(std::abs(lambda - xi_tilde({opt_.w1, 1.0, opt_.w2})) < 1e-12,
                            "lambda_6 differs from xi_tilde(w1,1,w2)");
        }
    }

    std::string csv = csv_line({"quantity", "arguments", "value", "label"});
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& l : lines) {
        out_ << l.quantity << "(" << l.args << ") = " << format_number(l.value);
        if (!l.label.empty()) out_ << "  [" << l.label << "]";
        out_ << "\n";
        csv += csv_line({l.quantity, l.args, format_number(l.value), l.label});
        doc["rows"].push_back({{"quantity", l.quantity}, {"arguments", l.args}, {"value", l.value}, {"label", l.label}});
    }
    emit(csv, doc);
    return kExitOk;
}

int Command::run_sim_loewner() {
    if (!opt_.logr_grid.empty() && (!opt_.s_grid.empty() || opt_.s)) {
        throw std::invalid_argument("use either --logr-grid or --s/--s-grid");
    }
    ChainParams params;
    params.kappa = opt_.kappa;
    params.x0 = opt_.x0;
    params.dt = opt_.dt;
    params.seed = opt_.seed;
    const bool extremal = !opt_.logr_grid.empty();
    if (extremal && std::any_of(opt_.logr_grid.begin(), opt_.logr_grid.end(), [](double v) { return !(v > 0.0); })) {
        throw std::domain_error("log R must be > 0");
    }
    const auto targets = extremal ? opt_.logr_grid : s_targets(1.0);
    const auto estimates = estimate_h1_grid(params, targets, opt_.w1, opt_.w2, plan());

    const std::string observable = extremal ? "H" : "h1";
    std::vector<EstimateRow> rows;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        rows.push_back(row("loewner", observable, targets[i], estimates[i]));
        lower_bound_check(rows.back());
    }
    fit_summary(rows, "loewner " + observable);

    Config config = base_config("sim-loewner");
    config.insert(config.end(), {{"kappa", format_number(opt_.kappa)},
                                 {"x0", format_number(opt_.x0)},
                                 {"w1", format_number(opt_.w1)},
                                 {"w2", format_number(opt_.w2)},
                                 {extremal ? "logr_grid" : "s_grid", join(targets)},
                                 {"samples", std::to_string(opt_.samples)},
                                 {"first", std::to_string(opt_.first)},
                                 {"dt", format_number(params.dt)},
                                 {"gap_step", format_number(params.gap_step)},
                                 {"swallow_tol", format_number(params.swallow_tol)}});
    emit_rows(config, rows, &estimates_csv);
    return kExitOk;
}

int Command::run_sim_diffusion() {
    SDEParams params;
    params.kappa = opt_.kappa;
    params.w1 = opt_.w1;
    params.w2 = opt_.w2;
    params.ds_max = opt_.ds_max;
    params.absorb_tol = opt_.absorb_tol;
    params.seed = opt_.seed;
    const auto targets = s_targets(1.0);
    const auto pairs = estimate_feynman_kac(params, opt_.x0, targets, plan());
    const bool has_g = opt_.w1 > 0.0 && opt_.w2 > 0.0;

    std::vector<EstimateRow> h1_rows, hg_rows;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        h1_rows.push_back(row("sde", "h1", targets[i], pairs[i].h1));
        lower_bound_check(h1_rows.back());
        if (has_g) {
            const ExponentParams ep{opt_.kappa, opt_.w1, opt_.w2};
            hg_rows.push_back(row("sde", "hG", targets[i], pairs[i].hG));
            hg_rows.back().target = std::exp(-lambda_kappa(ep) * targets[i]) * eigenfunction_G(ep, opt_.x0);
            exact_check(hg_rows.back());
        }
    }
    fit_summary(h1_rows, "sde h1");
    fit_summary(hg_rows, "sde hG");

    std::vector<EstimateRow> rows = h1_rows;
    rows.insert(rows.end(), hg_rows.begin(), hg_rows.end());
    Config config = base_config("sim-diffusion");
    config.insert(config.end(), {{"kappa", format_number(opt_.kappa)},
                                 {"x0", format_number(opt_.x0)},
                                 {"w1", format_number(opt_.w1)},
                                 {"w2", format_number(opt_.w2)},
                                 {"s_grid", join(targets)},
                                 {"samples", std::to_string(opt_.samples)},
                                 {"first", std::to_string(opt_.first)},
                                 {"ds_max", format_number(params.ds_max)},
                                 {"absorb_tol", format_number(params.absorb_tol)},
                                 {"step_fraction", format_number(params.step_fraction)}});
    emit_rows(config, rows, &estimates_csv);
    return kExitOk;
}

int Command::run_solve_pde() {
    const auto targets = s_targets(1.0);
    if (std::any_of(targets.begin(), targets.end(), [](double v) { return !(v > 0.0); })) {
        throw std::invalid_argument("s values must be > 0");
    }
    if (!(opt_.x0 > 0.0 && opt_.x0 < 1.0)) throw std::domain_error("x0 must lie in (0, 1)");
    PDEGridSpec spec;
    spec.nx = opt_.nx;
    spec.ns = opt_.ns;
    spec.s_max = *std::max_element(targets.begin(), targets.end());
    const bool has_g = opt_.w1 > 0.0 && opt_.w2 > 0.0;

    const auto h1 = solve_h_pde(opt_.kappa, opt_.w1, opt_.w2, spec, InitialProfile::one);
    std::vector<EstimateRow> rows;
    for (double s : targets) {
        rows.push_back(row("pde", "h1", s, {h1.value(opt_.x0, s), 0.0, 0, {}}));
        rows.back().seed = 0;
        rows.back().first = 0;
        out_ << "pde h1(x=" << g(opt_.x0) << ", s=" << g(s) << ") = " << format_number(rows.back().mean) << "\n";
    }
    if (has_g) {
        const ExponentParams ep{opt_.kappa, opt_.w1, opt_.w2};
        const double lambda = lambda_kappa(ep);
        const auto hg = solve_h_pde(opt_.kappa, opt_.w1, opt_.w2, spec, InitialProfile::eigenfunction);
        for (double s : targets) {
            const double exact = std::exp(-lambda * s) * eigenfunction_G(ep, opt_.x0);
            rows.push_back(row("pde", "hG", s, {hg.value(opt_.x0, s), 0.0, 0, {}}));
            rows.back().seed = 0;
            rows.back().first = 0;
            rows.back().target = exact;
            const double rel = std::abs(rows.back().mean - exact) / exact;
            out_ << "pde hG(x=" << g(opt_.x0) << ", s=" << g(s) << ") = " << format_number(rows.back().mean)
                 << "; exact " << format_number(exact) << " (relative error " << g(rel) << ")\n";
            checks_.require(rel <= kPdeGridRel, "pde hG relative error " + g(rel) + " at s=" + g(s));
        }
    }
    if (!opt_.dump_grid.empty()) {
        std::string csv = csv_line({"s", "x", "h1"});
        for (std::size_t k = 0; k <= h1.ns(); ++k) {
            for (std::size_t i = 0; i < h1.nx(); ++i) {
                csv += csv_line({format_number(h1.s(k)), format_number(h1.x(i)), format_number(h1.at(i, k))});
            }
        }
        write_atomic(opt_.dump_grid, csv);
    }

    Config config = {{"command", "solve-pde"},
                     {"kappa", format_number(opt_.kappa)},
                     {"x0", format_number(opt_.x0)},
                     {"w1", format_number(opt_.w1)},
                     {"w2", format_number(opt_.w2)},
                     {"s_grid", join(targets)},
                     {"nx", std::to_string(spec.nx)},
                     {"ns", std::to_string(spec.ns)},
                     {"s_max", format_number(spec.s_max)}};
    emit_rows(config, rows, &estimates_csv);
    return kExitOk;
}

int Command::run_eigen_check() {
    std::vector<double> xs;
    for (int i = 0; i < 97; ++i) xs.push_back(0.02 + 0.96 * i / 96.0);
    const double residual = eigen_residual(opt_.kappa, opt_.w1, opt_.w2, xs);
    const double lambda = lambda_kappa({opt_.kappa, opt_.w1, opt_.w2});
    out_ << "eigen residual (kappa=" << g(opt_.kappa) << ", w=(" << g(opt_.w1) << "," << g(opt_.w2)
         << "), lambda=" << format_number(lambda) << ", 97 points) = " << g(residual) << "\n";
    checks_.require(residual < kEigenTolerance, "eigen residual " + g(residual));
    const std::vector<EigenRow> rows{{opt_.kappa, opt_.w1, opt_.w2, xs.size(), residual}};
    Config config = {{"command", "eigen-check"},
                     {"kappa", format_number(opt_.kappa)},
                     {"w1", format_number(opt_.w1)},
                     {"w2", format_number(opt_.w2)}};
    emit_rows(config, rows, &eigen_csv);
    return kExitOk;
}

int Command::run_martingale_check() {
    SDEParams params;
    params.kappa = opt_.kappa;
    params.w1 = opt_.w1;
    params.w2 = opt_.w2;
    params.ds_max = opt_.ds_max;
    params.absorb_tol = opt_.absorb_tol;
    params.seed = opt_.seed;
    const double s0 = opt_.s.value_or(1.0);
    const auto checkpoints =
        opt_.s_grid.empty() ? std::vector<double>{0.25 * s0, 0.5 * s0, 0.75 * s0} : opt_.s_grid;
    const auto estimates = martingale_check(params, opt_.x0, s0, checkpoints, plan());
    const ExponentParams ep{opt_.kappa, opt_.w1, opt_.w2};
    const double target = std::exp(-lambda_kappa(ep) * s0) * eigenfunction_G(ep, opt_.x0);

    std::vector<EstimateRow> rows;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        rows.push_back(row("sde", "Q", checkpoints[i], estimates[i]));
        rows.back().target = target;
        exact_check(rows.back());
    }
    Config config = base_config("martingale-check");
    config.insert(config.end(), {{"kappa", format_number(opt_.kappa)},
                                 {"x0", format_number(opt_.x0)},
                                 {"w1", format_number(opt_.w1)},
                                 {"w2", format_number(opt_.w2)},
                                 {"s0", format_number(s0)},
                                 {"checkpoints", join(checkpoints)},
                                 {"samples", std::to_string(opt_.samples)},
                                 {"first", std::to_string(opt_.first)},
                                 {"ds_max", format_number(params.ds_max)},
                                 {"absorb_tol", format_number(params.absorb_tol)}});
    emit_rows(config, rows, &estimates_csv);
    return kExitOk;
}

int Command::run_walkers() {
    WalkPairConfig config;
    try {
        config.pack_sizes = parse_packs(opt_.packs);
    } catch (const SchemaError& e) {
        throw std::invalid_argument(e.what());
    }
    config.radius_levels = opt_.radii;
    config.population = opt_.population;
    config.seed = opt_.seed;
    config.workers = opt_.workers;
    const auto run = splitting_estimate(config);

    std::vector<WalkerRow> rows;
    for (std::size_t i = 0; i < run.radii.size(); ++i) {
        rows.push_back({opt_.packs, static_cast<double>(run.radii[i]), run.estimates[i], run.log_ci[i],
                        run.population[i], opt_.seed});
        out_ << "walkers packs=(" << opt_.packs << ") R=" << run.radii[i] << ": P = " << g(run.estimates[i])
             << " (log CI +/- " << g(run.log_ci[i]) << ", survival " << g(run.survival_fractions[i]) << ")\n";
    }
    std::vector<double> weights(config.pack_sizes.begin(), config.pack_sizes.end());
    const double predicted = xi_tilde(WeightVector(weights));
    const auto window = radius_estimates(run, opt_.fit_from);
    if (window.size() >= 3) {
        DecayFit fit;
        try {
            fit = fit_xi_tilde(window);
        } catch (const std::exception& e) {
            throw NumericalFailure(std::string("walker exponent fit: ") + e.what());
        }
        out_ << "walkers packs=(" << opt_.packs << ") exponent = " << g(fit.lambda_hat) << " +/- "
             << g(fit.ci_halfwidth) << " (predicted xi_tilde = " << g(predicted) << ")\n";
        const double tol = walker_tolerance(config.pack_sizes);
        checks_.require(std::abs(fit.lambda_hat - predicted) <= tol * predicted,
                        "walker exponent " + g(fit.lambda_hat) + " outside tolerance of " + g(predicted));
    } else {
        checks_.require(false, "fewer than 3 radii >= " + g(opt_.fit_from) + " to fit");
    }

    std::string radii;
    for (std::size_t i = 0; i < opt_.radii.size(); ++i) radii += (i ? "," : "") + std::to_string(opt_.radii[i]);
    Config cfg = base_config("walkers");
    cfg.insert(cfg.end(), {{"packs", opt_.packs},
                           {"radii", radii},
                           {"population", std::to_string(opt_.population)},
                           {"start_separation", std::to_string(config.start_separation)},
                           {"fit_from", format_number(opt_.fit_from)}});
    emit_rows(cfg, rows, &walkers_csv);
    return kExitOk;
}

int Command::run_report() {
    ParsedFile all;
    for (const auto& path : opt_.files) {
        std::string text;
        try {
            text = read_file(path);
        } catch (const std::exception& e) {
            throw std::invalid_argument(e.what());
        }
        auto parsed = parse_result_file(text);
        all.estimates.insert(all.estimates.end(), parsed.estimates.begin(), parsed.estimates.end());
        all.walkers.insert(all.walkers.end(), parsed.walkers.begin(), parsed.walkers.end());
        all.eigen.insert(all.eigen.end(), parsed.eigen.begin(), parsed.eigen.end());
    }
    const auto rows = build_report(all);
    out_ << report_markdown(rows);
    for (const auto& r : rows) checks_.require(r.pass, r.quantity);
    if (!opt_.out_path.empty()) {
        write_atomic(opt_.out_path, opt_.format == "json" ? report_json(rows) : report_csv(rows));
    }
    return kExitOk;
}

unsigned threads_from_env(unsigned fallback) {
    const char* env = std::getenv("SLE_LAB_THREADS");
    if (!env || !*env) return fallback;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw std::invalid_argument("SLE_LAB_THREADS must be an integer >= 1");
    return static_cast<unsigned>(v);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Intersection-exponent lab: closed forms, Loewner and diffusion Monte Carlo, PDE oracles, walks",
                 "sle-lab"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--kappa", opt.kappa, "SLE parameter")->check(CLI::PositiveNumber);
        sub->add_option("--w1", opt.w1, "weight at 0");
        sub->add_option("--w2", opt.w2, "weight at 1");
    };
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--x0", opt.x0, "start point in (0, 1)");
        sub->add_option("--samples", opt.samples, "number of Monte Carlo samples")->check(CLI::PositiveNumber);
        sub->add_option("--workers", opt.workers, "threads (SLE_LAB_THREADS overrides)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "64-bit seed");
        sub->add_option("--first", opt.first, "index of the first sample (for split runs)");
    };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out_path, "result file (written atomically)");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--check", opt.check, "exit 4 when an acceptance threshold is violated");
    };
    auto add_s = [&](CLI::App* sub) {
        sub->add_option("--s", opt.s, "single s value");
        sub->add_option("--s-grid", opt.s_grid, "increasing s values")->delimiter(',');
    };

    auto* exponents = app.add_subcommand("exponents", "closed-form exponents");
    exponents->add_option("--xi", opt.xi_args, "full-plane exponent of the weights")->delimiter(',');
    exponents->add_option("--xi-tilde", opt.xi_tilde_args, "half-plane exponent of the weights")->delimiter(',');
    exponents->add_option("--eta", opt.eta_arg, "eta(x)");
    exponents->add_flag("--analytic-extension", opt.analytic_extension, "let --eta accept x >= 1");
    auto* kappa_opt = exponents->add_option("--kappa", opt.kappa, "also print lambda, a1, a2");
    exponents->add_option("--w1", opt.w1);
    exponents->add_option("--w2", opt.w2);
    add_output(exponents);

    auto* loewner = app.add_subcommand("sim-loewner", "Loewner-chain estimate of h1 or H");
    add_model(loewner);
    add_mc(loewner);
    add_s(loewner);
    loewner->add_option("--logr-grid", opt.logr_grid, "log R values (observable H)")->delimiter(',');
    loewner->add_option("--dt", opt.dt, "base capacity step, in units of (g1-g0)^2");
    add_output(loewner);

    auto* diffusion = app.add_subcommand("sim-diffusion", "SDE estimates of h1 and hG");
    add_model(diffusion);
    add_mc(diffusion);
    add_s(diffusion);
    diffusion->add_option("--ds-max", opt.ds_max, "largest SDE step");
    diffusion->add_option("--absorb-tol", opt.absorb_tol, "absorption distance from {0, 1}");
    add_output(diffusion);

    auto* pde = app.add_subcommand("solve-pde", "Crank-Nicolson solve for h1 and hG");
    add_model(pde);
    add_s(pde);
    pde->add_option("--x0", opt.x0, "point at which to report h");
    pde->add_option("--nx", opt.nx, "spatial nodes")->check(CLI::Range(16, 1 << 16));
    pde->add_option("--ns", opt.ns, "time steps up to the largest s")->check(CLI::Range(16, 1 << 20));
    pde->add_option("--dump-grid", opt.dump_grid, "write the full h1 grid as CSV");
    add_output(pde);

    auto* eigen = app.add_subcommand("eigen-check", "residual of the closed-form eigenpair");
    add_model(eigen);
    add_output(eigen);

    auto* martingale = app.add_subcommand("martingale-check", "checkpoint means of Q_s (s0 = --s)");
    add_model(martingale);
    add_mc(martingale);
    add_s(martingale);
    martingale->add_option("--ds-max", opt.ds_max, "largest SDE step");
    martingale->add_option("--absorb-tol", opt.absorb_tol, "absorption distance from {0, 1}");
    add_output(martingale);

    auto* walkers = app.add_subcommand("walkers", "half-plane walk exponent by multilevel splitting");
    walkers->add_option("--packs", opt.packs, "pack sizes, e.g. 1,1");
    walkers->add_option("--radii", opt.radii, "radius levels, each at least double the previous")->delimiter(',');
    walkers->add_option("--population", opt.population, "walk tuples per level")->check(CLI::PositiveNumber);
    walkers->add_option("--workers", opt.workers, "threads (SLE_LAB_THREADS overrides)")->check(CLI::PositiveNumber);
    walkers->add_option("--seed", opt.seed, "64-bit seed");
    walkers->add_option("--fit-from", opt.fit_from, "smallest radius in the exponent fit");
    add_output(walkers);

    auto* report = app.add_subcommand("report", "merge result files and tabulate pass/fail");
    report->add_option("files", opt.files, "result files (CSV or JSON)");
    report->add_option("--out", opt.out_path, "table file (written atomically)");
    report->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    report->add_flag("--check", opt.check, "exit 4 when any row fails");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        opt.kappa_given = kappa_opt->count() > 0;
        opt.workers = threads_from_env(opt.workers);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadArgs;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadArgs;
    }

    Command cmd(opt, out);
    try {
        int code = kExitOk;
        if (exponents->parsed()) code = cmd.run_exponents();
        if (loewner->parsed()) code = cmd.run_sim_loewner();
        if (diffusion->parsed()) code = cmd.run_sim_diffusion();
        if (pde->parsed()) code = cmd.run_solve_pde();
        if (eigen->parsed()) code = cmd.run_eigen_check();
        if (martingale->parsed()) code = cmd.run_martingale_check();
        if (walkers->parsed()) code = cmd.run_walkers();
        if (report->parsed()) code = cmd.run_report();
        return code != kExitOk ? code : cmd.finish(err);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const PdeInstability& e) {
        err << "numerical failure: " << e.what() << " (ds/dx^2 = " << e.step_ratio() << ")\n";
        return kExitNumerical;
    } catch (const ExtinctionError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::logic_error& e) {  // invalid_argument, domain_error, out_of_range
        err << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace slelab::cli
