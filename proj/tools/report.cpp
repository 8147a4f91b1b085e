#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "slelab/exponents.hpp"
#include "slelab/io.hpp"
#include "slelab/stats.hpp"
#include "slelab/walkers.hpp"

namespace slelab::cli {

namespace {

using Key = std::tuple<std::string, std::string, double, double, double, double, double>;

Key key_of(const EstimateRow& r) { return {r.method, r.observable, r.kappa, r.x0, r.w1, r.w2, r.s}; }

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string describe(const EstimateRow& r, bool with_s = true) {
    std::string out = r.observable + " " + r.method + " kappa=" + g(r.kappa) + " w=(" + g(r.w1) + "," + g(r.w2) +
                      ") x=" + g(r.x0);
    if (with_s) out += (r.observable == "H" ? " logR=" : " s=") + g(r.s);
    return out;
}

bool has_closed_form(const EstimateRow& r) { return r.kappa > 0.0 && r.w1 > 0.0 && r.w2 > 0.0; }

double closed_form(const EstimateRow& r, double s) {
    const ExponentParams ep{r.kappa, r.w1, r.w2};
    return std::exp(-lambda_kappa(ep) * s) * eigenfunction_G(ep, r.x0);
}

void point_rows(const EstimateRow& r, std::vector<ReportRow>& out) {
    if (r.observable == "hG" || r.observable == "Q") {
        if (!r.target && !has_closed_form(r)) return;
        const double target = r.target ? *r.target : closed_form(r, r.s);
        const double band = r.method == "pde" ? kPdeGridRel * std::abs(target) : kSigmaBand * r.std_error;
        out.push_back({describe(r), target, r.mean, band, std::abs(r.mean - target) <= band});
    } else if ((r.observable == "h1" || r.observable == "H") && has_closed_form(r)) {
        // lower bound G(x) exp(-lambda s) <= h_1
        const double bound = closed_form(r, r.s);
        const double slack = r.method == "pde" ? kPdeGridRel * bound : kSigmaBand * r.std_error;
        out.push_back({describe(r) + " lower bound", bound, r.mean, slack, r.mean + slack >= bound});
    }
}

void cross_rows(const std::vector<EstimateRow>& rows, std::vector<ReportRow>& out) {
    std::map<Key, const EstimateRow*> by_key;
    for (const auto& r : rows) by_key[key_of(r)] = &r;
    auto find = [&](const EstimateRow& r, const char* method) -> const EstimateRow* {
        Key k = key_of(r);
        std::get<0>(k) = method;
        std::get<1>(k) = "h1";
        auto it = by_key.find(k);
        return it == by_key.end() ? nullptr : it->second;
    };
    for (const auto& r : rows) {
        if (r.observable != "h1" || r.method == "pde") continue;
        if (const auto* pde = find(r, "pde")) {
            const double band = kSigmaBand * r.std_error + kPdeGridRel * std::abs(pde->mean);
            out.push_back({describe(r) + " vs pde", pde->mean, r.mean, band, std::abs(r.mean - pde->mean) <= band});
        }
        if (r.method == "loewner") {
            if (const auto* sde = find(r, "sde")) {
                const double band = kSigmaBand * std::hypot(r.std_error, sde->std_error);
                out.push_back(
                    {describe(r) + " vs sde", sde->mean, r.mean, band, std::abs(r.mean - sde->mean) <= band});
            }
        }
    }
}

void fit_rows(const std::vector<EstimateRow>& rows, std::vector<ReportRow>& out) {
    std::map<std::tuple<std::string, std::string, double, double, double, double>,
             std::vector<std::pair<double, MonteCarloEstimate>>>
        groups;
    std::map<std::tuple<std::string, std::string, double, double, double, double>, const EstimateRow*> sample;
    for (const auto& r : rows) {
        if (r.observable != "h1" && r.observable != "hG" && r.observable != "H") continue;
        if (r.method == "pde" || !has_closed_form(r)) continue;
        const auto k = std::make_tuple(r.method, r.observable, r.kappa, r.x0, r.w1, r.w2);
        groups[k].push_back({r.s, MonteCarloEstimate{r.mean, r.std_error, r.n, {}}});
        sample[k] = &r;
    }
    for (const auto& [k, points] : groups) {
        if (points.size() < 3) continue;
        const auto& r = *sample[k];
        const double lambda = lambda_kappa({r.kappa, r.w1, r.w2});
        const std::string label = "lambda fit " + describe(r, false);
        try {
            const auto fit = fit_lambda(points);
            out.push_back({label, lambda, fit.lambda_hat, fit.ci_halfwidth,
                           std::abs(fit.lambda_hat - lambda) <= kLambdaRel * lambda});
        } catch (const std::exception&) {
            out.push_back({label + " (unresolved)", lambda, std::nan(""), std::nan(""), false});
        }
    }
}

void walker_rows(const std::vector<WalkerRow>& rows, std::vector<ReportRow>& out) {
    std::map<std::pair<std::string, std::uint64_t>, std::vector<RadiusEstimate>> groups;
    for (const auto& r : rows) groups[{r.packs, r.seed}].push_back({r.radius, r.estimate, r.log_ci});
    for (auto& [k, all] : groups) {
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.radius < b.radius; });
        std::vector<RadiusEstimate> window;
        for (const auto& r : all) {
            if (r.radius >= 16.0) window.push_back(r);
        }
        if (window.size() < 3) window = all;
        const auto packs = parse_packs(k.first);
        std::vector<double> weights(packs.begin(), packs.end());
        const double predicted = xi_tilde(WeightVector(weights));
        const std::string label = "xi_tilde walkers packs=(" + k.first + ")";
        try {
            const auto fit = fit_xi_tilde(window);
            out.push_back({label, predicted, fit.lambda_hat, fit.ci_halfwidth,
                           std::abs(fit.lambda_hat - predicted) <= walker_tolerance(packs) * predicted});
        } catch (const std::exception&) {
            out.push_back({label + " (unresolved)", predicted, std::nan(""), std::nan(""), false});
        }
    }
}

}  // namespace

double walker_tolerance(const std::vector<int>& packs) {
    if (packs.size() == 1) return 0.10;
    if (packs.size() == 2 && packs[0] == 1 && packs[1] == 1) return 0.15;
    return 0.20;
}

std::vector<int> parse_packs(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw SchemaError("bad packs field: " + text);
        }
        if (used != item.size() || v < 1) throw SchemaError("bad packs field: " + text);
        out.push_back(v);
    }
    if (out.empty()) throw SchemaError("empty packs field");
    return out;
}

std::vector<EstimateRow> merge_estimate_rows(const std::vector<EstimateRow>& rows) {
    struct Group {
        EstimateRow row;
        RunningStats stats;
        std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> ranges;  // seed, first, end
    };
    std::map<Key, Group> groups;
    for (const auto& r : rows) {
        auto [it, fresh] = groups.try_emplace(key_of(r));
        Group& grp = it->second;
        if (fresh) grp.row = r;
        if (r.n == 0) continue;  // deterministic value: first one wins
        for (const auto& [seed, first, end] : grp.ranges) {
            if (seed == r.seed && r.first < end && first < r.first + r.n) {
                throw SchemaError("overlapping samples for " + describe(r));
            }
        }
        grp.ranges.emplace_back(r.seed, r.first, r.first + r.n);
        grp.stats.merge(RunningStats::from_estimate({r.mean, r.std_error, r.n, {}}));
        grp.row.first = std::min(grp.row.first, r.first);
    }
    std::vector<EstimateRow> out;
    for (auto& [k, grp] : groups) {
        if (grp.stats.count() > 0) {
            const auto e = grp.stats.estimate();
            grp.row.mean = e.mean;
            grp.row.std_error = e.std_error;
            grp.row.n = e.n;
        }
        out.push_back(grp.row);
    }
    return out;
}

std::vector<ReportRow> build_report(const ParsedFile& input) {
    const auto rows = merge_estimate_rows(input.estimates);
    std::vector<ReportRow> out;
    for (const auto& e : input.eigen) {
        out.push_back({"eigen residual kappa=" + g(e.kappa) + " w=(" + g(e.w1) + "," + g(e.w2) + ")", 0.0,
                       e.residual, kEigenTolerance, e.residual < kEigenTolerance});
    }
    for (const auto& r : rows) point_rows(r, out);
    cross_rows(rows, out);
    fit_rows(rows, out);
    walker_rows(input.walkers, out);
    return out;
}

std::string report_markdown(const std::vector<ReportRow>& rows) {
    std::string out = "| quantity | predicted | estimate | CI | pass |\n|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.quantity + " | " + g(r.predicted) + " | " + g(r.estimate) + " | " + g(r.ci) + " | " +
               (r.pass ? "pass" : "FAIL") + " |\n";
    }
    return out;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::string out = csv_line({"quantity", "predicted", "estimate", "ci", "pass"});
    for (const auto& r : rows) {
        out += csv_line({r.quantity, format_number(r.predicted), format_number(r.estimate), format_number(r.ci),
                         r.pass ? "pass" : "fail"});
    }
    return out;
}

std::string report_json(const std::vector<ReportRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["quantity"] = r.quantity;
        row["predicted"] = r.predicted;
        row["estimate"] = std::isfinite(r.estimate) ? nlohmann::ordered_json(r.estimate) : nullptr;
        row["ci"] = std::isfinite(r.ci) ? nlohmann::ordered_json(r.ci) : nullptr;
        row["pass"] = r.pass;
        j.push_back(row);
    }
    return nlohmann::ordered_json{{"rows", j}}.dump(2) + "\n";
}

}  // namespace slelab::cli
