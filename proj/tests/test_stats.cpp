#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "slelab/io.hpp"
#include "slelab/parallel.hpp"
#include "slelab/rng.hpp"
#include "slelab/stats.hpp"

using namespace slelab;

TEST_SUITE("rng") {

TEST_CASE("Philox4x32-10 known answers") {
    using B = Philox4x32::Block;
    CHECK(Philox4x32::apply({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::apply({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::apply({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    StreamRng a(42, stream_id(1, 7)), b(42, stream_id(1, 7)), c(42, stream_id(1, 8)), d(43, stream_id(1, 7));
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
        CHECK(x != d.next_u64());
    }
    CHECK(stream_id(1, 5) != stream_id(2, 5));
}

TEST_CASE("uniform and normal moments") {
    StreamRng rng(1, 0);
    RunningStats u, z, z2;
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double v = rng.uniform();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        u.add(v);
        const double n = rng.normal();
        z.add(n);
        z2.add(n * n);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(u.mean() - 0.5) < 5 * std::sqrt(1.0 / 12.0 / 200000));
    CHECK(std::abs(z.mean()) < 5 / std::sqrt(200000.0));
    CHECK(std::abs(z2.mean() - 1.0) < 5 * std::sqrt(2.0 / 200000));
}

}

TEST_SUITE("stats") {

TEST_CASE("running statistics") {
    RunningStats s;
    for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
    CHECK(s.mean() == doctest::Approx(2.5));
    CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
    const auto e = s.estimate("tag");
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(e.n == 4);
    CHECK(e.seed_range == "tag");
    CHECK(RunningStats{}.variance() == 0.0);
}

TEST_CASE("merging sufficient statistics is associative") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd(3.0, 2.0);
    std::vector<double> xs(3000);
    for (auto& x : xs) x = nd(gen);
    RunningStats all, a, b, c;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 1000 ? a : i < 1700 ? b : c).add(xs[i]);
    }
    RunningStats left = a, right = b;
    left.merge(b);
    left.merge(c);
    right.merge(c);
    RunningStats r2 = a;
    r2.merge(right);
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-13));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    CHECK(r2.variance() == doctest::Approx(left.variance()).epsilon(1e-12));

    const auto m = merge_estimates(a.estimate(), b.estimate());
    RunningStats ab = a;
    ab.merge(b);
    CHECK(m.mean == doctest::Approx(ab.mean()).epsilon(1e-13));
    CHECK(m.std_error == doctest::Approx(ab.estimate().std_error).epsilon(1e-12));
    CHECK(m.n == 1700);
    const auto back = RunningStats::from_estimate(a.estimate());
    CHECK(back.variance() == doctest::Approx(a.variance()).epsilon(1e-12));
}

TEST_CASE("weighted line fit") {
    const std::vector<double> xs{0, 1, 2, 3}, ys{1, 3, 5, 7}, sig{0.1, 0.2, 0.1, 0.3};
    const auto f = weighted_line_fit(xs, ys, sig);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_se > 0.0);
}

TEST_CASE("decay fit on synthetic data") {
    std::vector<std::pair<double, MonteCarloEstimate>> exact;
    for (double s : {0.5, 1.0, 1.5, 2.0}) exact.push_back({s, {std::exp(-7 * s), 0.0, 1000, {}}});
    const auto f = fit_lambda(exact);
    CHECK(f.lambda_hat == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(f.ci_halfwidth < 1e-10);

    std::mt19937_64 gen(9);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<std::pair<double, MonteCarloEstimate>> noisy;
    for (double s = 0.5; s <= 3.01; s += 0.25) {
        const double m = 0.3 * std::exp(-2.5 * s);
        noisy.push_back({s, {m * (1.0 + noise(gen)), 0.01 * m, 1000, {}}});
    }
    const auto g = fit_lambda(noisy);
    CHECK(std::abs(g.lambda_hat - 2.5) < g.ci_halfwidth * 1.5 + 1e-3);
    CHECK(g.ci_halfwidth > 0.0);
    CHECK(g.s_grid.size() == noisy.size());

    std::vector<std::pair<double, MonteCarloEstimate>> two{{1, {1, 0, 1, {}}}, {2, {0.5, 0, 1, {}}}};
    CHECK_THROWS_AS(fit_lambda(two), std::invalid_argument);
    std::vector<std::pair<double, MonteCarloEstimate>> drowned{
        {1, {1, 0.01, 1, {}}}, {2, {0.1, 0.01, 1, {}}}, {3, {0.01, 0.006, 1, {}}}};
    CHECK_THROWS_AS(fit_lambda(drowned), std::domain_error);
}

TEST_CASE("Kolmogorov-Smirnov") {
    CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_statistic({1, 2}, {3, 4}) == 1.0);
    CHECK(ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
    // c(0.01) = sqrt(-ln(0.005) / 2)
    CHECK(ks_critical_value(10000, 10000) == doctest::Approx(1.62762 * std::sqrt(2.0 / 10000)).epsilon(1e-4));

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> a(5000), b(5000), c(5000);
    for (auto& v : a) v = u(gen);
    for (auto& v : b) v = u(gen);
    for (auto& v : c) v = std::sqrt(u(gen));
    CHECK(ks_statistic(a, b) < ks_critical_value(5000, 5000));
    CHECK(ks_statistic(a, c) > ks_critical_value(5000, 5000));
}

TEST_CASE("partitioned runs cover the range in worker order") {
    const auto parts = run_partitioned(10, 103, 4, [](WorkRange r) { return std::make_pair(r.begin, r.end); });
    REQUIRE(parts.size() == 4);
    CHECK(parts.front().first == 10);
    CHECK(parts.back().second == 113);
    for (std::size_t i = 1; i < parts.size(); ++i) CHECK(parts[i].first == parts[i - 1].second);
    CHECK(run_partitioned(0, 2, 8, [](WorkRange) { return 1; }).size() == 2);
    CHECK_THROWS_AS(run_partitioned(0, 10, 2,
                                    [](WorkRange r) -> int {
                                        if (r.worker == 1) throw std::runtime_error("boom");
                                        return 0;
                                    }),
                    std::runtime_error);
}

}

TEST_SUITE("io") {

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_number(2.2795e-4) == "0.00022795");
    CHECK(format_number(INFINITY) == "inf");
}

TEST_CASE("CSV quoting round trip") {
    const std::vector<std::string> fields{"plain", "a,b", "say \"hi\"", "two\nlines", ""};
    const auto line = csv_line(fields);
    CHECK(line == "plain,\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\",\r\n");
    const auto rows = parse_csv("# comment\r\n" + line + "x,y\r\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == fields);
    CHECK(rows[1] == std::vector<std::string>{"x", "y"});
    CHECK_THROWS(parse_csv("\"open"));
}

TEST_CASE("atomic writes leave no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "slelab_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.csv";
    write_atomic(path, "first");
    write_atomic(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
    std::filesystem::remove_all(dir);
    CHECK_THROWS(read_file(dir / "missing"));
}

}
