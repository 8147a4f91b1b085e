#include "slelab/walkers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slelab/parallel.hpp"
#include "slelab/rng.hpp"

namespace slelab {

namespace {

constexpr std::uint64_t kWalkTag = 3;
constexpr std::uint64_t kResampleTag = 4;
constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

std::uint64_t level_stream(std::uint64_t tag, std::size_t level, std::uint64_t attempt, std::uint64_t index) {
    return stream_id(tag, (std::uint64_t{level} << 40) ^ (attempt << 32) ^ index);
}

// Per-worker occupancy grids, one per pack. A cell belongs to the current
// tuple iff it holds the current stamp, so grids never need clearing.
class StampGrid {
public:
    StampGrid(int max_radius, std::size_t packs)
        : offset_(max_radius + 1),
          width_(2 * max_radius + 3),
          height_(max_radius + 3),
          cells_(packs, std::vector<std::uint32_t>(static_cast<std::size_t>(width_) * height_, 0)),
          stamps_(packs, 0) {}

    void next_tuple() {
        for (auto& s : stamps_) {
            if (++counter_ == std::numeric_limits<std::uint32_t>::max()) reset();
            s = counter_;
        }
    }

    void mark(std::size_t pack, Site p) { cells_[pack][index(p)] = stamps_[pack]; }
    [[nodiscard]] bool marked(std::size_t pack, Site p) const { return cells_[pack][index(p)] == stamps_[pack]; }

private:
    [[nodiscard]] std::size_t index(Site p) const {
        return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(p.x + offset_);
    }
    void reset() {
        for (auto& c : cells_) std::fill(c.begin(), c.end(), 0);
        counter_ = 1;
    }

    int offset_;
    int width_;
    int height_;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::uint32_t> stamps_;
    std::uint32_t counter_ = 0;
};

// Two random bits per move, 32 moves per 64-bit draw.
class MoveSource {
public:
    explicit MoveSource(StreamRng& rng) : rng_(rng) {}
    unsigned next() {
        if (left_ == 0) {
            bits_ = rng_.next_u64();
            left_ = 32;
        }
        const auto m = static_cast<unsigned>(bits_ & 3u);
        bits_ >>= 2;
        --left_;
        return m;
    }

private:
    StreamRng& rng_;
    std::uint64_t bits_ = 0;
    int left_ = 0;
};

std::vector<std::size_t> pack_of_walk(const WalkPairConfig& config) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < config.pack_sizes.size(); ++p) {
        out.insert(out.end(), static_cast<std::size_t>(config.pack_sizes[p]), p);
    }
    return out;
}

std::int64_t norm2(Site p) { return std::int64_t{p.x} * p.x + std::int64_t{p.y} * p.y; }

std::vector<WalkTuple> resample(std::span<const WalkTuple> parents, std::size_t count, StreamRng& rng) {
    std::vector<WalkTuple> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(parents.size()));
        out.push_back(parents[std::min(pick, parents.size() - 1)]);
    }
    return out;
}

}  // namespace

void WalkPairConfig::validate() const {
    if (pack_sizes.empty()) throw std::invalid_argument("need at least one pack");
    for (int n : pack_sizes) {
        if (n < 1) throw std::invalid_argument("pack sizes must be positive");
    }
    if (pack_sizes.size() >= 2 && start_separation < 2) {
        throw std::invalid_argument("start separation must be >= 2");
    }
    if (radius_levels.empty()) throw std::invalid_argument("need at least one radius level");
    std::int64_t widest = 0;
    for (std::size_t p = 0; p < pack_sizes.size(); ++p) widest = std::max(widest, norm2(start_site(*this, p)));
    if (std::int64_t{radius_levels.front()} * radius_levels.front() <= widest) {
        throw std::invalid_argument("first radius must exceed the start sites");
    }
    for (std::size_t i = 1; i < radius_levels.size(); ++i) {
        if (radius_levels[i] < 2 * radius_levels[i - 1]) {
            throw std::invalid_argument("radius levels must at least double");
        }
    }
    if (radius_levels.back() > 1 << 14) throw std::invalid_argument("radius too large");
    if (population == 0) throw std::invalid_argument("population must be >= 1");
}

std::size_t WalkPairConfig::walk_count() const {
    std::size_t n = 0;
    for (int s : pack_sizes) n += static_cast<std::size_t>(s);
    return n;
}

void MoveSegment::push(unsigned move) {
    if ((size_ & 3) == 0) bytes_.push_back(0);
    bytes_.back() |= static_cast<std::uint8_t>((move & 3u) << ((size_ & 3) * 2));
    ++size_;
}

Site start_site(const WalkPairConfig& config, std::size_t pack) {
    const int k = static_cast<int>(config.pack_sizes.size());
    return {static_cast<int>(pack) * config.start_separation - (k - 1) * config.start_separation / 2, 1};
}

WalkTuple initial_tuple(const WalkPairConfig& config) {
    WalkTuple t;
    for (std::size_t pack : pack_of_walk(config)) t.tips.push_back(start_site(config, pack));
    t.history.resize(t.tips.size());
    return t;
}

LevelOutcome simulate_pack_level(const WalkPairConfig& config, std::span<const WalkTuple> population,
                                 std::size_t level, std::uint64_t attempt) {
    config.validate();
    if (population.empty()) throw std::invalid_argument("population must be nonempty");
    if (level >= config.radius_levels.size()) throw std::out_of_range("level out of range");

    const auto packs_of = pack_of_walk(config);
    const std::size_t packs = config.pack_sizes.size();
    const bool track_sites = packs >= 2;
    const std::int64_t r2 = std::int64_t{config.radius_levels[level]} * config.radius_levels[level];

    auto partial = run_partitioned(0, population.size(), config.workers, [&](WorkRange range) {
        std::vector<WalkTuple> survivors;
        std::unique_ptr<StampGrid> grid;
        if (track_sites) grid = std::make_unique<StampGrid>(config.radius_levels[level], packs);

        for (std::uint64_t i = range.begin; i < range.end; ++i) {
            const WalkTuple& parent = population[i];
            StreamRng rng(config.seed, level_stream(kWalkTag, level, attempt, i));
            MoveSource moves(rng);

            if (track_sites) {
                grid->next_tuple();
                for (std::size_t w = 0; w < packs_of.size(); ++w) {
                    Site p = start_site(config, packs_of[w]);
                    grid->mark(packs_of[w], p);
                    for (const auto& seg : parent.history[w]) {
                        for (std::size_t m = 0; m < seg->size(); ++m) {
                            const unsigned mv = seg->at(m);
                            p.x += kDx[mv];
                            p.y += kDy[mv];
                            grid->mark(packs_of[w], p);
                        }
                    }
                }
            }

            WalkTuple child{parent.tips, parent.history};
            bool alive = true;
            for (std::size_t w = 0; w < packs_of.size() && alive; ++w) {
                const std::size_t pack = packs_of[w];
                auto segment = track_sites ? std::make_shared<MoveSegment>() : nullptr;
                Site p = child.tips[w];
                while (norm2(p) < r2) {
                    const unsigned mv = moves.next();
                    p.x += kDx[mv];
                    p.y += kDy[mv];
                    if (p.y < 1) {
                        alive = false;
                        break;
                    }
                    if (track_sites) {
                        for (std::size_t q = 0; q < packs; ++q) {
                            if (q != pack && grid->marked(q, p)) {
                                alive = false;
                                break;
                            }
                        }
                        if (!alive) break;
                        grid->mark(pack, p);
                        segment->push(mv);
                    }
                }
                child.tips[w] = p;
                if (track_sites) child.history[w].push_back(std::move(segment));
            }
            if (alive) survivors.push_back(std::move(child));
        }
        return survivors;
    });

    LevelOutcome out;
    out.trials = population.size();
    for (auto& part : partial) {
        for (auto& t : part) out.survivors.push_back(std::move(t));
    }
    out.fraction = static_cast<double>(out.survivors.size()) / static_cast<double>(out.trials);
    return out;
}

SplittingRun splitting_estimate(const WalkPairConfig& config) {
    config.validate();
    constexpr std::uint64_t kMaxRetries = 4;

    SplittingRun run;
    std::vector<WalkTuple> parents{initial_tuple(config)};
    double estimate = 1.0;
    double log_var = 0.0;

    for (std::size_t level = 0; level < config.radius_levels.size(); ++level) {
        std::size_t size = config.population;
        LevelOutcome outcome;
        for (std::uint64_t attempt = 0;; ++attempt) {
            StreamRng rng(config.seed, level_stream(kResampleTag, level, attempt, 0));
            const auto population = resample(parents, size, rng);
            outcome = simulate_pack_level(config, population, level, attempt);
            if (!outcome.survivors.empty()) break;
            if (attempt == kMaxRetries) {
                throw ExtinctionError("population died out at radius " + std::to_string(config.radius_levels[level]),
                                      level);
            }
            size *= 2;
        }

        const double p = outcome.fraction;
        estimate *= p;
        log_var += (1.0 - p) / (p * static_cast<double>(outcome.trials));
        run.radii.push_back(config.radius_levels[level]);
        run.population.push_back(outcome.trials);
        run.survival_fractions.push_back(p);
        run.estimates.push_back(estimate);
        run.log_ci.push_back(1.96 * std::sqrt(log_var));
        parents = std::move(outcome.survivors);
    }
    run.estimate = estimate;
    run.log_ci_final = run.log_ci.back();
    return run;
}

std::vector<RadiusEstimate> radius_estimates(const SplittingRun& run, double min_radius) {
    std::vector<RadiusEstimate> out;
    for (std::size_t i = 0; i < run.radii.size(); ++i) {
        if (run.radii[i] >= min_radius) out.push_back({static_cast<double>(run.radii[i]), run.estimates[i], run.log_ci[i]});
    }
    return out;
}

DecayFit fit_xi_tilde(std::span<const RadiusEstimate> runs) {
    if (runs.size() < 3) throw std::invalid_argument("fit_xi_tilde: need >= 3 radii");
    double lo = runs.front().radius, hi = runs.front().radius;
    std::vector<double> xs, ys, sigmas;
    DecayFit out;
    for (const auto& r : runs) {
        if (!(r.radius > 0.0) || !(r.estimate > 0.0)) throw std::domain_error("fit_xi_tilde: estimates must be positive");
        // Same rule as fit_lambda: sd(log estimate) ~ stderr / mean must stay below 1/2.
        if (r.log_ci / 1.96 >= 0.5) {
            throw std::domain_error("fit_xi_tilde: estimate not resolved at radius " + std::to_string(r.radius));
        }
        lo = std::min(lo, r.radius);
        hi = std::max(hi, r.radius);
        xs.push_back(std::log(r.radius));
        ys.push_back(std::log(r.estimate));
        sigmas.push_back(r.log_ci / 1.96);
        out.weights.push_back(r.log_ci > 0.0 ? 1.96 * 1.96 / (r.log_ci * r.log_ci) : 1.0);
    }
    if (hi < 4.0 * lo) throw std::invalid_argument("fit_xi_tilde: radii must span two octaves");
    const auto line = weighted_line_fit(xs, ys, sigmas);
    out.lambda_hat = -line.slope;
    out.intercept = line.intercept;
    out.ci_halfwidth = 1.96 * line.slope_se;
    out.s_grid = std::move(xs);
    out.log_means = std::move(ys);
    return out;
}

}  // namespace slelab
