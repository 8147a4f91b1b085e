#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace slelab {

/// Contiguous range [begin, end) owned by one worker.
struct WorkRange {
    unsigned worker = 0;
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
};

/// Splits [first, first + n) into `workers` contiguous ranges and runs
/// fn(range) on each, one thread per range. Results come back in worker
/// order so merging them is deterministic for a fixed worker count.
template <class Fn>
auto run_partitioned(std::uint64_t first, std::uint64_t n, unsigned workers, Fn fn) {
    using Result = decltype(fn(WorkRange{}));
    workers = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1))));

    std::vector<WorkRange> ranges(workers);
    for (unsigned w = 0; w < workers; ++w) {
        ranges[w] = {w, first + n * w / workers, first + n * (w + 1) / workers};
    }

    std::vector<Result> results(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto body = [&](unsigned w) {
        try {
            results[w] = fn(ranges[w]);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(body, w);
    body(0);
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace slelab
