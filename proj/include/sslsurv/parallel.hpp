#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace sslsurv {

//! Worker count from SSLSURV_WORKERS, else the hardware concurrency.
inline std::size_t worker_count()
{
    if (const char* env = std::getenv("SSLSURV_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

//! Runs body(i) for i in [0, count). Each index must write only its own
//! output slot, so results never depend on the number of workers. If any
//! call throws, the exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t workers = 0)
{
    if (workers == 0) {
        workers = worker_count();
    }
    workers = std::min(workers, count);
    // nested calls run inline on the worker that issued them
    if (workers <= 1 || detail::inside_parallel_region) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_index = count;
    std::exception_ptr failure;
    auto run = [&] {
        const bool was_inside = detail::inside_parallel_region;
        detail::inside_parallel_region = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                detail::inside_parallel_region = was_inside;
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Independent generator for (seed, stream, substream); counter-based so a
//! job's random numbers do not depend on scheduling.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t sub = 0)
{
    const std::uint64_t a = splitmix64(seed ^ splitmix64(stream + 0x51ed27ULL));
    const std::uint64_t b = splitmix64(a ^ splitmix64(sub + 0x2545f491ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace sslsurv
