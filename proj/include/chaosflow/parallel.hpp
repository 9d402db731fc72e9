#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace chaosflow
{

/// Worker count: an explicit positive request wins, then CHAOSFLOW_THREADS,
/// then 1.
int resolve_threads(int requested);

/**
 * Runs task(i) for i in [0, count) on up to `threads` workers with a static
 * interleaved schedule. Tasks write into their own slots, so the result does
 * not depend on the worker count. The first exception (lowest index) is
 * rethrown after all workers finish.
 */
template <class Task>
void parallel_for(std::size_t count, int threads, Task&& task)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t first) {
        for (std::size_t i = first; i < count; i += workers)
        {
            try
            {
                task(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1)
        run(0);
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(run, w);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace chaosflow
