#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace cdxou::detail {

// Static round-robin partition; the body must be pure per index so results
// do not depend on the thread count.
inline void parallel_over(int count, unsigned n_threads, const std::function<void(int)>& body) {
    unsigned hw = n_threads ? n_threads : std::max(1u, std::thread::hardware_concurrency());
    hw = std::min<unsigned>(hw, static_cast<unsigned>(std::max(count, 1)));
    if (hw <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < hw; ++t)
        pool.emplace_back([&, t] {
            for (int i = static_cast<int>(t); i < count; i += static_cast<int>(hw)) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace cdxou::detail
