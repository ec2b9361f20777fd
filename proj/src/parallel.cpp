#include "arrayhd/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace arrayhd {

int resolve_threads(int requested) {
    int threads = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) {
        threads = 1;
    }
    if (const char* cap_env = std::getenv("ARRAYHD_THREADS")) {
        try {
            int cap = std::stoi(cap_env);
            if (cap >= 1) {
                threads = std::min(threads, cap);
            }
        } catch (...) {
            // unparsable cap: ignore
        }
    }
    return threads;
}

}  // namespace arrayhd
