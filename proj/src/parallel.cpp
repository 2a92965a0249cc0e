#include "nlac/parallel.hpp"

#include <algorithm>
#include <cstdlib>

namespace nlac {

int thread_count() {
    if (const char* env = std::getenv("NLAC_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

}  // namespace nlac
