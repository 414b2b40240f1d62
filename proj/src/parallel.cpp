#include "noisent/parallel.hpp"

#include <cstdlib>
#include <string>

namespace noisent {

int default_parallelism() {
    if (const char* env = std::getenv("NOISENT_THREADS"); env != nullptr && *env != '\0') {
        try {
            const int n = std::stoi(env);
            if (n >= 1) {
                return n;
            }
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace noisent
