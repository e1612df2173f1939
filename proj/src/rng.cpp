#include "coblock/rng.hpp"

#include <cmath>

namespace coblock {

double SplitRng::next_gaussian() {
    // Box-Muller; u1 shifted away from 0 so the log is finite.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace coblock
