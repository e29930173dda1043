#pragma once

#include "holodisc/grid.hpp"

#include <functional>
#include <random>
#include <vector>

namespace holodisc::testing {

/// Smooth non-holomorphic function of (z, conj z) with random coefficients.
inline std::function<cplx(cplx)> smooth_function(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> c(8);
    for (auto& x : c) x = cplx(normal(rng), normal(rng));
    return [c](cplx z) {
        const cplx zb = std::conj(z);
        return c[0] + c[1] * z + c[2] * zb + c[3] * z * zb + c[4] * z * z + c[5] * zb * zb +
               c[6] * std::exp(0.5 * z * zb) + c[7] * std::sin(z + zb);
    };
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    CVector v(n);
    for (auto& x : v) x = cplx(normal(rng), normal(rng));
    return v;
}

}  // namespace holodisc::testing
