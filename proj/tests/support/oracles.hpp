// Brute-force oracles kept independent of the library implementations.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "sds/geometry.hpp"

namespace sds_test {

/// Minimal accumulated DTW cost by exhaustive enumeration of every
/// monotone warping path (match / insert / delete steps).
inline double brute_force_dtw(std::size_t n, std::size_t m,
                              const std::function<double(std::size_t, std::size_t)>& cost) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i,
                                                                     std::size_t j,
                                                                     double acc) {
        acc += cost(i, j);
        if (acc >= best) return;
        if (i == n - 1 && j == m - 1) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
        if (i + 1 < n) walk(i + 1, j, acc);
        if (j + 1 < m) walk(i, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

/// Independent StS oracle: branchy clipping, then the subtract-the-sum
/// formula.
inline double sts_oracle(double com_dist, double omega_mag) {
    double a = com_dist;
    if (a < 0.0) a = 0.0;
    if (a > 1.0) a = 1.0;
    double b = omega_mag;
    if (b < 0.0) b = 0.0;
    if (b > 1.0) b = 1.0;
    return 2.0 - (a + b);
}

/// Random rigid transform in angle/translation form.
struct RigidSample {
    double angle;
    sds::Vec2 translation;
};

inline RigidSample random_rigid(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    return {ang(rng), {off(rng), off(rng)}};
}

inline std::vector<sds::Vec2> random_cloud(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<sds::Vec2> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pts.push_back({coord(rng), coord(rng)});
    return pts;
}

inline std::vector<sds::Vec2> apply_rigid(const std::vector<sds::Vec2>& pts,
                                          const RigidSample& rt) {
    std::vector<sds::Vec2> out;
    out.reserve(pts.size());
    const double c = std::cos(rt.angle), s = std::sin(rt.angle);
    for (const auto& p : pts)
        out.push_back({c * p.x - s * p.y + rt.translation.x,
                       s * p.x + c * p.y + rt.translation.y});
    return out;
}

}  // namespace sds_test
