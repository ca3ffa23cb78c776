#pragma once

#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "sds/errors.hpp"
#include "sds/geometry.hpp"
#include "sds/keypoints.hpp"

namespace sds {

struct DtwResult {
    double accumulated = 0.0;  // minimal path cost
    double normalized = 0.0;   // accumulated / (n + m)
};

/// Classic dynamic time warping with the symmetric match/insert/delete
/// step pattern over an arbitrary frame-cost function.
inline DtwResult dtw_core(std::size_t n, std::size_t m,
                          const std::function<double(std::size_t, std::size_t)>& cost) {
    require(n > 0 && m > 0, Errc::InvalidInput, "DTW needs non-empty sequences");
    std::vector<double> prev(m), cur(m);
    for (std::size_t j = 0; j < m; ++j)
        prev[j] = cost(0, j) + (j > 0 ? prev[j - 1] : 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        cur[0] = cost(i, 0) + prev[0];
        for (std::size_t j = 1; j < m; ++j)
            cur[j] = cost(i, j) + std::min({prev[j], prev[j - 1], cur[j - 1]});
        std::swap(prev, cur);
    }
    DtwResult result;
    result.accumulated = prev[m - 1];
    result.normalized = result.accumulated / static_cast<double>(n + m);
    return result;
}

namespace detail {

inline double frame_cost(const KeypointFrame& a, const KeypointFrame& b,
                         const std::set<std::string>& shared) {
    double sum = 0.0;
    int count = 0;
    for (const auto& name : shared) {
        const auto ia = a.points.find(name);
        const auto ib = b.points.find(name);
        if (ia == a.points.end() || ib == b.points.end()) continue;
        sum += Vec2{ib->second.x - ia->second.x, ib->second.y - ia->second.y}.norm();
        ++count;
    }
    return count > 0 ? sum / count : 0.0;
}

}  // namespace detail

/// Trajectory distance in normalized image coordinates: frame cost is the
/// mean Euclidean distance over the shared keypoint names, warped over the
/// classic DTW lattice, normalized by n + m.
inline DtwResult dtw_distance(const KeypointTrajectory& a, const KeypointTrajectory& b) {
    require(!a.frames.empty() && !b.frames.empty(), Errc::InvalidInput,
            "DTW needs non-empty trajectories");
    std::set<std::string> shared;
    for (const auto& name : a.skeleton)
        if (b.skeleton.count(name)) shared.insert(name);
    require(!shared.empty(), Errc::NoCommonKeypoints,
            "trajectories share no skeleton joints");
    return dtw_core(a.frames.size(), b.frames.size(), [&](std::size_t i, std::size_t j) {
        return detail::frame_cost(a.frames[i], b.frames[j], shared);
    });
}

/// Centered moving average; edge windows truncate, output length matches
/// the input.
inline std::vector<double> moving_average(const std::vector<double>& signal, int window) {
    require(window >= 1, Errc::InvalidWindow, "window must be >= 1");
    const int n = static_cast<int>(signal.size());
    const int left = (window - 1) / 2;
    const int right = window / 2;
    std::vector<double> out(signal.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - left);
        const int hi = std::min(n - 1, i + right);
        double sum = 0.0;
        for (int k = lo; k <= hi; ++k) sum += signal[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = sum / (hi - lo + 1);
    }
    return out;
}

/// Stability-to-Speed score: 2 - [clip(CoM distance, 0, 1) + clip(|w|, 0, 1)].
inline double sts_score(double com_dist, double omega_mag) {
    require(std::isfinite(com_dist) && std::isfinite(omega_mag), Errc::InvalidInput,
            "StS needs finite inputs");
    require(com_dist >= 0.0 && omega_mag >= 0.0, Errc::InvalidInput,
            "StS inputs are magnitudes and cannot be negative");
    const double a = std::clamp(com_dist, 0.0, 1.0);
    const double b = std::clamp(omega_mag, 0.0, 1.0);
    return 2.0 - (a + b);
}

}  // namespace sds
