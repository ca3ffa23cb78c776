#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sds/errors.hpp"
#include "sds/geometry.hpp"
#include "sds/keypoints.hpp"

namespace sds {

struct RigidTransform2D {
    double c = 1.0;  // cos(theta)
    double s = 0.0;  // sin(theta)
    Vec2 t;

    Vec2 apply(Vec2 p) const { return {c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y}; }
    double angle() const { return std::atan2(s, c); }
};

namespace detail {

struct Svd2 {
    // h = u * diag(s0, s1) * v^T with u, v rotations (reflections folded
    // into the sign of s1).
    double u[2][2];
    double v[2][2];
    double s0 = 0.0, s1 = 0.0;
};

inline Svd2 svd2x2(double h00, double h01, double h10, double h11) {
    const double e = 0.5 * (h00 + h11);
    const double f = 0.5 * (h00 - h11);
    const double g = 0.5 * (h10 + h01);
    const double h = 0.5 * (h10 - h01);
    const double q = std::hypot(e, h);
    const double r = std::hypot(f, g);
    const double a1 = std::atan2(g, f);
    const double a2 = std::atan2(h, e);
    const double theta = 0.5 * (a1 - a2);  // V angle
    const double phi = 0.5 * (a1 + a2);    // U angle
    Svd2 out;
    out.s0 = q + r;
    out.s1 = q - r;  // may be negative; caller handles the reflection case
    const double cu = std::cos(phi), su = std::sin(phi);
    const double cv = std::cos(theta), sv = std::sin(theta);
    out.u[0][0] = cu; out.u[0][1] = -su; out.u[1][0] = su; out.u[1][1] = cu;
    out.v[0][0] = cv; out.v[0][1] = -sv; out.v[1][0] = sv; out.v[1][1] = cv;
    return out;
}

/// Least-squares rotation+translation taking src onto dst (Kabsch via the
/// 2x2 SVD of the cross-covariance, reflection-corrected).
inline RigidTransform2D fit_rigid(const std::vector<Vec2>& src, const std::vector<Vec2>& dst) {
    const std::size_t n = src.size();
    Vec2 cs{}, cd{};
    for (std::size_t i = 0; i < n; ++i) {
        cs = cs + src[i];
        cd = cd + dst[i];
    }
    cs = cs * (1.0 / n);
    cd = cd * (1.0 / n);

    // h = sum (src - cs)(dst - cd)^T
    double h00 = 0, h01 = 0, h10 = 0, h11 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = src[i] - cs;
        const Vec2 b = dst[i] - cd;
        h00 += a.x * b.x;
        h01 += a.x * b.y;
        h10 += a.y * b.x;
        h11 += a.y * b.y;
    }
    const Svd2 svd = svd2x2(h00, h01, h10, h11);
    // R = V * diag(1, sign) * U^T restricted to det(R) = +1.
    const double sign = svd.s1 >= 0.0 ? 1.0 : -1.0;
    double r00 = svd.v[0][0] * svd.u[0][0] + sign * svd.v[0][1] * svd.u[0][1];
    double r10 = svd.v[1][0] * svd.u[0][0] + sign * svd.v[1][1] * svd.u[0][1];
    RigidTransform2D out;
    const double norm = std::hypot(r00, r10);
    out.c = norm > 0 ? r00 / norm : 1.0;
    out.s = norm > 0 ? r10 / norm : 0.0;
    out.t = {cd.x - (out.c * cs.x - out.s * cs.y), cd.y - (out.s * cs.x + out.c * cs.y)};
    return out;
}

inline std::size_t nearest_index(const std::vector<Vec2>& cloud, Vec2 p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double d = (cloud[i] - p).norm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

struct IcpResult {
    RigidTransform2D transform;
    double residual = 0.0;  // RMS nearest-neighbor distance after alignment
    int iterations = 0;
};

/// Point-to-point rigid 2D ICP on pooled point clouds. Correspondences are
/// nearest neighbors, the update is the SVD-based rigid fit, and a fan of
/// rotation starts guards against orientation-flipped local minima.
inline IcpResult icp_align_points(const std::vector<Vec2>& src, const std::vector<Vec2>& dst,
                                  int max_iterations = 50) {
    require(src.size() >= 3 && dst.size() >= 3, Errc::DegenerateGeometry,
            "ICP needs at least three points per cloud");

    // Collinearity check on the source spread.
    {
        Vec2 c{};
        for (const Vec2& p : src) c = c + p;
        c = c * (1.0 / src.size());
        double xx = 0, xy = 0, yy = 0;
        for (const Vec2& p : src) {
            const Vec2 d = p - c;
            xx += d.x * d.x;
            xy += d.x * d.y;
            yy += d.y * d.y;
        }
        const detail::Svd2 svd = detail::svd2x2(xx, xy, xy, yy);
        require(std::abs(svd.s1) > 1e-12 * std::max(1.0, svd.s0), Errc::DegenerateGeometry,
                "ICP source points are collinear");
    }

    Vec2 cs{}, cd{};
    for (const Vec2& p : src) cs = cs + p;
    for (const Vec2& p : dst) cd = cd + p;
    cs = cs * (1.0 / src.size());
    cd = cd * (1.0 / dst.size());

    IcpResult best;
    best.residual = std::numeric_limits<double>::infinity();

    constexpr int kStarts = 24;
    for (int start = 0; start < kStarts; ++start) {
        const double angle = 2.0 * M_PI * start / kStarts;
        RigidTransform2D transform;
        transform.c = std::cos(angle);
        transform.s = std::sin(angle);
        // Rotate about the source centroid, then align centroids.
        transform.t = {cd.x - (transform.c * cs.x - transform.s * cs.y),
                       cd.y - (transform.s * cs.x + transform.c * cs.y)};

        double prev_residual = std::numeric_limits<double>::infinity();
        int iterations = 0;
        for (; iterations < max_iterations; ++iterations) {
            std::vector<Vec2> matched(src.size());
            double sq_sum = 0.0;
            for (std::size_t i = 0; i < src.size(); ++i) {
                const Vec2 moved = transform.apply(src[i]);
                matched[i] = dst[detail::nearest_index(dst, moved)];
                const Vec2 d = matched[i] - moved;
                sq_sum += d.dot(d);
            }
            const double residual = std::sqrt(sq_sum / src.size());
            if (std::abs(prev_residual - residual) < 1e-9) {
                prev_residual = residual;
                break;
            }
            prev_residual = residual;
            transform = detail::fit_rigid(src, matched);
        }

        if (prev_residual < best.residual) {
            best.transform = transform;
            best.residual = prev_residual;
            best.iterations = iterations;
        }
        if (best.residual < 1e-12) break;
    }
    return best;
}

/// Frame-structured variant: pools all frames, solves one global rigid
/// transform, and returns the aligned source frames.
inline IcpResult icp_align(const std::vector<std::vector<Vec2>>& src_frames,
                           const std::vector<std::vector<Vec2>>& dst_frames,
                           std::vector<std::vector<Vec2>>* aligned_out = nullptr) {
    std::vector<Vec2> src, dst;
    for (const auto& f : src_frames) src.insert(src.end(), f.begin(), f.end());
    for (const auto& f : dst_frames) dst.insert(dst.end(), f.begin(), f.end());
    const IcpResult result = icp_align_points(src, dst);
    if (aligned_out) {
        aligned_out->clear();
        for (const auto& f : src_frames) {
            std::vector<Vec2> aligned;
            aligned.reserve(f.size());
            for (const Vec2& p : f) aligned.push_back(result.transform.apply(p));
            aligned_out->push_back(std::move(aligned));
        }
    }
    return result;
}

/// Applies ICP to keypoint trajectories (confidence-gated pooling) and
/// returns the transformed copy of `src`.
inline IcpResult icp_align_trajectories(const KeypointTrajectory& src,
                                        const KeypointTrajectory& dst,
                                        KeypointTrajectory* aligned_out = nullptr) {
    std::vector<Vec2> s, d;
    for (const auto& f : src.frames)
        for (const auto& [name, kp] : f.points)
            if (kp.confidence >= kConfidenceFloor) s.push_back({kp.x, kp.y});
    for (const auto& f : dst.frames)
        for (const auto& [name, kp] : f.points)
            if (kp.confidence >= kConfidenceFloor) d.push_back({kp.x, kp.y});
    const IcpResult result = icp_align_points(s, d);
    if (aligned_out) {
        *aligned_out = src;
        for (auto& f : aligned_out->frames)
            for (auto& [name, kp] : f.points) {
                const Vec2 p = result.transform.apply({kp.x, kp.y});
                kp.x = p.x;
                kp.y = p.y;
            }
    }
    return result;
}

}  // namespace sds
