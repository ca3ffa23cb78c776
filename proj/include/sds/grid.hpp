#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "sds/errors.hpp"
#include "sds/image.hpp"
#include "sds/keypoints.hpp"

namespace sds {

inline constexpr int kMaxGridFrames = 64;  // caps prompt size at an 8x8 mosaic

enum class GridKind { Demo, Rollout };  // G_v vs G_s

struct GridDims {
    int n = 1;        // sampled frame count, always a perfect square
    double tau = 0.0; // sampling interval, seconds
    int h = 1;        // grid side, h*h == n
};

/// Square mosaic of sampled frames plus provenance.
struct FrameGrid {
    std::vector<Image> cells;               // row-major temporal order
    std::vector<double> source_timestamps;  // seconds, non-decreasing
    int h = 0;
    int w = 0;
    GridKind kind = GridKind::Demo;
    Image mosaic;
};

/// Velocity-adaptive grid sizing: the raw frame count T/v is rounded,
/// clamped to [1, 64], then floored to the nearest perfect square so the
/// mosaic stays square. tau rescales so n*tau spans the clip exactly.
inline GridDims compute_grid_dims(double duration_s, double velocity_mps) {
    require(std::isfinite(duration_s) && std::isfinite(velocity_mps), Errc::InvalidInput,
            "grid sizing needs finite inputs");
    require(duration_s > 0.0 && velocity_mps > 0.0, Errc::InvalidInput,
            "grid sizing needs positive duration and velocity");
    const double raw = duration_s / velocity_mps;
    const long long rounded = std::llround(raw);
    const int clamped = static_cast<int>(std::clamp<long long>(rounded, 1, kMaxGridFrames));
    const int h = static_cast<int>(std::floor(std::sqrt(static_cast<double>(clamped)) + 1e-9));
    GridDims dims;
    dims.h = std::max(1, h);
    dims.n = dims.h * dims.h;
    dims.tau = duration_s / dims.n;
    return dims;
}

/// A decoded frame sequence: the minimal shim over "a directory of numbered
/// PNG files". Timestamps are index/fps.
struct FrameSequence {
    double fps = 0.0;
    std::vector<std::string> paths;  // temporal order

    double duration() const { return fps > 0.0 ? paths.size() / fps : 0.0; }
    double timestamp(std::size_t i) const { return fps > 0.0 ? i / fps : 0.0; }

    static FrameSequence from_directory(const std::string& dir, double fps) {
        require(fps > 0.0, Errc::InvalidInput, "fps must be positive");
        namespace fs = std::filesystem;
        require(fs::is_directory(dir), Errc::IoError, "frame directory not found: " + dir);
        FrameSequence seq;
        seq.fps = fps;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".png")
                seq.paths.push_back(entry.path().string());
        std::sort(seq.paths.begin(), seq.paths.end());
        require(!seq.paths.empty(), Errc::IoError, "no PNG frames in " + dir);
        return seq;
    }
};

/// Indices of the n frames nearest to timestamps k*tau (k = 0..n-1).
/// Ties round toward the earlier frame.
inline std::vector<std::size_t> sample_frame_indices(std::size_t frame_count, double fps,
                                                     int n, double tau) {
    require(n >= 1 && tau >= 0.0, Errc::InvalidInput, "invalid sampling request");
    require(frame_count > 0 && fps > 0.0, Errc::InvalidInput, "empty frame sequence");
    const double duration = frame_count / fps;
    const double span = n * tau;
    require(duration >= span - 0.5 / fps - 1e-9, Errc::SpanExceedsVideo,
            "clip is shorter than the requested sampling span");
    std::vector<std::size_t> indices;
    indices.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double target = k * tau;
        double raw = target * fps;
        std::size_t idx = static_cast<std::size_t>(std::floor(raw + 0.5 - 1e-9));
        if (idx >= frame_count) idx = frame_count - 1;
        indices.push_back(idx);
    }
    return indices;
}

inline std::vector<Image> sample_frames(const FrameSequence& video, int n, double tau,
                                        std::vector<double>* timestamps = nullptr) {
    const auto indices = sample_frame_indices(video.paths.size(), video.fps, n, tau);
    std::vector<Image> frames;
    frames.reserve(indices.size());
    for (std::size_t idx : indices) {
        frames.push_back(Image::load_png(video.paths[idx]));
        if (timestamps) timestamps->push_back(video.timestamp(idx));
    }
    return frames;
}

/// Row-major h*h mosaic of equally sized frames. With annotate=true each
/// cell gets a small index label in its top-left corner; annotate=false
/// keeps cell pixels bit-identical to the inputs.
inline FrameGrid compose_grid(const std::vector<Image>& frames, GridKind kind,
                              bool annotate = true,
                              const std::vector<double>& timestamps = {}) {
    require(!frames.empty(), Errc::InvalidInput, "cannot compose an empty grid");
    const int n = static_cast<int>(frames.size());
    const int h = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    require(h * h == n, Errc::NotPerfectSquare,
            "frame count " + std::to_string(n) + " is not a perfect square");
    const int fw = frames[0].width();
    const int fh = frames[0].height();
    for (const Image& f : frames)
        require(f.width() == fw && f.height() == fh, Errc::DimensionMismatch,
                "grid frames must share dimensions");

    FrameGrid grid;
    grid.h = grid.w = h;
    grid.kind = kind;
    grid.cells = frames;
    grid.source_timestamps =
        timestamps.empty() ? std::vector<double>(frames.size(), 0.0) : timestamps;
    require(grid.source_timestamps.size() == frames.size(), Errc::InvalidInput,
            "timestamp count must match frame count");
    require(std::is_sorted(grid.source_timestamps.begin(), grid.source_timestamps.end()),
            Errc::InvalidInput, "grid timestamps must be non-decreasing");

    grid.mosaic = Image(fw * h, fh * h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < h; ++c) {
            const int i = r * h + c;
            Image cell = frames[i];
            if (annotate) {
                const std::string label = std::to_string(i);
                cell.fill_rect(1, 1, static_cast<int>(label.size()) * 6 + 3, 11, color::black);
                cell.draw_text(3, 3, label, color::white);
                grid.cells[i] = cell;
            }
            grid.mosaic.blit(cell, c * fw, r * fh);
        }
    }
    return grid;
}

inline Image extract_cell(const FrameGrid& grid, int row, int col) {
    require(row >= 0 && row < grid.h && col >= 0 && col < grid.w, Errc::InvalidInput,
            "cell index out of range");
    const int fw = grid.mosaic.width() / grid.w;
    const int fh = grid.mosaic.height() / grid.h;
    return grid.mosaic.crop(col * fw, row * fh, fw, fh);
}

namespace detail {

inline const std::vector<std::string>& leg_prefixes() {
    static const std::vector<std::string> p = {"front-left", "front-right", "rear-left",
                                               "rear-right"};
    return p;
}

/// Skeleton edges by naming convention: base -> [hip ->] [knee ->] foot per
/// leg, using whichever intermediate joints the frame carries.
inline std::vector<std::pair<std::string, std::string>> skeleton_edges(
    const std::map<std::string, Keypoint>& points) {
    std::vector<std::pair<std::string, std::string>> edges;
    if (!points.count("base")) return edges;
    for (const auto& leg : leg_prefixes()) {
        std::vector<std::string> chain = {"base"};
        for (const char* part : {"-hip", "-knee", "-foot"}) {
            const std::string name = leg + part;
            if (points.count(name)) chain.push_back(name);
        }
        for (std::size_t i = 1; i < chain.size(); ++i) edges.emplace_back(chain[i - 1], chain[i]);
    }
    return edges;
}

}  // namespace detail

/// Draws keypoint markers (and skeleton edges where both endpoints clear
/// the confidence floor) onto a copy of the frame.
inline Image overlay_keypoints(const Image& frame, const std::map<std::string, Keypoint>& points) {
    for (const auto& [name, kp] : points)
        require(kp.x >= 0.0 && kp.x <= 1.0 && kp.y >= 0.0 && kp.y <= 1.0,
                Errc::CoordinateOutOfRange,
                "keypoint '" + name + "' outside the unit square");

    Image out = frame;
    auto to_px = [&](const Keypoint& kp) {
        return std::pair<int, int>{static_cast<int>(std::lround(kp.x * frame.width())),
                                   static_cast<int>(std::lround(kp.y * frame.height()))};
    };
    for (const auto& [a, b] : detail::skeleton_edges(points)) {
        const Keypoint& ka = points.at(a);
        const Keypoint& kb = points.at(b);
        if (ka.confidence < kConfidenceFloor || kb.confidence < kConfidenceFloor) continue;
        const auto [ax, ay] = to_px(ka);
        const auto [bx, by] = to_px(kb);
        out.draw_line(ax, ay, bx, by, color::green);
    }
    for (const auto& [name, kp] : points) {
        if (kp.confidence < kConfidenceFloor) continue;
        const auto [x, y] = to_px(kp);
        out.draw_disc(x, y, std::max(2, frame.width() / 64), name == "base" ? color::blue
                                                                            : color::red);
    }
    return out;
}

}  // namespace sds
