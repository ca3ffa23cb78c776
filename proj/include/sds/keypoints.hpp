#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/errors.hpp"
#include "sds/geometry.hpp"

namespace sds {

/// Keypoints below this confidence are ignored by velocity estimation and
/// skeleton overlays.
inline constexpr double kConfidenceFloor = 0.3;

inline const std::array<std::string, 5>& required_joints() {
    static const std::array<std::string, 5> names = {
        "front-left-foot", "front-right-foot", "rear-left-foot", "rear-right-foot", "base"};
    return names;
}

struct Keypoint {
    double x = 0.0;  // normalized image coordinates in [0,1]
    double y = 0.0;
    double confidence = 1.0;
};

struct KeypointFrame {
    double t = 0.0;  // seconds
    std::map<std::string, Keypoint> points;
};

/// Time-indexed named 2D keypoints; the motion record for both the
/// demonstration clip and simulated rollouts.
struct KeypointTrajectory {
    std::set<std::string> skeleton;
    double fps = 0.0;  // advisory; timestamps are authoritative
    std::vector<KeypointFrame> frames;

    void validate() const {
        for (const auto& name : required_joints())
            require(skeleton.count(name) > 0, Errc::InvalidInput,
                    "skeleton is missing required joint '" + name + "'");
        for (std::size_t i = 0; i < frames.size(); ++i) {
            if (i > 0)
                require(frames[i].t > frames[i - 1].t, Errc::InvalidInput,
                        "frame timestamps must be strictly increasing");
            for (const auto& [name, kp] : frames[i].points) {
                require(skeleton.count(name) > 0, Errc::InvalidInput,
                        "frame references undeclared joint '" + name + "'");
                (void)kp;
            }
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["skeleton"] = std::vector<std::string>(skeleton.begin(), skeleton.end());
        j["fps"] = fps;
        j["frames"] = nlohmann::json::array();
        for (const auto& f : frames) {
            nlohmann::json jf;
            jf["t"] = f.t;
            nlohmann::json pts = nlohmann::json::object();
            for (const auto& [name, kp] : f.points)
                pts[name] = {kp.x, kp.y, kp.confidence};
            jf["points"] = std::move(pts);
            j["frames"].push_back(std::move(jf));
        }
        return j;
    }

    static KeypointTrajectory from_json(const nlohmann::json& j) {
        KeypointTrajectory traj;
        try {
            for (const auto& name : j.at("skeleton")) traj.skeleton.insert(name.get<std::string>());
            traj.fps = j.value("fps", 0.0);
            for (const auto& jf : j.at("frames")) {
                KeypointFrame frame;
                frame.t = jf.at("t").get<double>();
                for (const auto& [name, arr] : jf.at("points").items()) {
                    require(arr.is_array() && arr.size() == 3, Errc::ParseError,
                            "keypoint '" + name + "' must be [x, y, confidence]");
                    frame.points[name] = {arr[0].get<double>(), arr[1].get<double>(),
                                          arr[2].get<double>()};
                }
                traj.frames.push_back(std::move(frame));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::ParseError, std::string("malformed keypoint document: ") + e.what());
        }
        traj.validate();
        return traj;
    }

    static KeypointTrajectory load(const std::string& path) {
        std::ifstream in(path);
        require(in.good(), Errc::IoError, "cannot open keypoint file " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::ParseError, "invalid JSON in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        require(out.good(), Errc::IoError, "cannot write keypoint file " + path);
        out << to_json().dump(2) << "\n";
    }
};

/// Mean forward speed from per-frame keypoint displacement. For each
/// consecutive frame pair, points tracked in both frames above the
/// confidence floor contribute their displacement magnitude, weighted by
/// the smaller of the two confidences; pair speeds are averaged.
inline double estimate_velocity(const KeypointTrajectory& traj, double pixels_to_meters) {
    require(traj.frames.size() >= 2, Errc::InsufficientData,
            "velocity estimation needs at least two frames");
    require(pixels_to_meters > 0.0 && std::isfinite(pixels_to_meters), Errc::InvalidInput,
            "pixels_to_meters scale must be positive");

    double speed_sum = 0.0;
    std::size_t pair_count = 0;
    for (std::size_t i = 1; i < traj.frames.size(); ++i) {
        const KeypointFrame& a = traj.frames[i - 1];
        const KeypointFrame& b = traj.frames[i];
        const double dt = b.t - a.t;
        require(dt > 0.0, Errc::InvalidInput, "non-increasing timestamps");

        double weighted_disp = 0.0;
        double weight_sum = 0.0;
        for (const auto& [name, ka] : a.points) {
            auto it = b.points.find(name);
            if (it == b.points.end()) continue;
            const Keypoint& kb = it->second;
            const double w = std::min(ka.confidence, kb.confidence);
            if (w < kConfidenceFloor) continue;
            weighted_disp += w * Vec2{kb.x - ka.x, kb.y - ka.y}.norm();
            weight_sum += w;
        }
        if (weight_sum <= 0.0) continue;
        speed_sum += (weighted_disp / weight_sum) * pixels_to_meters / dt;
        ++pair_count;
    }
    require(pair_count > 0, Errc::NoTrackableKeypoints,
            "no keypoints above the confidence floor in any frame pair");
    return speed_sum / static_cast<double>(pair_count);
}

}  // namespace sds
