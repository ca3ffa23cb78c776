#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/errors.hpp"
#include "sds/gait.hpp"
#include "sds/geometry.hpp"
#include "sds/keypoints.hpp"
#include "sds/observation.hpp"

namespace sds {

inline constexpr double kSimDt = 0.02;  // 50 Hz control rate

/// Two-link planar legs on a rectangular hip layout.
struct Morphology {
    double thigh = 0.213;      // m
    double shank = 0.213;      // m
    double hip_x_front = 0.19; // m, forward of base
    double hip_x_rear = 0.19;  // m, behind base
    double half_width = 0.13;  // m, lateral hip offset
    // +1 keeps the knee apex behind the hip; -1 inverts it (rear-inverted
    // platforms). Order FL, FR, RL, RR.
    std::array<double, 4> knee_sign{1.0, 1.0, 1.0, 1.0};

    nlohmann::json to_json() const {
        return {{"thigh", thigh},
                {"shank", shank},
                {"hip_x_front", hip_x_front},
                {"hip_x_rear", hip_x_rear},
                {"half_width", half_width},
                {"knee_sign", knee_sign}};
    }
    static Morphology from_json(const nlohmann::json& j) {
        Morphology m;
        m.thigh = j.value("thigh", m.thigh);
        m.shank = j.value("shank", m.shank);
        m.hip_x_front = j.value("hip_x_front", m.hip_x_front);
        m.hip_x_rear = j.value("hip_x_rear", m.hip_x_rear);
        m.half_width = j.value("half_width", m.half_width);
        if (j.contains("knee_sign"))
            for (int i = 0; i < 4; ++i) m.knee_sign[i] = j["knee_sign"].at(i).get<double>();
        return m;
    }
};

/// One lateral push: force_n applied from start_s for duration_s.
struct Push {
    double start_s = 0.0;
    double duration_s = 2.0;
    double force_n = 0.0;
};
using DisturbanceSchedule = std::vector<Push>;

struct RolloutOptions {
    // Test hook: offsets the base height until the first reset, letting the
    // height-threshold termination path be exercised deterministically.
    double initial_height_offset = 0.0;
};

/// Ground-plane stability snapshot for one timestep.
struct StabilityState {
    Vec2 com;
    std::array<Vec2, 4> feet;
    std::array<bool, 4> stance{};
    std::array<double, 3> ang_vel{};
};

/// Shortest distance from the CoM projection to the support polygon
/// boundary. With fewer than three stance feet the polygon degenerates to
/// a segment or point; with none the state is airborne and scores 0.
inline double com_support_distance(const StabilityState& s, bool* airborne = nullptr) {
    std::vector<Vec2> stance_feet;
    for (int i = 0; i < 4; ++i)
        if (s.stance[i]) stance_feet.push_back(s.feet[i]);
    if (airborne) *airborne = stance_feet.empty();
    if (stance_feet.empty()) return 0.0;
    return distance_to_hull_boundary(s.com, stance_feet);
}

inline double ang_vel_magnitude(const StabilityState& s) {
    return std::sqrt(s.ang_vel[0] * s.ang_vel[0] + s.ang_vel[1] * s.ang_vel[1] +
                     s.ang_vel[2] * s.ang_vel[2]);
}

namespace detail {

struct LegSolution {
    double hip_pitch = 0.0;  // rad from vertical, +x forward
    double knee = 0.0;       // rad, 0 = straight
    Vec2 knee_pos;           // sagittal, relative to hip
    Vec2 foot_pos;           // sagittal, relative to hip
};

/// Planar two-link inverse kinematics for a hip-relative foot target.
inline LegSolution solve_leg(double dx, double dz, double thigh, double shank,
                             double knee_sign) {
    const double d = std::hypot(dx, dz);
    const double reach = thigh + shank;
    const double min_reach = std::abs(thigh - shank);
    require(d <= reach - 1e-9 && d >= min_reach + 1e-9, Errc::ParamInfeasible,
            "foot target out of leg reach");
    const double cos_k = std::clamp(
        (thigh * thigh + shank * shank - d * d) / (2.0 * thigh * shank), -1.0, 1.0);
    const double interior = std::acos(cos_k);
    const double cos_b =
        std::clamp((thigh * thigh + d * d - shank * shank) / (2.0 * thigh * d), -1.0, 1.0);
    const double beta = std::acos(cos_b);
    const double gamma = std::atan2(dx, -dz);  // angle from straight-down

    LegSolution sol;
    sol.hip_pitch = gamma - knee_sign * beta;
    sol.knee = knee_sign * (M_PI - interior);
    sol.knee_pos = {thigh * std::sin(sol.hip_pitch), -thigh * std::cos(sol.hip_pitch)};
    sol.foot_pos = {dx, dz};
    return sol;
}

/// Hip-relative foot trajectory: stance sweeps the foot backward on the
/// ground, swing returns it forward along a lifted arc that touches down
/// exactly at the stance boundary.
inline void foot_target(const GaitParameters& p, int leg, double t, double base_height,
                        double* dx, double* z_foot) {
    const double c = fract(p.frequency * t + p.phase[static_cast<std::size_t>(leg)]);
    if (c < p.duty) {
        const double s = c / p.duty;
        *dx = 0.5 * p.step_length * (1.0 - 2.0 * s);
        *z_foot = 0.0;
    } else {
        const double s = (c - p.duty) / (1.0 - p.duty);
        *dx = 0.5 * p.step_length * (2.0 * s - 1.0);
        *z_foot = p.step_height * std::sin(M_PI * s);
    }
    (void)base_height;
}

struct PushResponse {
    double roll = 0.0;
    double roll_rate = 0.0;
    double lateral_vel = 0.0;
    double lateral_off = 0.0;

    static constexpr double kRollPerNewton = 0.0035;  // rad/N steady state
    static constexpr double kVelPerNewton = 0.002;    // m/s per N steady state
    static constexpr double kTau = 0.25;              // s, first-order lag

    void step(double force_n, double dt) {
        const double target_roll = kRollPerNewton * force_n;
        const double target_vel = kVelPerNewton * force_n;
        const double prev_roll = roll;
        roll += (target_roll - roll) * dt / kTau;
        roll_rate = (roll - prev_roll) / dt;
        lateral_vel += (target_vel - lateral_vel) * dt / kTau;
        lateral_off += lateral_vel * dt;
    }

    void reset() { *this = PushResponse{}; }
};

inline double active_force(const DisturbanceSchedule& pushes, double t) {
    double force = 0.0;
    for (const Push& p : pushes)
        if (t >= p.start_s && t < p.start_s + p.duration_s) force += p.force_n;
    return force;
}

}  // namespace detail

struct RolloutSummary {
    std::optional<int> terminated_at;
    int reset_count = 0;
};

/// Per-step payload handed to rollout visitors.
struct SimStep {
    int index = 0;
    double t = 0.0;
    Observation obs;
    std::array<bool, 4> contacts{};
    StabilityState stability;
    Vec2 base_sagittal;               // world (x, z)
    std::array<Vec2, 4> knees_sagittal;  // world (x, z)
    std::array<Vec2, 4> feet_sagittal;   // world (x, z)
    bool reset_here = false;
};

/// Deterministic kinematic rollout. Calls `visit(const SimStep&)` once per
/// timestep; throws Error(ParamInfeasible) when the leg geometry cannot
/// reach a commanded foot target.
template <typename Visitor>
RolloutSummary rollout_visit(const GaitParameters& params, const Morphology& morph, int steps,
                             double dt, const std::array<double, 3>& command,
                             const DisturbanceSchedule& pushes, Visitor&& visit,
                             const RolloutOptions& options = {}) {
    require(steps >= 1, Errc::InvalidInput, "rollout needs at least one step");
    require(dt > 0.0, Errc::InvalidInput, "rollout needs positive dt");

    detail::PushResponse response;
    double height_offset = options.initial_height_offset;
    RolloutSummary summary;
    std::array<double, 12> prev_joints{};
    bool have_prev = false;

    const std::array<double, 4> hip_x = {morph.hip_x_front, morph.hip_x_front,
                                         -morph.hip_x_rear, -morph.hip_x_rear};
    const std::array<double, 4> hip_y = {morph.half_width, -morph.half_width,
                                         morph.half_width, -morph.half_width};

    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const double force = detail::active_force(pushes, t);
        if (k > 0) response.step(force, dt);

        SimStep step;
        step.index = k;
        step.t = t;

        const double bob_phase = 4.0 * M_PI * params.frequency * t;
        const double h = params.base_height_target + params.bob_amplitude * std::sin(bob_phase) +
                         height_offset;
        const double base_x = params.forward_speed * t;

        step.contacts = contact_at(params, t);

        Observation& obs = step.obs;
        obs.base_lin_vel = {params.forward_speed, response.lateral_vel,
                            params.bob_amplitude * 4.0 * M_PI * params.frequency *
                                std::cos(bob_phase)};
        obs.base_ang_vel = {response.roll_rate, 0.0, 0.0};
        obs.base_height = h;
        obs.gravity_proj = {0.0, -std::sin(response.roll), -std::cos(response.roll)};
        obs.command = command;
        for (int leg = 0; leg < 4; ++leg) obs.foot_contacts[leg] = step.contacts[leg] ? 1.0 : 0.0;

        for (int leg = 0; leg < 4; ++leg) {
            double dx = 0.0, z_foot = 0.0;
            detail::foot_target(params, leg, t, h, &dx, &z_foot);
            const detail::LegSolution sol =
                detail::solve_leg(dx, z_foot - h, morph.thigh, morph.shank,
                                  morph.knee_sign[static_cast<std::size_t>(leg)]);
            obs.joint_pos[leg * 3 + 0] = 0.0;  // hip roll is held in this sagittal model
            obs.joint_pos[leg * 3 + 1] = sol.hip_pitch;
            obs.joint_pos[leg * 3 + 2] = sol.knee;

            const double hx = base_x + hip_x[static_cast<std::size_t>(leg)];
            step.knees_sagittal[leg] = {hx + sol.knee_pos.x, h + sol.knee_pos.y};
            step.feet_sagittal[leg] = {hx + sol.foot_pos.x, h + sol.foot_pos.y};
            step.stability.feet[leg] = {hx + dx, hip_y[static_cast<std::size_t>(leg)]};
        }
        step.base_sagittal = {base_x, h};

        if (have_prev) {
            for (int i = 0; i < 12; ++i)
                obs.joint_vel[i] = (obs.joint_pos[i] - prev_joints[i]) / dt;
            obs.prev_action = prev_joints;
        }
        prev_joints = obs.joint_pos;
        have_prev = true;

        step.stability.com = {base_x, response.lateral_off};
        step.stability.stance = step.contacts;
        step.stability.ang_vel = obs.base_ang_vel;

        const bool fallen = h < 0.5 * params.base_height_target;
        const bool tipped = std::abs(response.roll) > 0.8;
        if (fallen || tipped) {
            if (!summary.terminated_at) summary.terminated_at = k;
            ++summary.reset_count;
            step.reset_here = true;
            response.reset();
            height_offset = 0.0;
        }

        visit(static_cast<const SimStep&>(step));
    }
    return summary;
}

/// Full rollout record: observations, contacts, sagittal keypoints, and
/// per-step stability snapshots.
struct RolloutTrace {
    std::vector<Observation> observations;
    ContactSequence contacts;
    KeypointTrajectory keypoints;
    std::vector<StabilityState> stability;
    std::optional<int> terminated_at;
    int reset_count = 0;
    double dt = kSimDt;

    std::size_t length() const { return observations.size(); }

    void save(const std::string& dir) const;
    static RolloutTrace load(const std::string& dir);
};

namespace detail {

/// Fixed side-view camera sized to the whole run: x spans the travelled
/// distance plus margins, y spans [0, height_m] with the ground at the
/// bottom edge.
struct Viewport {
    double x0 = -0.6;
    double width = 1.2;
    double height_m = 0.8;

    static Viewport for_run(double forward_speed, double duration_s) {
        Viewport v;
        v.width = std::max(1.2, forward_speed * duration_s + 1.2);
        return v;
    }

    Keypoint project(Vec2 sagittal, double confidence = 1.0) const {
        Keypoint kp;
        kp.x = std::clamp((sagittal.x - x0) / width, 0.0, 1.0);
        kp.y = std::clamp(1.0 - sagittal.y / height_m, 0.0, 1.0);
        kp.confidence = confidence;
        return kp;
    }
};

inline const std::array<std::string, 4>& leg_names() {
    static const std::array<std::string, 4> n = {"front-left", "front-right", "rear-left",
                                                 "rear-right"};
    return n;
}

}  // namespace detail

inline RolloutTrace rollout(const GaitParameters& params, const Morphology& morph, int steps,
                            double dt, const std::array<double, 3>& command,
                            const DisturbanceSchedule& pushes = {},
                            const RolloutOptions& options = {}) {
    RolloutTrace trace;
    trace.dt = dt;
    trace.contacts.dt = dt;
    trace.keypoints.fps = 1.0 / dt;
    trace.keypoints.skeleton.insert("base");
    for (const auto& leg : detail::leg_names()) {
        trace.keypoints.skeleton.insert(leg + "-knee");
        trace.keypoints.skeleton.insert(leg + "-foot");
    }

    const detail::Viewport view = detail::Viewport::for_run(params.forward_speed, steps * dt);
    const RolloutSummary summary = rollout_visit(
        params, morph, steps, dt, command, pushes,
        [&](const SimStep& step) {
            trace.observations.push_back(step.obs);
            trace.contacts.push(step.contacts);
            trace.stability.push_back(step.stability);
            KeypointFrame frame;
            frame.t = step.t;
            frame.points["base"] = view.project(step.base_sagittal);
            for (int leg = 0; leg < 4; ++leg) {
                const auto& name = detail::leg_names()[static_cast<std::size_t>(leg)];
                frame.points[name + "-knee"] = view.project(step.knees_sagittal[leg]);
                frame.points[name + "-foot"] = view.project(step.feet_sagittal[leg]);
            }
            trace.keypoints.frames.push_back(std::move(frame));
        },
        options);
    trace.terminated_at = summary.terminated_at;
    trace.reset_count = summary.reset_count;
    return trace;
}

namespace detail {

inline nlohmann::json observation_to_json(const Observation& o) {
    return {{"base_lin_vel", o.base_lin_vel}, {"base_ang_vel", o.base_ang_vel},
            {"base_height", o.base_height},   {"gravity_proj", o.gravity_proj},
            {"joint_pos", o.joint_pos},       {"joint_vel", o.joint_vel},
            {"foot_contacts", o.foot_contacts}, {"prev_action", o.prev_action},
            {"command", o.command}};
}

inline Observation observation_from_json(const nlohmann::json& j) {
    Observation o;
    auto read = [&](const char* key, auto& field) {
        const auto& arr = j.at(key);
        for (std::size_t i = 0; i < field.size(); ++i) field[i] = arr.at(i).get<double>();
    };
    read("base_lin_vel", o.base_lin_vel);
    read("base_ang_vel", o.base_ang_vel);
    o.base_height = j.at("base_height").get<double>();
    read("gravity_proj", o.gravity_proj);
    read("joint_pos", o.joint_pos);
    read("joint_vel", o.joint_vel);
    read("foot_contacts", o.foot_contacts);
    read("prev_action", o.prev_action);
    read("command", o.command);
    return o;
}

}  // namespace detail

inline void RolloutTrace::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    contacts.save_csv((fs::path(dir) / "contacts.csv").string());

    std::ofstream obs_out(fs::path(dir) / "observations.jsonl");
    require(obs_out.good(), Errc::IoError, "cannot write observations.jsonl in " + dir);
    for (std::size_t k = 0; k < observations.size(); ++k) {
        nlohmann::json line = detail::observation_to_json(observations[k]);
        const StabilityState& s = stability[k];
        line["com"] = {s.com.x, s.com.y};
        nlohmann::json feet = nlohmann::json::array();
        for (const Vec2& f : s.feet) feet.push_back({f.x, f.y});
        line["feet"] = std::move(feet);
        obs_out << line.dump() << "\n";
    }

    std::ofstream kp_out(fs::path(dir) / "keypoints.jsonl");
    require(kp_out.good(), Errc::IoError, "cannot write keypoints.jsonl in " + dir);
    kp_out << nlohmann::json{{"skeleton", std::vector<std::string>(keypoints.skeleton.begin(),
                                                                   keypoints.skeleton.end())},
                             {"fps", keypoints.fps}}
                  .dump()
           << "\n";
    for (const KeypointFrame& f : keypoints.frames) {
        nlohmann::json pts = nlohmann::json::object();
        for (const auto& [name, kp] : f.points) pts[name] = {kp.x, kp.y, kp.confidence};
        kp_out << nlohmann::json{{"t", f.t}, {"points", std::move(pts)}}.dump() << "\n";
    }

    std::ofstream meta(fs::path(dir) / "trace.json");
    require(meta.good(), Errc::IoError, "cannot write trace.json in " + dir);
    nlohmann::json j = {{"dt", dt}, {"reset_count", reset_count}};
    if (terminated_at) j["terminated_at"] = *terminated_at;
    meta << j.dump(2) << "\n";
}

inline RolloutTrace RolloutTrace::load(const std::string& dir) {
    namespace fs = std::filesystem;
    RolloutTrace trace;
    trace.contacts = ContactSequence::load_csv((fs::path(dir) / "contacts.csv").string());

    std::ifstream obs_in(fs::path(dir) / "observations.jsonl");
    require(obs_in.good(), Errc::IoError, "cannot open observations.jsonl in " + dir);
    std::string line;
    while (std::getline(obs_in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        trace.observations.push_back(detail::observation_from_json(j));
        StabilityState s;
        s.com = {j.at("com").at(0).get<double>(), j.at("com").at(1).get<double>()};
        for (int i = 0; i < 4; ++i)
            s.feet[i] = {j.at("feet").at(i).at(0).get<double>(),
                         j.at("feet").at(i).at(1).get<double>()};
        for (int i = 0; i < 4; ++i)
            s.stance[i] = trace.observations.back().foot_contacts[i] > 0.5;
        for (int i = 0; i < 3; ++i)
            s.ang_vel[i] = trace.observations.back().base_ang_vel[i];
        trace.stability.push_back(s);
    }

    std::ifstream kp_in(fs::path(dir) / "keypoints.jsonl");
    require(kp_in.good(), Errc::IoError, "cannot open keypoints.jsonl in " + dir);
    bool header = true;
    while (std::getline(kp_in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (header) {
            for (const auto& name : j.at("skeleton"))
                trace.keypoints.skeleton.insert(name.get<std::string>());
            trace.keypoints.fps = j.value("fps", 50.0);
            header = false;
            continue;
        }
        KeypointFrame f;
        f.t = j.at("t").get<double>();
        for (const auto& [name, arr] : j.at("points").items())
            f.points[name] = {arr.at(0).get<double>(), arr.at(1).get<double>(),
                              arr.at(2).get<double>()};
        trace.keypoints.frames.push_back(std::move(f));
    }

    std::ifstream meta(fs::path(dir) / "trace.json");
    if (meta.good()) {
        nlohmann::json j;
        meta >> j;
        trace.dt = j.value("dt", kSimDt);
        trace.reset_count = j.value("reset_count", 0);
        if (j.contains("terminated_at")) trace.terminated_at = j["terminated_at"].get<int>();
    }
    return trace;
}

}  // namespace sds
