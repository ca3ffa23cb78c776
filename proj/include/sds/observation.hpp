#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sds/errors.hpp"

namespace sds {

/// Per-timestep simulator state visible to reward programs.
/// Leg order everywhere is FL, FR, RL, RR; joints are (hip roll, hip pitch,
/// knee) per leg in that leg order.
struct Observation {
    std::array<double, 3> base_lin_vel{};   // m/s
    std::array<double, 3> base_ang_vel{};   // rad/s
    double base_height = 0.0;               // m
    std::array<double, 3> gravity_proj{0.0, 0.0, -1.0};  // unit vector, body frame
    std::array<double, 12> joint_pos{};     // rad
    std::array<double, 12> joint_vel{};     // rad/s
    std::array<double, 4> foot_contacts{};  // 0/1
    std::array<double, 12> prev_action{};   // previous joint targets, rad
    std::array<double, 3> command{};        // vx, vy, yaw rate

    void check_invariants() const {
        const double g = std::sqrt(gravity_proj[0] * gravity_proj[0] +
                                   gravity_proj[1] * gravity_proj[1] +
                                   gravity_proj[2] * gravity_proj[2]);
        require(std::abs(g - 1.0) <= 1e-6, Errc::InvalidInput,
                "gravity projection must be a unit vector");
    }
};

/// Canonical probe state used by the runtime half of program validation.
inline Observation zero_observation() { return Observation{}; }

/// Field metadata the DSL resolves identifiers against.
struct ObservationField {
    std::string name;
    int length;  // 1 for scalars
    const double* (*data)(const Observation&);
};

inline const std::vector<ObservationField>& observation_schema() {
    static const std::vector<ObservationField> schema = {
        {"base_lin_vel", 3, [](const Observation& o) { return o.base_lin_vel.data(); }},
        {"base_ang_vel", 3, [](const Observation& o) { return o.base_ang_vel.data(); }},
        {"base_height", 1, [](const Observation& o) { return &o.base_height; }},
        {"gravity_proj", 3, [](const Observation& o) { return o.gravity_proj.data(); }},
        {"joint_pos", 12, [](const Observation& o) { return o.joint_pos.data(); }},
        {"joint_vel", 12, [](const Observation& o) { return o.joint_vel.data(); }},
        {"foot_contacts", 4, [](const Observation& o) { return o.foot_contacts.data(); }},
        {"prev_action", 12, [](const Observation& o) { return o.prev_action.data(); }},
        {"command", 3, [](const Observation& o) { return o.command.data(); }},
    };
    return schema;
}

inline const ObservationField* find_observation_field(const std::string& name) {
    for (const auto& f : observation_schema())
        if (f.name == name) return &f;
    return nullptr;
}

}  // namespace sds
