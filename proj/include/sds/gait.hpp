#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/errors.hpp"
#include "sds/geometry.hpp"

namespace sds {

enum class GaitLabel { Trot, Pace, Bound, Hop };

inline const char* gait_name(GaitLabel label) {
    switch (label) {
        case GaitLabel::Trot: return "trot";
        case GaitLabel::Pace: return "pace";
        case GaitLabel::Bound: return "bound";
        case GaitLabel::Hop: return "hop";
    }
    return "unknown";
}

inline GaitLabel gait_from_name(const std::string& name) {
    if (name == "trot") return GaitLabel::Trot;
    if (name == "pace") return GaitLabel::Pace;
    if (name == "bound") return GaitLabel::Bound;
    if (name == "hop") return GaitLabel::Hop;
    fail(Errc::InvalidInput, "unknown gait label '" + name + "'");
}

/// Classification tie-break order (fixed).
inline const std::array<GaitLabel, 4>& gait_labels() {
    static const std::array<GaitLabel, 4> labels = {GaitLabel::Trot, GaitLabel::Pace,
                                                    GaitLabel::Bound, GaitLabel::Hop};
    return labels;
}

/// Leg order is FL, FR, RL, RR throughout.
struct GaitTemplate {
    GaitLabel label = GaitLabel::Trot;
    std::array<double, 4> phase{};  // cycle fractions in [0,1)
    double duty = 0.6;              // default stance fraction
};

/// Canonical relative phasing per skill: trot pairs diagonals, pace pairs
/// same-side legs, bound pairs front vs rear, hop moves all legs together.
/// Dynamic gaits default to a flight-heavy duty.
inline GaitTemplate reference_gait(GaitLabel label) {
    GaitTemplate t;
    t.label = label;
    switch (label) {
        case GaitLabel::Trot:
            t.phase = {0.0, 0.5, 0.5, 0.0};
            t.duty = 0.6;
            break;
        case GaitLabel::Pace:
            t.phase = {0.0, 0.5, 0.0, 0.5};
            t.duty = 0.6;
            break;
        case GaitLabel::Bound:
            t.phase = {0.0, 0.0, 0.5, 0.5};
            t.duty = 0.35;
            break;
        case GaitLabel::Hop:
            t.phase = {0.0, 0.0, 0.0, 0.0};
            t.duty = 0.35;
            break;
    }
    return t;
}

/// Pairwise synchrony expected by a template: legs are in-phase when their
/// template phases coincide. Used by the match_phase builtin.
inline double match_phase_score(const std::array<double, 4>& contacts, GaitLabel label) {
    const GaitTemplate t = reference_gait(label);
    int agree = 0;
    int pairs = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const bool in_phase = t.phase[i] == t.phase[j];
            const bool ci = contacts[i] > 0.5;
            const bool cj = contacts[j] > 0.5;
            agree += ((ci == cj) == in_phase) ? 1 : 0;
            ++pairs;
        }
    }
    return static_cast<double>(agree) / pairs;
}

/// The "policy" searched by the optimizer: a bounded parameterization of a
/// periodic gait.
struct GaitParameters {
    double frequency = 2.0;          // Hz
    double duty = 0.6;               // stance fraction
    std::array<double, 4> phase{};   // per-leg cycle offsets
    double step_length = 0.12;       // m
    double step_height = 0.05;       // m
    double base_height_target = 0.30;  // m
    double bob_amplitude = 0.01;     // m
    double forward_speed = 0.5;      // m/s

    static constexpr int kDims = 11;

    std::array<double, kDims> to_array() const {
        return {frequency, duty, phase[0], phase[1], phase[2], phase[3],
                step_length, step_height, base_height_target, bob_amplitude, forward_speed};
    }

    static GaitParameters from_array(const std::array<double, kDims>& a) {
        GaitParameters p;
        p.frequency = a[0];
        p.duty = a[1];
        p.phase = {a[2], a[3], a[4], a[5]};
        p.step_length = a[6];
        p.step_height = a[7];
        p.base_height_target = a[8];
        p.bob_amplitude = a[9];
        p.forward_speed = a[10];
        return p;
    }

    struct Bounds {
        std::array<double, kDims> lo;
        std::array<double, kDims> hi;
        std::array<bool, kDims> circular;  // wrap instead of clamp
    };

    static const Bounds& bounds() {
        static const Bounds b = {
            {0.5, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.15, 0.0, 0.0},
            {4.0, 0.9, 1.0, 1.0, 1.0, 1.0, 0.4, 0.15, 0.45, 0.05, 3.0},
            {false, false, true, true, true, true, false, false, false, false, false}};
        return b;
    }

    /// Clamps fields into bounds; phases wrap around the cycle.
    GaitParameters clamped() const {
        const Bounds& b = bounds();
        auto a = to_array();
        for (int i = 0; i < kDims; ++i) {
            if (b.circular[i])
                a[i] = fract(a[i]);
            else
                a[i] = std::clamp(a[i], b.lo[i], b.hi[i]);
        }
        return from_array(a);
    }

    bool within_bounds(double tol = 1e-12) const {
        const Bounds& b = bounds();
        const auto a = to_array();
        for (int i = 0; i < kDims; ++i) {
            if (b.circular[i]) {
                if (a[i] < 0.0 || a[i] >= 1.0) return false;
            } else if (a[i] < b.lo[i] - tol || a[i] > b.hi[i] + tol) {
                return false;
            }
        }
        return true;
    }

    nlohmann::json to_json() const {
        return {{"frequency", frequency},
                {"duty", duty},
                {"phase", phase},
                {"step_length", step_length},
                {"step_height", step_height},
                {"base_height_target", base_height_target},
                {"bob_amplitude", bob_amplitude},
                {"forward_speed", forward_speed}};
    }

    static GaitParameters from_json(const nlohmann::json& j) {
        GaitParameters p;
        p.frequency = j.at("frequency").get<double>();
        p.duty = j.at("duty").get<double>();
        const auto ph = j.at("phase");
        for (int i = 0; i < 4; ++i) p.phase[i] = ph.at(i).get<double>();
        p.step_length = j.at("step_length").get<double>();
        p.step_height = j.at("step_height").get<double>();
        p.base_height_target = j.at("base_height_target").get<double>();
        p.bob_amplitude = j.at("bob_amplitude").get<double>();
        p.forward_speed = j.at("forward_speed").get<double>();
        return p;
    }

    /// Template-seeded parameters at a skill's nominal speed.
    static GaitParameters from_template(const GaitTemplate& t, double forward_speed = 0.5) {
        GaitParameters p;
        p.frequency = 2.0;
        p.duty = t.duty;
        p.phase = t.phase;
        p.forward_speed = forward_speed;
        return p;
    }
};

/// Stance truth for one leg: in contact iff the leg's cycle position is
/// inside the stance window [0, duty).
inline bool leg_in_stance(const GaitParameters& p, int leg, double t) {
    return fract(p.frequency * t + p.phase[static_cast<std::size_t>(leg)]) < p.duty;
}

inline std::array<bool, 4> contact_at(const GaitParameters& p, double t) {
    require(t >= 0.0, Errc::InvalidInput, "contact query needs t >= 0");
    return {leg_in_stance(p, 0, t), leg_in_stance(p, 1, t), leg_in_stance(p, 2, t),
            leg_in_stance(p, 3, t)};
}

/// Boolean 4xT foot-ground matrix, the gait fingerprint.
struct ContactSequence {
    std::array<std::vector<std::uint8_t>, 4> legs;  // FL, FR, RL, RR
    double dt = 0.02;

    std::size_t length() const { return legs[0].size(); }

    void push(const std::array<bool, 4>& contacts) {
        for (int i = 0; i < 4; ++i) legs[i].push_back(contacts[i] ? 1 : 0);
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        require(out.good(), Errc::IoError, "cannot write contact CSV " + path);
        out << "FL,FR,RL,RR\n";
        for (std::size_t k = 0; k < length(); ++k)
            out << int(legs[0][k]) << ',' << int(legs[1][k]) << ',' << int(legs[2][k]) << ','
                << int(legs[3][k]) << '\n';
        std::ofstream meta(path + ".json");
        require(meta.good(), Errc::IoError, "cannot write contact sidecar for " + path);
        meta << nlohmann::json{{"dt", dt}, {"leg_order", {"FL", "FR", "RL", "RR"}}}.dump(2)
             << "\n";
    }

    static ContactSequence load_csv(const std::string& path) {
        std::ifstream in(path);
        require(in.good(), Errc::IoError, "cannot open contact CSV " + path);
        ContactSequence seq;
        std::string line;
        require(static_cast<bool>(std::getline(in, line)), Errc::ParseError,
                "empty contact CSV " + path);
        require(line == "FL,FR,RL,RR", Errc::ParseError,
                "contact CSV must start with header FL,FR,RL,RR");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream row(line);
            std::array<bool, 4> contacts{};
            for (int i = 0; i < 4; ++i) {
                std::string cell;
                require(static_cast<bool>(std::getline(row, cell, ',')), Errc::ParseError,
                        "short row in contact CSV " + path);
                contacts[i] = std::stoi(cell) != 0;
            }
            seq.push(contacts);
        }
        std::ifstream meta(path + ".json");
        if (meta.good()) {
            nlohmann::json j;
            meta >> j;
            seq.dt = j.value("dt", 0.02);
        }
        return seq;
    }
};

}  // namespace sds
