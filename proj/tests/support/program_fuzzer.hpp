// Random generators for DSL source text and observations. Generated
// programs are syntactically valid and statically well-shaped; runtime
// blowups (exp overflow, division by small values) are allowed and are
// part of what the tests exercise.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "sds/observation.hpp"

namespace sds_test {

class ProgramFuzzer {
public:
    explicit ProgramFuzzer(std::uint64_t seed) : rng_(seed) {}

    std::string random_program(int max_subs = 4, int max_depth = 4) {
        const int n = 1 + static_cast<int>(rng_() % static_cast<unsigned>(max_subs));
        std::string out;
        for (int i = 0; i < n; ++i) {
            out += "r" + std::to_string(i) + " = ";
            if (chance(0.4)) out += number_literal(0.1, 5.0) + " * ";
            out += scalar_expr(max_depth);
            out += "\n";
        }
        return out;
    }

    sds::Observation random_observation() {
        sds::Observation obs;
        auto u = [&](double lo, double hi) { return uniform(lo, hi); };
        for (auto& x : obs.base_lin_vel) x = u(-2, 2);
        for (auto& x : obs.base_ang_vel) x = u(-2, 2);
        obs.base_height = u(0.05, 0.6);
        const double theta = u(0, 6.28318);
        const double phi = u(-0.6, 0.6);
        obs.gravity_proj = {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
                            -std::cos(phi)};
        for (auto& x : obs.joint_pos) x = u(-1.5, 1.5);
        for (auto& x : obs.joint_vel) x = u(-4, 4);
        for (auto& x : obs.foot_contacts) x = chance(0.5) ? 1.0 : 0.0;
        for (auto& x : obs.prev_action) x = u(-1.5, 1.5);
        for (auto& x : obs.command) x = u(-1, 1);
        return obs;
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::string scalar_expr(int depth) {
        if (depth <= 0) return scalar_leaf();
        switch (rng_() % 8) {
            case 0:
                return scalar_leaf();
            case 1:
                return "(" + scalar_expr(depth - 1) + " " + pick_op() + " " +
                       scalar_expr(depth - 1) + ")";
            case 2:
                return "-" + scalar_expr(depth - 1);
            case 3: {
                const char* fn[] = {"abs", "square", "exp"};
                return std::string(fn[rng_() % 3]) + "(" + scalar_expr(depth - 1) + ")";
            }
            case 4: {
                const char* fn[] = {"sum", "norm"};
                return std::string(fn[rng_() % 2]) + "(" + vector_expr(depth - 1) + ")";
            }
            case 5: {
                const char* fn[] = {"min", "max"};
                return std::string(fn[rng_() % 2]) + "(" + scalar_expr(depth - 1) + ", " +
                       scalar_expr(depth - 1) + ")";
            }
            case 6:
                return "clip(" + scalar_expr(depth - 1) + ", " + number_literal(-2, 0) + ", " +
                       number_literal(0.1, 2) + ")";
            default: {
                const char* tmpl[] = {"trot", "pace", "bound", "hop"};
                return std::string("match_phase(foot_contacts, \"") + tmpl[rng_() % 4] + "\")";
            }
        }
    }

    std::string vector_expr(int depth) {
        switch (depth <= 0 ? rng_() % 2 : rng_() % 4) {
            case 0: {
                const char* fields[] = {"base_lin_vel", "base_ang_vel", "gravity_proj",
                                        "joint_pos",    "joint_vel",    "foot_contacts",
                                        "prev_action",  "command"};
                return fields[rng_() % 8];
            }
            case 1: {
                std::string out = "[" + number_literal(-2, 2);
                const int extra = 1 + static_cast<int>(rng_() % 3);
                for (int i = 0; i < extra; ++i) out += ", " + number_literal(-2, 2);
                return out + "]";
            }
            case 2: {
                // same-shape sum/difference of 3-vectors
                const char* fields[] = {"base_lin_vel", "base_ang_vel", "gravity_proj", "command"};
                return std::string("(") + fields[rng_() % 4] + " " + (chance(0.5) ? "+" : "-") +
                       " " + fields[rng_() % 4] + ")";
            }
            default:
                return "(" + vector_expr(depth - 1) + " * " + number_literal(-2, 2) + ")";
        }
    }

    std::string scalar_leaf() {
        switch (rng_() % 4) {
            case 0:
                return number_literal(-3, 3);
            case 1:
                return "base_height";
            case 2: {
                const char* v3[] = {"base_lin_vel", "base_ang_vel", "gravity_proj", "command"};
                return std::string(v3[rng_() % 4]) + "." + "xyz"[rng_() % 3];
            }
            default: {
                const char* vn[] = {"joint_pos", "joint_vel", "prev_action"};
                return std::string(vn[rng_() % 3]) + "[" + std::to_string(rng_() % 12) + "]";
            }
        }
    }

    std::string pick_op() {
        const char* ops[] = {"+", "-", "*", "/"};
        return ops[rng_() % 4];
    }

    std::string number_literal(double lo, double hi) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", uniform(lo, hi));
        std::string s = buf;
        if (!s.empty() && s[0] == '-') s = "(0 - " + s.substr(1) + ")";
        return s;
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

    std::mt19937_64 rng_;
};

}  // namespace sds_test
