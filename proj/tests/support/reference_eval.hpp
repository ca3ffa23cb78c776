// Independent tree-walking evaluator for reward programs. Deliberately
// shares no code with the VM in sds/dsl/interpreter.hpp: values are plain
// std::vector<double>, evaluation recurses over the AST, and match_phase
// re-derives template synchrony from its own phase table.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sds/dsl/ast.hpp"
#include "sds/observation.hpp"

namespace sds_test {

struct RefValue {
    std::vector<double> v;  // size 1 == scalar
    bool scalar() const { return v.size() == 1; }
    double s() const { return v[0]; }
};

struct RefNonFinite : std::runtime_error {
    RefNonFinite() : std::runtime_error("non-finite") {}
};

inline void ref_check(const RefValue& value) {
    for (double x : value.v)
        if (!std::isfinite(x)) throw RefNonFinite();
}

inline double ref_match_phase(const std::vector<double>& contacts, const std::string& tmpl) {
    // Template phases, duplicated on purpose from the production table.
    double phase[4] = {0, 0, 0, 0};
    if (tmpl == "trot") {
        phase[1] = phase[2] = 0.5;
    } else if (tmpl == "pace") {
        phase[1] = phase[3] = 0.5;
    } else if (tmpl == "bound") {
        phase[2] = phase[3] = 0.5;
    }
    int agree = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const bool want_sync = phase[i] == phase[j];
            const bool same = (contacts[i] > 0.5) == (contacts[j] > 0.5);
            if (same == want_sync) ++agree;
        }
    return agree / 6.0;
}

inline RefValue ref_field(const sds::Observation& obs, const std::string& name) {
    auto vec3 = [](const std::array<double, 3>& a) {
        return RefValue{{a[0], a[1], a[2]}};
    };
    if (name == "base_lin_vel") return vec3(obs.base_lin_vel);
    if (name == "base_ang_vel") return vec3(obs.base_ang_vel);
    if (name == "base_height") return RefValue{{obs.base_height}};
    if (name == "gravity_proj") return vec3(obs.gravity_proj);
    if (name == "joint_pos") return RefValue{{obs.joint_pos.begin(), obs.joint_pos.end()}};
    if (name == "joint_vel") return RefValue{{obs.joint_vel.begin(), obs.joint_vel.end()}};
    if (name == "foot_contacts")
        return RefValue{{obs.foot_contacts.begin(), obs.foot_contacts.end()}};
    if (name == "prev_action") return RefValue{{obs.prev_action.begin(), obs.prev_action.end()}};
    if (name == "command") return vec3(obs.command);
    throw std::runtime_error("reference evaluator: unknown field " + name);
}

inline RefValue ref_eval_expr(const sds::dsl::RewardProgram& p, int id,
                              const sds::Observation& obs) {
    using sds::dsl::ExprKind;
    const sds::dsl::Expr& e = p.node(id);
    auto eval = [&](int child) { return ref_eval_expr(p, child, obs); };
    switch (e.kind) {
        case ExprKind::Number:
            return RefValue{{e.num}};
        case ExprKind::String:
            throw std::runtime_error("reference evaluator: free-standing string");
        case ExprKind::Identifier:
            return ref_field(obs, e.str);
        case ExprKind::Vector: {
            RefValue out;
            for (int arg : e.args) out.v.push_back(eval(arg).s());
            return out;
        }
        case ExprKind::Component:
        case ExprKind::Index:
            return RefValue{{eval(e.args[0]).v.at(static_cast<std::size_t>(e.index))}};
        case ExprKind::Unary: {
            RefValue out = eval(e.args[0]);
            for (double& x : out.v) x = -x;
            return out;
        }
        case ExprKind::Binary: {
            RefValue a = eval(e.args[0]);
            RefValue b = eval(e.args[1]);
            RefValue out;
            if (e.op == '+' || e.op == '-') {
                out.v.resize(a.v.size());
                for (std::size_t i = 0; i < a.v.size(); ++i)
                    out.v[i] = e.op == '+' ? a.v[i] + b.v[i] : a.v[i] - b.v[i];
            } else if (e.op == '*') {
                if (a.scalar() && !b.scalar()) std::swap(a, b);
                out.v = a.v;
                for (double& x : out.v) x *= b.s();
            } else {
                out.v = a.v;
                for (double& x : out.v) x /= b.s();
            }
            ref_check(out);
            return out;
        }
        case ExprKind::Call: {
            if (e.str == "abs" || e.str == "square" || e.str == "exp") {
                RefValue out = eval(e.args[0]);
                for (double& x : out.v) {
                    if (e.str == "abs") x = std::fabs(x);
                    else if (e.str == "square") x = x * x;
                    else x = std::exp(x);
                }
                ref_check(out);
                return out;
            }
            if (e.str == "sum" || e.str == "norm") {
                const RefValue in = eval(e.args[0]);
                double acc = 0.0;
                for (double x : in.v) acc += e.str == "sum" ? x : x * x;
                RefValue out{{e.str == "sum" ? acc : std::sqrt(acc)}};
                ref_check(out);
                return out;
            }
            if (e.str == "min" || e.str == "max") {
                const double a = eval(e.args[0]).s();
                const double b = eval(e.args[1]).s();
                return RefValue{{e.str == "min" ? std::fmin(a, b) : std::fmax(a, b)}};
            }
            if (e.str == "clip") {
                RefValue x = eval(e.args[0]);
                const double lo = eval(e.args[1]).s();
                const double hi = eval(e.args[2]).s();
                for (double& v : x.v) {
                    if (v < lo) v = lo;
                    if (v > hi) v = hi;
                }
                return x;
            }
            if (e.str == "match_phase") {
                const RefValue contacts = eval(e.args[0]);
                return RefValue{{ref_match_phase(contacts.v, p.node(e.args[1]).str)}};
            }
            throw std::runtime_error("reference evaluator: unknown builtin " + e.str);
        }
    }
    throw std::runtime_error("reference evaluator: bad node");
}

struct RefBreakdown {
    std::vector<double> raw;
    std::vector<double> weighted;
    double total = 0.0;
};

/// Throws RefNonFinite when any intermediate or result is non-finite.
inline RefBreakdown ref_evaluate(const sds::dsl::RewardProgram& p, const sds::Observation& obs) {
    RefBreakdown out;
    for (const auto& sub : p.subs) {
        const RefValue v = ref_eval_expr(p, sub.root, obs);
        if (!std::isfinite(v.s())) throw RefNonFinite();
        out.raw.push_back(v.s());
        out.weighted.push_back(sub.weight * v.s());
        out.total += sub.weight * v.s();
    }
    return out;
}

}  // namespace sds_test
