#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sds/dsl/analysis.hpp"
#include "sds/errors.hpp"
#include "sds/gait.hpp"
#include "sds/observation.hpp"

namespace sds::dsl {

struct BreakdownEntry {
    std::string name;
    double raw = 0.0;       // sub-expression value before weighting
    double weighted = 0.0;  // weight * raw; the component's contribution
};

struct SubRewardBreakdown {
    std::vector<BreakdownEntry> components;
    double total = 0.0;
};

namespace detail {

inline GaitLabel template_by_id(int id) {
    switch (id) {
        case 0: return GaitLabel::Trot;
        case 1: return GaitLabel::Pace;
        case 2: return GaitLabel::Bound;
        default: return GaitLabel::Hop;
    }
}

/// Executes one compiled sub-reward. Throws Error(NumericError) naming the
/// sub-reward if any intermediate goes non-finite.
inline double run_vm(const std::vector<VmOp>& ops, const Observation& obs,
                     const std::string& sub_name) {
    Value stack[32];
    int top = -1;  // index of the current top of stack

    auto check_finite = [&](const Value& v) {
        for (int i = 0; i < v.len; ++i)
            if (!std::isfinite(v.data[i]))
                fail(Errc::NumericError,
                     "non-finite intermediate in sub-reward '" + sub_name + "'");
    };

    for (const VmOp& op : ops) {
        switch (op.code) {
            case OpCode::PushConst:
                stack[++top] = Value::scalar(op.imm);
                break;
            case OpCode::PushField: {
                const ObservationField& f = observation_schema()[static_cast<std::size_t>(op.a)];
                Value v;
                v.vec = f.length > 1;
                v.len = f.length;
                const double* src = f.data(obs);
                for (int i = 0; i < f.length; ++i) v.data[i] = src[i];
                stack[++top] = v;
                break;
            }
            case OpCode::MakeVec: {
                Value v;
                v.vec = true;
                v.len = op.a;
                for (int i = op.a - 1; i >= 0; --i) v.data[i] = stack[top--].s();
                stack[++top] = v;
                break;
            }
            case OpCode::Component:
            case OpCode::IndexOp:
                stack[top] = Value::scalar(stack[top].data[op.a]);
                break;
            case OpCode::Neg:
                for (int i = 0; i < stack[top].len; ++i) stack[top].data[i] = -stack[top].data[i];
                break;
            case OpCode::Add:
            case OpCode::Sub: {
                const Value b = stack[top--];
                Value& a = stack[top];
                const double sign = op.code == OpCode::Add ? 1.0 : -1.0;
                for (int i = 0; i < a.len; ++i) a.data[i] += sign * b.data[i];
                check_finite(a);
                break;
            }
            case OpCode::Mul: {
                const Value b = stack[top--];
                Value& a = stack[top];
                if (a.vec == b.vec) {  // scalar * scalar (vec*vec is rejected statically)
                    a.data[0] *= b.data[0];
                } else if (a.vec) {
                    for (int i = 0; i < a.len; ++i) a.data[i] *= b.data[0];
                } else {
                    const double s = a.data[0];
                    a = b;
                    for (int i = 0; i < a.len; ++i) a.data[i] *= s;
                }
                check_finite(a);
                break;
            }
            case OpCode::Div: {
                const Value b = stack[top--];
                Value& a = stack[top];
                for (int i = 0; i < a.len; ++i) a.data[i] /= b.data[0];
                check_finite(a);
                break;
            }
            case OpCode::Abs:
                for (int i = 0; i < stack[top].len; ++i)
                    stack[top].data[i] = std::abs(stack[top].data[i]);
                break;
            case OpCode::Square:
                for (int i = 0; i < stack[top].len; ++i)
                    stack[top].data[i] *= stack[top].data[i];
                check_finite(stack[top]);
                break;
            case OpCode::ExpOp:
                for (int i = 0; i < stack[top].len; ++i)
                    stack[top].data[i] = std::exp(stack[top].data[i]);
                check_finite(stack[top]);
                break;
            case OpCode::Clip: {
                const double hi = stack[top--].s();
                const double lo = stack[top--].s();
                Value& x = stack[top];
                for (int i = 0; i < x.len; ++i) x.data[i] = std::clamp(x.data[i], lo, hi);
                break;
            }
            case OpCode::MinOp: {
                const double b = stack[top--].s();
                stack[top] = Value::scalar(std::min(stack[top].s(), b));
                break;
            }
            case OpCode::MaxOp: {
                const double b = stack[top--].s();
                stack[top] = Value::scalar(std::max(stack[top].s(), b));
                break;
            }
            case OpCode::Sum: {
                double s = 0.0;
                for (int i = 0; i < stack[top].len; ++i) s += stack[top].data[i];
                stack[top] = Value::scalar(s);
                check_finite(stack[top]);
                break;
            }
            case OpCode::Norm: {
                double s = 0.0;
                for (int i = 0; i < stack[top].len; ++i)
                    s += stack[top].data[i] * stack[top].data[i];
                stack[top] = Value::scalar(std::sqrt(s));
                check_finite(stack[top]);
                break;
            }
            case OpCode::MatchPhase: {
                std::array<double, 4> contacts{};
                for (int i = 0; i < 4; ++i) contacts[i] = stack[top].data[i];
                stack[top] = Value::scalar(match_phase_score(contacts, template_by_id(op.a)));
                break;
            }
        }
    }
    const double result = stack[top].s();
    if (!std::isfinite(result))
        fail(Errc::NumericError, "non-finite result in sub-reward '" + sub_name + "'");
    return result;
}

}  // namespace detail

/// Deterministic evaluation of every sub-reward on one observation.
inline SubRewardBreakdown evaluate(const CompiledProgram& program, const Observation& obs) {
    SubRewardBreakdown breakdown;
    breakdown.components.reserve(program.size());
    for (std::size_t i = 0; i < program.size(); ++i) {
        BreakdownEntry entry;
        entry.name = program.sub_names[i];
        entry.raw = detail::run_vm(program.code[i], obs, program.sub_names[i]);
        entry.weighted = program.weights[i] * entry.raw;
        breakdown.total += entry.weighted;
        breakdown.components.push_back(std::move(entry));
    }
    return breakdown;
}

/// Allocation-free variant for the training hot loop: writes raw values
/// into `raw_out` (size >= program.size()) and returns the weighted total.
inline double evaluate_into(const CompiledProgram& program, const Observation& obs,
                            double* raw_out) {
    double total = 0.0;
    for (std::size_t i = 0; i < program.size(); ++i) {
        const double raw = detail::run_vm(program.code[i], obs, program.sub_names[i]);
        raw_out[i] = raw;
        total += program.weights[i] * raw;
    }
    return total;
}

/// Full validation: static analysis plus the runtime half, a probe
/// evaluation on the canonical zero-state observation that must produce
/// finite values.
inline ValidationReport validate(const RewardProgram& prog) {
    ValidationReport report = analyze(prog);
    if (!report.ok) return report;
    const CompiledProgram compiled = compile(prog);
    try {
        (void)evaluate(compiled, zero_observation());
    } catch (const Error& e) {
        report.add_failure("runtime-probe",
                           std::string("probe evaluation failed: ") + e.what());
        report.ok = false;
    }
    return report;
}

/// Parse + validate in one reporting surface: parser failures surface as
/// failed "parse" / "unknown-function" checks instead of throwing.
inline ValidationReport validate_source(const std::string& source,
                                        RewardProgram* parsed_out = nullptr) {
    RewardProgram prog;
    try {
        prog = parse(source);
    } catch (const Error& e) {
        ValidationReport report;
        for (const auto& name : validation_check_names()) report.check(name);
        report.add_failure(e.code() == Errc::UnknownFunction ? "unknown-function" : "parse",
                           e.what());
        report.ok = false;
        return report;
    }
    if (parsed_out) *parsed_out = prog;
    return validate(prog);
}

}  // namespace sds::dsl
