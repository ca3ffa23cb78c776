#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/dsl/ast.hpp"
#include "sds/dsl/parser.hpp"
#include "sds/errors.hpp"
#include "sds/observation.hpp"

namespace sds::dsl {

/// Scalar-or-vector runtime value. Vectors are capped at 16 lanes, enough
/// for every observation field and literal the grammar admits.
struct Value {
    bool vec = false;
    int len = 1;
    std::array<double, 16> data{};

    static Value scalar(double v) {
        Value out;
        out.data[0] = v;
        return out;
    }
    double s() const { return data[0]; }
};

enum class OpCode : std::uint8_t {
    PushConst,
    PushField,   // a = observation schema index
    MakeVec,     // a = element count
    Component,   // a = lane
    IndexOp,     // a = lane
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Abs,
    Square,
    ExpOp,
    Clip,
    MinOp,
    MaxOp,
    Sum,
    Norm,
    MatchPhase,  // a = gait template id
};

struct VmOp {
    OpCode code;
    int a = 0;
    double imm = 0.0;
};

/// Validated, executable form of a reward program. Weights stay adjustable
/// so training-time rescaling can act without recompiling.
struct CompiledProgram {
    std::string program_name;
    std::vector<std::string> sub_names;
    std::vector<double> weights;
    std::vector<std::vector<VmOp>> code;

    std::size_t size() const { return sub_names.size(); }
    int index_of(const std::string& sub) const {
        for (std::size_t i = 0; i < sub_names.size(); ++i)
            if (sub_names[i] == sub) return static_cast<int>(i);
        return -1;
    }
};

struct CheckResult {
    std::string check;
    bool passed = true;
    std::vector<std::string> failures;
};

struct ValidationReport {
    bool ok = false;
    std::vector<CheckResult> checks;

    CheckResult& check(const std::string& name) {
        for (auto& c : checks)
            if (c.check == name) return c;
        checks.push_back({name, true, {}});
        return checks.back();
    }
    void add_failure(const std::string& name, const std::string& message) {
        CheckResult& c = check(name);
        c.passed = false;
        c.failures.push_back(message);
    }
    bool passed(const std::string& name) const {
        for (const auto& c : checks)
            if (c.check == name) return c.passed;
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["ok"] = ok;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks)
            j["checks"].push_back({{"check", c.check},
                                   {"passed", c.passed},
                                   {"failures", c.failures}});
        return j;
    }
};

inline const std::vector<std::string>& validation_check_names() {
    static const std::vector<std::string> names = {
        "parse",             "unknown-function", "identifier-resolution",
        "arity",             "shape",            "index-bounds",
        "constant-division", "runtime-probe"};
    return names;
}

inline const std::vector<std::string>& gait_template_names() {
    static const std::vector<std::string> names = {"trot", "pace", "bound", "hop"};
    return names;
}

inline int gait_template_id(const std::string& name) {
    const auto& names = gait_template_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

namespace detail {

struct Shape {
    bool vec = false;
    int len = 1;
    bool is_string = false;
    bool failed = false;  // poisoned; suppress cascading diagnostics

    static Shape scalar() { return {}; }
    static Shape vector(int n) { return {true, n, false, false}; }
    static Shape string() { return {false, 1, true, false}; }
    static Shape poison() { return {false, 1, false, true}; }
};

inline std::string at(const Expr& e) {
    return " (line " + std::to_string(e.line) + ", column " + std::to_string(e.col) + ")";
}

class Analyzer {
public:
    Analyzer(const RewardProgram& prog, ValidationReport& report)
        : prog_(prog), report_(report) {}

    Shape infer(int id) {
        const Expr& e = prog_.node(id);
        switch (e.kind) {
            case ExprKind::Number:
                return Shape::scalar();
            case ExprKind::String:
                return Shape::string();
            case ExprKind::Identifier: {
                const ObservationField* field = find_observation_field(e.str);
                if (!field) {
                    report_.add_failure("identifier-resolution",
                                        "unknown identifier '" + e.str + "'" + at(e));
                    return Shape::poison();
                }
                return field->length == 1 ? Shape::scalar() : Shape::vector(field->length);
            }
            case ExprKind::Vector: {
                if (e.args.size() > 16) {
                    report_.add_failure("shape", "vector literal longer than 16 lanes" + at(e));
                    return Shape::poison();
                }
                bool bad = false;
                for (int arg : e.args) {
                    const Shape s = infer(arg);
                    if (s.failed) bad = true;
                    else if (s.vec || s.is_string) {
                        report_.add_failure("shape",
                                            "vector literal elements must be scalars" + at(e));
                        bad = true;
                    }
                }
                return bad ? Shape::poison() : Shape::vector(static_cast<int>(e.args.size()));
            }
            case ExprKind::Component: {
                const Shape s = infer(e.args[0]);
                if (s.failed) return s;
                if (!s.vec || e.index >= s.len) {
                    report_.add_failure("shape", "component access needs a vector with at least " +
                                                     std::to_string(e.index + 1) + " lanes" + at(e));
                    return Shape::poison();
                }
                return Shape::scalar();
            }
            case ExprKind::Index: {
                const Shape s = infer(e.args[0]);
                if (s.failed) return s;
                if (!s.vec) {
                    report_.add_failure("shape", "subscript applied to a scalar" + at(e));
                    return Shape::poison();
                }
                if (e.index >= s.len) {
                    report_.add_failure("index-bounds",
                                        "index " + std::to_string(e.index) + " out of range for " +
                                            std::to_string(s.len) + "-lane vector" + at(e));
                    return Shape::poison();
                }
                return Shape::scalar();
            }
            case ExprKind::Unary:
                return infer(e.args[0]);
            case ExprKind::Binary:
                return infer_binary(e);
            case ExprKind::Call:
                return infer_call(e);
        }
        return Shape::poison();
    }

private:
    Shape infer_binary(const Expr& e) {
        const Shape a = infer(e.args[0]);
        const Shape b = infer(e.args[1]);
        if (a.failed || b.failed) return Shape::poison();
        if (a.is_string || b.is_string) {
            report_.add_failure("shape", "strings are only valid as match_phase arguments" + at(e));
            return Shape::poison();
        }
        if (e.op == '/') {
            if (const std::optional<Value> rhs = const_fold(e.args[1])) {
                bool zero = false;
                for (int i = 0; i < rhs->len; ++i) zero = zero || rhs->data[i] == 0.0;
                if (zero)
                    report_.add_failure("constant-division", "division by constant zero" + at(e));
            }
        }
        switch (e.op) {
            case '+':
            case '-':
                if (a.vec != b.vec || (a.vec && a.len != b.len)) {
                    report_.add_failure("shape", shape_msg(e, a, b));
                    return Shape::poison();
                }
                return a;
            case '*':
                if (a.vec && b.vec) {
                    report_.add_failure("shape", shape_msg(e, a, b));
                    return Shape::poison();
                }
                return a.vec ? a : b;
            case '/':
                if (b.vec) {
                    report_.add_failure("shape", "division by a vector" + at(e));
                    return Shape::poison();
                }
                return a;
        }
        return Shape::poison();
    }

    Shape infer_call(const Expr& e) {
        const std::string& fn = e.str;
        auto expect_arity = [&](std::size_t n) {
            if (e.args.size() != n) {
                report_.add_failure("arity", fn + " expects " + std::to_string(n) +
                                                 " argument(s), got " +
                                                 std::to_string(e.args.size()) + at(e));
                return false;
            }
            return true;
        };

        if (fn == "abs" || fn == "square" || fn == "exp") {
            if (!expect_arity(1)) return Shape::poison();
            const Shape s = infer(e.args[0]);
            if (s.failed) return s;
            if (s.is_string) {
                report_.add_failure("shape", fn + " applied to a string" + at(e));
                return Shape::poison();
            }
            return s;
        }
        if (fn == "sum" || fn == "norm") {
            if (!expect_arity(1)) return Shape::poison();
            const Shape s = infer(e.args[0]);
            if (s.failed) return s;
            if (!s.vec) {
                report_.add_failure("shape", fn + " expects a vector" + at(e));
                return Shape::poison();
            }
            return Shape::scalar();
        }
        if (fn == "min" || fn == "max") {
            if (!expect_arity(2)) return Shape::poison();
            const Shape a = infer(e.args[0]);
            const Shape b = infer(e.args[1]);
            if (a.failed || b.failed) return Shape::poison();
            if (a.vec || b.vec || a.is_string || b.is_string) {
                report_.add_failure("shape", fn + " expects scalar arguments" + at(e));
                return Shape::poison();
            }
            return Shape::scalar();
        }
        if (fn == "clip") {
            if (!expect_arity(3)) return Shape::poison();
            const Shape x = infer(e.args[0]);
            const Shape lo = infer(e.args[1]);
            const Shape hi = infer(e.args[2]);
            if (x.failed || lo.failed || hi.failed) return Shape::poison();
            if (x.is_string || lo.vec || hi.vec || lo.is_string || hi.is_string) {
                report_.add_failure("shape", "clip expects (value, scalar lo, scalar hi)" + at(e));
                return Shape::poison();
            }
            return x;
        }
        if (fn == "match_phase") {
            if (!expect_arity(2)) return Shape::poison();
            const Shape c = infer(e.args[0]);
            if (c.failed) return c;
            if (!c.vec || c.len != 4) {
                report_.add_failure("shape", "match_phase expects 4 foot contacts" + at(e));
                return Shape::poison();
            }
            const Expr& tmpl = prog_.node(e.args[1]);
            if (tmpl.kind != ExprKind::String || gait_template_id(tmpl.str) < 0) {
                report_.add_failure("shape",
                                    "match_phase template must be one of \"trot\", \"pace\", "
                                    "\"bound\", \"hop\"" + at(e));
                return Shape::poison();
            }
            return Shape::scalar();
        }
        report_.add_failure("unknown-function", "unknown builtin '" + fn + "'" + at(e));
        return Shape::poison();
    }

    /// Folds literal arithmetic (numbers, vectors of numbers, + - * / and
    /// unary minus). Anything touching an observation stays unfolded.
    std::optional<Value> const_fold(int id) const {
        const Expr& e = prog_.node(id);
        switch (e.kind) {
            case ExprKind::Number:
                return Value::scalar(e.num);
            case ExprKind::Vector: {
                Value v;
                v.vec = true;
                v.len = static_cast<int>(e.args.size());
                if (v.len > 16) return std::nullopt;
                for (std::size_t i = 0; i < e.args.size(); ++i) {
                    const auto elem = const_fold(e.args[i]);
                    if (!elem || elem->vec) return std::nullopt;
                    v.data[i] = elem->s();
                }
                return v;
            }
            case ExprKind::Unary: {
                auto v = const_fold(e.args[0]);
                if (!v) return std::nullopt;
                for (int i = 0; i < v->len; ++i) v->data[i] = -v->data[i];
                return v;
            }
            case ExprKind::Binary: {
                const auto a = const_fold(e.args[0]);
                const auto b = const_fold(e.args[1]);
                if (!a || !b || a->vec || b->vec) return std::nullopt;
                switch (e.op) {
                    case '+': return Value::scalar(a->s() + b->s());
                    case '-': return Value::scalar(a->s() - b->s());
                    case '*': return Value::scalar(a->s() * b->s());
                    case '/': return b->s() == 0.0 ? std::nullopt
                                                   : std::optional<Value>(Value::scalar(a->s() / b->s()));
                }
                return std::nullopt;
            }
            default:
                return std::nullopt;
        }
    }

    std::string shape_msg(const Expr& e, const Shape& a, const Shape& b) const {
        auto desc = [](const Shape& s) {
            return s.vec ? "vector[" + std::to_string(s.len) + "]" : std::string("scalar");
        };
        return std::string("operator '") + e.op + "' cannot combine " + desc(a) + " and " +
               desc(b) + at(e);
    }

    const RewardProgram& prog_;
    ValidationReport& report_;
};

inline void compile_expr(const RewardProgram& prog, int id, std::vector<VmOp>& out) {
    const Expr& e = prog.node(id);
    switch (e.kind) {
        case ExprKind::Number:
            out.push_back({OpCode::PushConst, 0, e.num});
            break;
        case ExprKind::String:
            break;  // consumed by the enclosing match_phase
        case ExprKind::Identifier: {
            const ObservationField* field = find_observation_field(e.str);
            int idx = 0;
            for (const auto& f : observation_schema()) {
                if (&f == field) break;
                ++idx;
            }
            out.push_back({OpCode::PushField, idx, 0.0});
            break;
        }
        case ExprKind::Vector:
            for (int arg : e.args) compile_expr(prog, arg, out);
            out.push_back({OpCode::MakeVec, static_cast<int>(e.args.size()), 0.0});
            break;
        case ExprKind::Component:
            compile_expr(prog, e.args[0], out);
            out.push_back({OpCode::Component, e.index, 0.0});
            break;
        case ExprKind::Index:
            compile_expr(prog, e.args[0], out);
            out.push_back({OpCode::IndexOp, e.index, 0.0});
            break;
        case ExprKind::Unary:
            compile_expr(prog, e.args[0], out);
            out.push_back({OpCode::Neg, 0, 0.0});
            break;
        case ExprKind::Binary:
            compile_expr(prog, e.args[0], out);
            compile_expr(prog, e.args[1], out);
            switch (e.op) {
                case '+': out.push_back({OpCode::Add, 0, 0.0}); break;
                case '-': out.push_back({OpCode::Sub, 0, 0.0}); break;
                case '*': out.push_back({OpCode::Mul, 0, 0.0}); break;
                case '/': out.push_back({OpCode::Div, 0, 0.0}); break;
            }
            break;
        case ExprKind::Call: {
            if (e.str == "match_phase") {
                compile_expr(prog, e.args[0], out);
                out.push_back(
                    {OpCode::MatchPhase, gait_template_id(prog.node(e.args[1]).str), 0.0});
                break;
            }
            for (int arg : e.args) compile_expr(prog, arg, out);
            if (e.str == "abs") out.push_back({OpCode::Abs, 0, 0.0});
            else if (e.str == "square") out.push_back({OpCode::Square, 0, 0.0});
            else if (e.str == "exp") out.push_back({OpCode::ExpOp, 0, 0.0});
            else if (e.str == "clip") out.push_back({OpCode::Clip, 0, 0.0});
            else if (e.str == "min") out.push_back({OpCode::MinOp, 0, 0.0});
            else if (e.str == "max") out.push_back({OpCode::MaxOp, 0, 0.0});
            else if (e.str == "sum") out.push_back({OpCode::Sum, 0, 0.0});
            else if (e.str == "norm") out.push_back({OpCode::Norm, 0, 0.0});
            break;
        }
    }
}

}  // namespace detail

/// Static validation: identifier resolution, arity, shapes, index bounds,
/// and constant division. The runtime probe is appended by validate() in
/// interpreter.hpp once the program is executable.
inline ValidationReport analyze(const RewardProgram& prog) {
    ValidationReport report;
    for (const auto& name : validation_check_names()) report.check(name);
    for (const SubReward& sub : prog.subs) {
        detail::Analyzer analyzer(prog, report);
        const detail::Shape s = analyzer.infer(sub.root);
        if (!s.failed && (s.vec || s.is_string))
            report.add_failure("shape", "sub-reward '" + sub.name + "' must evaluate to a scalar");
        if (!std::isfinite(sub.weight))
            report.add_failure("shape", "sub-reward '" + sub.name + "' has a non-finite weight");
    }
    report.ok = true;
    for (const auto& c : report.checks) report.ok = report.ok && c.passed;
    return report;
}

/// Lowers a statically valid program to stack-machine code.
inline CompiledProgram compile(const RewardProgram& prog) {
    const ValidationReport report = analyze(prog);
    require(report.ok, Errc::InvalidInput,
            "cannot compile a program that failed static validation");
    CompiledProgram cp;
    cp.program_name = prog.name;
    for (const SubReward& sub : prog.subs) {
        cp.sub_names.push_back(sub.name);
        cp.weights.push_back(sub.weight);
        std::vector<VmOp> ops;
        detail::compile_expr(prog, sub.root, ops);
        cp.code.push_back(std::move(ops));
    }
    return cp;
}

}  // namespace sds::dsl
