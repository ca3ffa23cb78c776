#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace sds::dsl {

enum class ExprKind {
    Number,      // num
    String,      // str (builtin arguments only)
    Identifier,  // str
    Vector,      // args = elements
    Component,   // args[0], index = 0/1/2 for .x/.y/.z
    Index,       // args[0], index = subscript
    Unary,       // op = '-', args[0]
    Binary,      // op in + - * /, args[0], args[1]
    Call,        // str = builtin name, args
};

struct Expr {
    ExprKind kind = ExprKind::Number;
    double num = 0.0;
    std::string str;
    char op = 0;
    int index = 0;
    std::vector<int> args;  // node ids in the owning program's arena
    int line = 0;
    int col = 0;
};

struct SubReward {
    std::string name;
    double weight = 1.0;
    int root = -1;  // arena node id
    int line = 0;
};

enum class Provenance { Generated, Seeded };

/// A parsed reward program: named weighted sub-expressions over the
/// observation schema. Immutable after parse; nodes live in `nodes`.
struct RewardProgram {
    std::string name = "reward";
    std::vector<Expr> nodes;
    std::vector<SubReward> subs;
    std::string source_text;
    Provenance provenance = Provenance::Generated;

    const Expr& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
};

namespace detail {

/// Shortest decimal literal that parses back to exactly `v`.
inline std::string format_number(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline int precedence(char op) { return (op == '+' || op == '-') ? 1 : 2; }

inline void print_expr(const RewardProgram& p, int id, std::string& out, int parent_prec,
                       bool right_operand) {
    const Expr& e = p.node(id);
    switch (e.kind) {
        case ExprKind::Number:
            if (e.num < 0) {
                out += "(" + format_number(e.num) + ")";
            } else {
                out += format_number(e.num);
            }
            break;
        case ExprKind::String:
            out += '"' + e.str + '"';
            break;
        case ExprKind::Identifier:
            out += e.str;
            break;
        case ExprKind::Vector: {
            out += '[';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_expr(p, e.args[i], out, 0, false);
            }
            out += ']';
            break;
        }
        case ExprKind::Component:
            print_expr(p, e.args[0], out, 3, false);
            out += '.';
            out += "xyz"[e.index];
            break;
        case ExprKind::Index:
            print_expr(p, e.args[0], out, 3, false);
            out += '[' + std::to_string(e.index) + ']';
            break;
        case ExprKind::Unary:
            out += '-';
            print_expr(p, e.args[0], out, 3, false);
            break;
        case ExprKind::Binary: {
            const int prec = precedence(e.op);
            const bool need_parens = prec < parent_prec || (prec == parent_prec && right_operand);
            if (need_parens) out += '(';
            print_expr(p, e.args[0], out, prec, false);
            out += ' ';
            out += e.op;
            out += ' ';
            print_expr(p, e.args[1], out, prec, true);
            if (need_parens) out += ')';
            break;
        }
        case ExprKind::Call: {
            out += e.str + '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_expr(p, e.args[i], out, 0, false);
            }
            out += ')';
            break;
        }
    }
}

}  // namespace detail

/// Canonical text form; parse(pretty_print(p)) reproduces p's AST.
inline std::string pretty_print(const RewardProgram& p) {
    std::string out;
    for (const SubReward& sub : p.subs) {
        out += sub.name + " = ";
        if (sub.weight != 1.0) {
            // Parenthesize so the weight re-hoists on reparse.
            out += detail::format_number(sub.weight) + " * ";
            detail::print_expr(p, sub.root, out, 2, true);
        } else {
            detail::print_expr(p, sub.root, out, 0, false);
        }
        out += '\n';
    }
    return out;
}

/// Structural AST equality (names, weights, shapes, literal values).
inline bool ast_equal(const RewardProgram& a, const RewardProgram& b) {
    if (a.subs.size() != b.subs.size()) return false;
    auto eq_expr = [&](auto&& self, int ia, int ib) -> bool {
        const Expr& ea = a.node(ia);
        const Expr& eb = b.node(ib);
        if (ea.kind != eb.kind || ea.op != eb.op || ea.index != eb.index ||
            ea.str != eb.str || ea.args.size() != eb.args.size())
            return false;
        if (ea.kind == ExprKind::Number && ea.num != eb.num) return false;
        for (std::size_t i = 0; i < ea.args.size(); ++i)
            if (!self(self, ea.args[i], eb.args[i])) return false;
        return true;
    };
    for (std::size_t i = 0; i < a.subs.size(); ++i) {
        if (a.subs[i].name != b.subs[i].name || a.subs[i].weight != b.subs[i].weight)
            return false;
        if (!eq_expr(eq_expr, a.subs[i].root, b.subs[i].root)) return false;
    }
    return true;
}

}  // namespace sds::dsl
