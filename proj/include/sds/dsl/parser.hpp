#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "sds/dsl/ast.hpp"
#include "sds/errors.hpp"

namespace sds::dsl {

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"abs", "exp",  "clip", "min",       "max",
                                                   "sum", "norm", "square", "match_phase"};
    return names;
}

inline bool is_builtin(const std::string& name) {
    for (const auto& b : builtin_names())
        if (b == name) return true;
    return false;
}

namespace detail {

enum class Tok { End, Newline, Ident, Number, String, Punct };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double num = 0.0;
    char punct = 0;
    int line = 1;
    int col = 1;
};

/// Lexer with paren/bracket tracking: newlines inside a nested expression
/// are whitespace, newlines at depth zero terminate a sub-reward definition.
class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        const char c = src_[pos_];
        if (c == '\n') {
            advance();
            if (depth_ > 0) return next();
            t.kind = Tok::Newline;
            return t;
        }
        if (c == ';') {
            advance();
            t.kind = Tok::Newline;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                t.text += src_[pos_];
                advance();
            }
            t.kind = Tok::Ident;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            const char* start = src_.c_str() + pos_;
            char* end = nullptr;
            t.num = std::strtod(start, &end);
            const std::size_t len = static_cast<std::size_t>(end - start);
            t.text = src_.substr(pos_, len);
            for (std::size_t i = 0; i < len; ++i) advance();
            t.kind = Tok::Number;
            return t;
        }
        if (c == '"') {
            advance();
            while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
                t.text += src_[pos_];
                advance();
            }
            if (pos_ >= src_.size() || src_[pos_] != '"')
                fail(Errc::ParseError, locate(t, "unterminated string literal"));
            advance();
            t.kind = Tok::String;
            return t;
        }
        if (std::strchr("+-*/()[],.=", c)) {
            if (c == '(' || c == '[') ++depth_;
            if (c == ')' || c == ']') depth_ = std::max(0, depth_ - 1);
            advance();
            t.kind = Tok::Punct;
            t.punct = c;
            return t;
        }
        fail(Errc::ParseError, locate(t, std::string("unexpected character '") + c + "'"));
    }

    static std::string locate(const Token& t, const std::string& msg) {
        return msg + " at line " + std::to_string(t.line) + ", column " + std::to_string(t.col);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { cur_ = lexer_.next(); }

    RewardProgram parse_program(const std::string& source_text) {
        RewardProgram prog;
        prog.source_text = source_text;
        skip_newlines();
        while (cur_.kind != Tok::End) {
            prog.subs.push_back(parse_sub_def(prog));
            if (cur_.kind == Tok::Newline)
                skip_newlines();
            else if (cur_.kind != Tok::End)
                fail(Errc::ParseError,
                     Lexer::locate(cur_, "expected end of sub-reward definition"));
        }
        if (prog.subs.empty())
            fail(Errc::ParseError, "program defines no sub-rewards");
        for (std::size_t i = 0; i < prog.subs.size(); ++i)
            for (std::size_t j = i + 1; j < prog.subs.size(); ++j)
                if (prog.subs[i].name == prog.subs[j].name)
                    fail(Errc::ParseError,
                         "duplicate sub-reward name '" + prog.subs[i].name + "'");
        return prog;
    }

private:
    SubReward parse_sub_def(RewardProgram& prog) {
        if (cur_.kind != Tok::Ident)
            fail(Errc::ParseError, Lexer::locate(cur_, "expected sub-reward name"));
        SubReward sub;
        sub.name = cur_.text;
        sub.line = cur_.line;
        consume();
        expect_punct('=');
        sub.root = parse_expr(prog);
        // A literal leading factor is the component weight; hoisting keeps
        // the total identical and exposes the weight to rescaling.
        const Expr& root = prog.node(sub.root);
        if (root.kind == ExprKind::Binary && root.op == '*' &&
            prog.node(root.args[0]).kind == ExprKind::Number) {
            sub.weight = prog.node(root.args[0]).num;
            sub.root = root.args[1];
        }
        return sub;
    }

    int parse_expr(RewardProgram& prog) {
        int lhs = parse_term(prog);
        while (cur_.kind == Tok::Punct && (cur_.punct == '+' || cur_.punct == '-')) {
            const char op = cur_.punct;
            const Token at = cur_;
            consume();
            const int rhs = parse_term(prog);
            lhs = make_binary(prog, op, lhs, rhs, at);
        }
        return lhs;
    }

    int parse_term(RewardProgram& prog) {
        int lhs = parse_unary(prog);
        while (cur_.kind == Tok::Punct && (cur_.punct == '*' || cur_.punct == '/')) {
            const char op = cur_.punct;
            const Token at = cur_;
            consume();
            const int rhs = parse_unary(prog);
            lhs = make_binary(prog, op, lhs, rhs, at);
        }
        return lhs;
    }

    int parse_unary(RewardProgram& prog) {
        if (cur_.kind == Tok::Punct && cur_.punct == '-') {
            const Token at = cur_;
            consume();
            Expr e;
            e.kind = ExprKind::Unary;
            e.op = '-';
            e.args = {parse_unary(prog)};
            e.line = at.line;
            e.col = at.col;
            return add_node(prog, std::move(e));
        }
        return parse_postfix(prog);
    }

    int parse_postfix(RewardProgram& prog) {
        int node = parse_primary(prog);
        for (;;) {
            if (cur_.kind == Tok::Punct && cur_.punct == '.') {
                const Token at = cur_;
                consume();
                if (cur_.kind != Tok::Ident || cur_.text.size() != 1 ||
                    (cur_.text[0] != 'x' && cur_.text[0] != 'y' && cur_.text[0] != 'z'))
                    fail(Errc::ParseError,
                         Lexer::locate(cur_, "component access must be .x, .y, or .z"));
                Expr e;
                e.kind = ExprKind::Component;
                e.index = cur_.text[0] - 'x';
                e.args = {node};
                e.line = at.line;
                e.col = at.col;
                consume();
                node = add_node(prog, std::move(e));
            } else if (cur_.kind == Tok::Punct && cur_.punct == '[') {
                const Token at = cur_;
                consume();
                if (cur_.kind != Tok::Number || cur_.num != std::floor(cur_.num) || cur_.num < 0)
                    fail(Errc::ParseError,
                         Lexer::locate(cur_, "subscript must be a non-negative integer"));
                Expr e;
                e.kind = ExprKind::Index;
                e.index = static_cast<int>(cur_.num);
                e.args = {node};
                e.line = at.line;
                e.col = at.col;
                consume();
                expect_punct(']');
                node = add_node(prog, std::move(e));
            } else {
                break;
            }
        }
        return node;
    }

    int parse_primary(RewardProgram& prog) {
        const Token at = cur_;
        if (at.kind == Tok::Number) {
            consume();
            Expr e;
            e.kind = ExprKind::Number;
            e.num = at.num;
            e.line = at.line;
            e.col = at.col;
            return add_node(prog, std::move(e));
        }
        if (at.kind == Tok::String) {
            consume();
            Expr e;
            e.kind = ExprKind::String;
            e.str = at.text;
            e.line = at.line;
            e.col = at.col;
            return add_node(prog, std::move(e));
        }
        if (at.kind == Tok::Ident) {
            consume();
            if (cur_.kind == Tok::Punct && cur_.punct == '(') {
                if (!is_builtin(at.text))
                    fail(Errc::UnknownFunction,
                         Lexer::locate(at, "unknown builtin '" + at.text + "'"));
                consume();
                Expr e;
                e.kind = ExprKind::Call;
                e.str = at.text;
                e.line = at.line;
                e.col = at.col;
                if (!(cur_.kind == Tok::Punct && cur_.punct == ')')) {
                    e.args.push_back(parse_expr(prog));
                    while (cur_.kind == Tok::Punct && cur_.punct == ',') {
                        consume();
                        e.args.push_back(parse_expr(prog));
                    }
                }
                expect_punct(')');
                return add_node(prog, std::move(e));
            }
            Expr e;
            e.kind = ExprKind::Identifier;
            e.str = at.text;
            e.line = at.line;
            e.col = at.col;
            return add_node(prog, std::move(e));
        }
        if (at.kind == Tok::Punct && at.punct == '(') {
            consume();
            const int inner = parse_expr(prog);
            expect_punct(')');
            return inner;
        }
        if (at.kind == Tok::Punct && at.punct == '[') {
            consume();
            Expr e;
            e.kind = ExprKind::Vector;
            e.line = at.line;
            e.col = at.col;
            e.args.push_back(parse_expr(prog));
            while (cur_.kind == Tok::Punct && cur_.punct == ',') {
                consume();
                e.args.push_back(parse_expr(prog));
            }
            expect_punct(']');
            return add_node(prog, std::move(e));
        }
        fail(Errc::ParseError, Lexer::locate(at, "expected an expression"));
    }

    int make_binary(RewardProgram& prog, char op, int lhs, int rhs, const Token& at) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.op = op;
        e.args = {lhs, rhs};
        e.line = at.line;
        e.col = at.col;
        return add_node(prog, std::move(e));
    }

    static int add_node(RewardProgram& prog, Expr&& e) {
        prog.nodes.push_back(std::move(e));
        return static_cast<int>(prog.nodes.size()) - 1;
    }

    void expect_punct(char c) {
        if (cur_.kind != Tok::Punct || cur_.punct != c)
            fail(Errc::ParseError,
                 Lexer::locate(cur_, std::string("expected '") + c + "'"));
        consume();
    }

    void skip_newlines() {
        while (cur_.kind == Tok::Newline) consume();
    }

    void consume() { cur_ = lexer_.next(); }

    Lexer lexer_;
    Token cur_;
};

}  // namespace detail

/// Parses reward DSL source into a program. Throws Error(ParseError) with
/// line/column diagnostics, or Error(UnknownFunction) for unknown builtins.
inline RewardProgram parse(const std::string& source, const std::string& name = "reward") {
    detail::Parser parser(source);
    RewardProgram prog = parser.parse_program(source);
    prog.name = name;
    return prog;
}

/// Contents of all fenced code blocks (``` ... ```), in order.
inline std::vector<std::string> extract_candidates(const std::string& vlm_text) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t open = vlm_text.find("```", pos);
        if (open == std::string::npos) break;
        std::size_t body = vlm_text.find('\n', open + 3);  // skip the info string
        if (body == std::string::npos) break;
        ++body;
        const std::size_t close = vlm_text.find("```", body);
        if (close == std::string::npos) break;
        blocks.push_back(vlm_text.substr(body, close - body));
        pos = close + 3;
    }
    return blocks;
}

}  // namespace sds::dsl
