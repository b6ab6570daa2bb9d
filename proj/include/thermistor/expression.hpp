#pragma once

// Tiny expression grammar for manufactured data: +, -, *, /, sin, cos, exp,
// variables x and y, parentheses, decimal literals. Recursive descent with
// standard precedence; unary minus binds tighter than * and /.

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "thermistor/errors.hpp"

namespace thermistor {

class Expr {
public:
    static Expr parse(const std::string& text) {
        Parser p{text, 0};
        Expr e;
        e.source_ = text;
        e.root_ = p.parse_sum();
        p.skip_ws();
        if (p.pos != text.size())
            throw config_error("expression: unexpected input at position " +
                               std::to_string(p.pos + 1) + " in '" + text + "'");
        return e;
    }

    double eval(double x, double y) const {
        if (!root_) throw config_error("expression: empty");
        return eval_node(*root_, x, y);
    }

    const std::string& source() const { return source_; }
    bool empty() const { return root_ == nullptr; }

private:
    enum class Op : std::uint8_t { num, var_x, var_y, add, sub, mul, div, neg, sin, cos, exp };

    struct Node {
        Op op;
        double value = 0.0;
        std::unique_ptr<Node> a, b;
    };

    using NodePtr = std::unique_ptr<Node>;

    static NodePtr make_node(Op op) {
        auto n = std::make_unique<Node>();
        n->op = op;
        return n;
    }

    std::shared_ptr<const Node> root_; // immutable AST, shared across copies
    std::string source_;

    static double eval_node(const Node& n, double x, double y) {
        switch (n.op) {
            case Op::num: return n.value;
            case Op::var_x: return x;
            case Op::var_y: return y;
            case Op::add: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
            case Op::sub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
            case Op::mul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
            case Op::div: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
            case Op::neg: return -eval_node(*n.a, x, y);
            case Op::sin: return std::sin(eval_node(*n.a, x, y));
            case Op::cos: return std::cos(eval_node(*n.a, x, y));
            case Op::exp: return std::exp(eval_node(*n.a, x, y));
        }
        return 0.0;
    }

    struct Parser {
        const std::string& s;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        [[noreturn]] void fail(const std::string& what) {
            throw config_error("expression: " + what + " at position " +
                               std::to_string(pos + 1) + " in '" + s + "'");
        }

        NodePtr parse_sum() {
            NodePtr left = parse_term();
            for (;;) {
                if (accept('+')) {
                    auto n = make_node(Op::add);
                    n->a = std::move(left);
                    n->b = parse_term();
                    left = std::move(n);
                } else if (accept('-')) {
                    auto n = make_node(Op::sub);
                    n->a = std::move(left);
                    n->b = parse_term();
                    left = std::move(n);
                } else {
                    return left;
                }
            }
        }

        NodePtr parse_term() {
            NodePtr left = parse_unary();
            for (;;) {
                if (accept('*')) {
                    auto n = make_node(Op::mul);
                    n->a = std::move(left);
                    n->b = parse_unary();
                    left = std::move(n);
                } else if (accept('/')) {
                    auto n = make_node(Op::div);
                    n->a = std::move(left);
                    n->b = parse_unary();
                    left = std::move(n);
                } else {
                    return left;
                }
            }
        }

        NodePtr parse_unary() {
            if (accept('-')) {
                auto n = make_node(Op::neg);
                n->a = parse_unary();
                return n;
            }
            return parse_primary();
        }

        NodePtr parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of input");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                NodePtr inner = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                char* end = nullptr;
                const double v = std::strtod(s.c_str() + pos, &end);
                if (end == s.c_str() + pos) fail("bad number");
                pos = static_cast<std::size_t>(end - s.c_str());
                auto n = make_node(Op::num);
                n->value = v;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
                const std::string id = s.substr(start, pos - start);
                if (id == "x") return make_node(Op::var_x);
                if (id == "y") return make_node(Op::var_y);
                Op op;
                if (id == "sin")
                    op = Op::sin;
                else if (id == "cos")
                    op = Op::cos;
                else if (id == "exp")
                    op = Op::exp;
                else
                    fail("unknown identifier '" + id + "'");
                if (!accept('(')) fail("expected '(' after '" + id + "'");
                auto n = make_node(op);
                n->a = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return n;
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };
};

} // namespace thermistor
