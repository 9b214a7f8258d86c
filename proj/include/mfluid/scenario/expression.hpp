#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "mfluid/core/errors.hpp"

// Closed-form profile expressions in one variable x:
//   numbers, x, pi, + - * / ^ (right associative), unary minus, parentheses,
//   sin cos tan exp log sqrt abs tanh, pow(a, b).

namespace mfluid::scenario {

class Expression {
public:
    Expression() = default;

    explicit Expression(std::string text) : text_(std::move(text)) {
        pos_ = 0;
        root_ = parse_sum();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    }

    [[nodiscard]] double operator()(double x) const { return eval(*root_, x); }
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    enum class Op { number, var, neg, add, sub, mul, div, pow, call };
    struct Node {
        Op op;
        double value = 0.0;
        std::string fn;
        std::vector<std::shared_ptr<const Node>> args;
    };
    using NodePtr = std::shared_ptr<const Node>;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression \"" + text_ + "\": " + what + " at position " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0, std::string fn = {}) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->value = value;
        n->fn = std::move(fn);
        n->args = std::move(args);
        return n;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = make(Op::add, {lhs, parse_product()});
            } else if (accept('-')) {
                lhs = make(Op::sub, {lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Op::mul, {lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make(Op::div, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make(Op::neg, {parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (accept('^')) return make(Op::pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr inner = parse_sum();
            if (!accept(')')) fail("missing ')'");
            return inner;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Op::number, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x") return make(Op::var);
            if (name == "pi") return make(Op::number, {}, std::numbers::pi);
            static const char* unary[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"};
            bool known = name == "pow";
            for (const char* u : unary) known = known || name == u;
            if (!known) {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            std::vector<NodePtr> args{parse_sum()};
            if (name == "pow") {
                if (!accept(',')) fail("pow needs two arguments");
                args.push_back(parse_sum());
            }
            if (!accept(')')) fail("missing ')'");
            return make(Op::call, std::move(args), 0.0, name);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    static double eval(const Node& n, double x) {
        switch (n.op) {
            case Op::number: return n.value;
            case Op::var: return x;
            case Op::neg: return -eval(*n.args[0], x);
            case Op::add: return eval(*n.args[0], x) + eval(*n.args[1], x);
            case Op::sub: return eval(*n.args[0], x) - eval(*n.args[1], x);
            case Op::mul: return eval(*n.args[0], x) * eval(*n.args[1], x);
            case Op::div: return eval(*n.args[0], x) / eval(*n.args[1], x);
            case Op::pow: return std::pow(eval(*n.args[0], x), eval(*n.args[1], x));
            case Op::call: break;
        }
        const double a = eval(*n.args[0], x);
        const std::string& f = n.fn;
        if (f == "sin") return std::sin(a);
        if (f == "cos") return std::cos(a);
        if (f == "tan") return std::tan(a);
        if (f == "exp") return std::exp(a);
        if (f == "log") return std::log(a);
        if (f == "sqrt") return std::sqrt(a);
        if (f == "abs") return std::abs(a);
        if (f == "tanh") return std::tanh(a);
        return std::pow(a, eval(*n.args[1], x));
    }

    std::string text_;
    std::size_t pos_ = 0;
    NodePtr root_;
};

}  // namespace mfluid::scenario
