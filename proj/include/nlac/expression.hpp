#pragma once

#include "nlac/geometry.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlac {

struct SyntaxError : std::runtime_error {
    std::size_t position;
    SyntaxError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arithmetic expressions over variables x, y and the constant pi:
/// + - * / ^ (right-associative), unary minus, sin cos exp sqrt abs.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text);

    double eval(double x, double y = 0.0) const;
    double operator()(Point p) const { return eval(p.x, p.y); }

    /// Canonical printing (normalized whitespace, minimal parentheses);
    /// parse(to_string()) reproduces the same tree.
    std::string to_string() const;

    bool empty() const { return nodes_.empty(); }

private:
    enum class Op : unsigned char { Num, VarX, VarY, Pi, Add, Sub, Mul, Div, Pow, Neg, Fun };
    struct Node {
        Op op;
        double num = 0.0;
        int fun = -1;  // index into the function table
        int a = -1, b = -1;
    };
    std::vector<Node> nodes_;
    int root_ = -1;

    friend class ExprParser;
    double eval_node(int idx, double x, double y) const;
    void print_node(int idx, int parent_prec, bool right_side, std::string& out) const;
};

}  // namespace nlac
