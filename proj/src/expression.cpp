#include "nlac/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace nlac {

namespace {

constexpr std::array<const char*, 5> kFuns = {"sin", "cos", "exp", "sqrt", "abs"};

int fun_index(const std::string& name) {
    for (size_t i = 0; i < kFuns.size(); ++i)
        if (name == kFuns[i]) return static_cast<int>(i);
    return -1;
}

}  // namespace

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    Expression run() {
        Expression e;
        nodes_ = &e.nodes_;
        e.root_ = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    using Op = void;  // unused alias guard
    const std::string& text_;
    std::size_t pos_ = 0;
    std::vector<Expression::Node>* nodes_ = nullptr;

    int add(Expression::Node n) {
        nodes_->push_back(n);
        return static_cast<int>(nodes_->size() - 1);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    // expr := term (('+'|'-') term)*
    int parse_expr() {
        int left = parse_term();
        for (;;) {
            if (consume('+')) {
                int right = parse_term();
                left = add({Expression::Node{.op = Expression::Op::Add, .a = left, .b = right}});
            } else if (consume('-')) {
                int right = parse_term();
                left = add({Expression::Node{.op = Expression::Op::Sub, .a = left, .b = right}});
            } else {
                return left;
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    int parse_term() {
        int left = parse_unary();
        for (;;) {
            if (consume('*')) {
                int right = parse_unary();
                left = add({Expression::Node{.op = Expression::Op::Mul, .a = left, .b = right}});
            } else if (consume('/')) {
                int right = parse_unary();
                left = add({Expression::Node{.op = Expression::Op::Div, .a = left, .b = right}});
            } else {
                return left;
            }
        }
    }

    // unary := '-' unary | power
    int parse_unary() {
        if (consume('-')) {
            int inner = parse_unary();
            return add({Expression::Node{.op = Expression::Op::Neg, .a = inner}});
        }
        return parse_power();
    }

    // power := primary ('^' unary)?   (right-associative; -x^2 = -(x^2))
    int parse_power() {
        int base = parse_primary();
        if (consume('^')) {
            int expo = parse_unary();
            return add({Expression::Node{.op = Expression::Op::Pow, .a = base, .b = expo}});
        }
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            skip_ws();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return inner;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    int parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;  // 'e' belongs to an identifier context; not a valid exponent
            }
        }
        try {
            const double v = std::stod(text_.substr(start, pos_ - start));
            return add({Expression::Node{.op = Expression::Op::Num, .num = v}});
        } catch (const std::exception&) {
            throw SyntaxError("malformed number", start);
        }
    }

    int parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return add({Expression::Node{.op = Expression::Op::VarX}});
        if (name == "y") return add({Expression::Node{.op = Expression::Op::VarY}});
        if (name == "pi") return add({Expression::Node{.op = Expression::Op::Pi}});
        const int fi = fun_index(name);
        if (fi >= 0) {
            skip_ws();
            if (!consume('(')) throw SyntaxError("expected '(' after function '" + name + "'", pos_);
            int arg = parse_expr();
            skip_ws();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return add({Expression::Node{.op = Expression::Op::Fun, .fun = fi, .a = arg}});
        }
        throw SyntaxError("unknown identifier '" + name + "'", start);
    }
};

Expression Expression::parse(const std::string& text) { return ExprParser(text).run(); }

double Expression::eval_node(int idx, double x, double y) const {
    const Node& n = nodes_[idx];
    switch (n.op) {
        case Op::Num: return n.num;
        case Op::VarX: return x;
        case Op::VarY: return y;
        case Op::Pi: return std::numbers::pi;
        case Op::Add: return eval_node(n.a, x, y) + eval_node(n.b, x, y);
        case Op::Sub: return eval_node(n.a, x, y) - eval_node(n.b, x, y);
        case Op::Mul: return eval_node(n.a, x, y) * eval_node(n.b, x, y);
        case Op::Div: {
            const double den = eval_node(n.b, x, y);
            if (den == 0.0) throw EvalError("division by zero");
            return eval_node(n.a, x, y) / den;
        }
        case Op::Pow: return std::pow(eval_node(n.a, x, y), eval_node(n.b, x, y));
        case Op::Neg: return -eval_node(n.a, x, y);
        case Op::Fun: {
            const double a = eval_node(n.a, x, y);
            switch (n.fun) {
                case 0: return std::sin(a);
                case 1: return std::cos(a);
                case 2: return std::exp(a);
                case 3:
                    if (a < 0.0) throw EvalError("sqrt of a negative value");
                    return std::sqrt(a);
                default: return std::abs(a);
            }
        }
    }
    throw EvalError("corrupt expression tree");
}

double Expression::eval(double x, double y) const {
    if (root_ < 0) throw EvalError("empty expression");
    return eval_node(root_, x, y);
}

namespace {
// precedence: add/sub 1, mul/div 2, unary 3, pow 4, atom 5
int prec_of(int op_class) { return op_class; }
}  // namespace

void Expression::print_node(int idx, int parent_prec, bool right_side, std::string& out) const {
    const Node& n = nodes_[idx];
    auto wrap = [&](int myprec, auto&& body) {
        const bool parens = myprec < parent_prec || (myprec == parent_prec && right_side);
        if (parens) out += '(';
        body();
        if (parens) out += ')';
    };
    switch (n.op) {
        case Op::Num: {
            char buf[32];
            snprintf(buf, sizeof(buf), "%.17g", n.num);
            out += buf;
            break;
        }
        case Op::VarX: out += 'x'; break;
        case Op::VarY: out += 'y'; break;
        case Op::Pi: out += "pi"; break;
        case Op::Add:
            wrap(prec_of(1), [&] {
                print_node(n.a, 1, false, out);
                out += '+';
                print_node(n.b, 1, true, out);
            });
            break;
        case Op::Sub:
            wrap(prec_of(1), [&] {
                print_node(n.a, 1, false, out);
                out += '-';
                print_node(n.b, 2, false, out);
            });
            break;
        case Op::Mul:
            wrap(prec_of(2), [&] {
                print_node(n.a, 2, false, out);
                out += '*';
                print_node(n.b, 2, true, out);
            });
            break;
        case Op::Div:
            wrap(prec_of(2), [&] {
                print_node(n.a, 2, false, out);
                out += '/';
                print_node(n.b, 3, false, out);
            });
            break;
        case Op::Neg:
            wrap(prec_of(3), [&] {
                out += '-';
                print_node(n.a, 3, true, out);
            });
            break;
        case Op::Pow:
            wrap(prec_of(4), [&] {
                print_node(n.a, 5, false, out);
                out += '^';
                print_node(n.b, 4, false, out);  // right-assoc: no parens on the right
            });
            break;
        case Op::Fun:
            out += kFuns[n.fun];
            out += '(';
            print_node(n.a, 0, false, out);
            out += ')';
            break;
    }
}

std::string Expression::to_string() const {
    std::string out;
    if (root_ >= 0) print_node(root_, 0, false, out);
    return out;
}

}  // namespace nlac
