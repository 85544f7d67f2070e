#include "spl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "spl/types.hpp"

namespace spl {

struct Expression::Node {
    enum class Op { Number, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Func };
    Op op = Op::Number;
    double number = 0.0;
    std::string func;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
{
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse_all()
    {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = make(Op::Add, n, term());
            else if (accept('-')) n = make(Op::Sub, n, term());
            else return n;
        }
    }

    NodePtr term()
    {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = make(Op::Mul, n, unary());
            else if (accept('/')) n = make(Op::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = atom();
        if (accept('^')) return make(Op::Pow, base, unary());
        return base;
    }

    NodePtr atom()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) fail("missing ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expression::Node>();
            n->number = value;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x" || name == "x1") return make(Op::VarX);
            if (name == "y" || name == "x2") return make(Op::VarY);
            if (name == "pi") {
                auto n = std::make_shared<Expression::Node>();
                n->number = pi;
                return n;
            }
            static const std::vector<std::string> funcs = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
            for (const auto& f : funcs) {
                if (name == f) {
                    if (!accept('(')) fail("expected '(' after " + name);
                    NodePtr arg = expr();
                    if (!accept(')')) fail("missing ')'");
                    auto n = std::make_shared<Expression::Node>();
                    n->op = Op::Func;
                    n->func = name;
                    n->lhs = arg;
                    return n;
                }
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

Dual apply(const std::string& f, Dual a)
{
    if (f == "sin") return {std::sin(a.v), std::cos(a.v) * a.d};
    if (f == "cos") return {std::cos(a.v), -std::sin(a.v) * a.d};
    if (f == "tan") {
        const double t = std::tan(a.v);
        return {t, (1.0 + t * t) * a.d};
    }
    if (f == "exp") {
        const double e = std::exp(a.v);
        return {e, e * a.d};
    }
    if (f == "log") return {std::log(a.v), a.d / a.v};
    if (f == "sqrt") {
        const double r = std::sqrt(a.v);
        return {r, r > 0.0 ? 0.5 * a.d / r : 0.0};
    }
    // abs
    return {std::abs(a.v), a.v > 0.0 ? a.d : (a.v < 0.0 ? -a.d : 0.0)};
}

Dual eval(const Expression::Node& n, Dual x, Dual y)
{
    switch (n.op) {
    case Op::Number: return {n.number, 0.0};
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Neg: {
        const Dual a = eval(*n.lhs, x, y);
        return {-a.v, -a.d};
    }
    case Op::Func: return apply(n.func, eval(*n.lhs, x, y));
    default: break;
    }
    const Dual a = eval(*n.lhs, x, y);
    const Dual b = eval(*n.rhs, x, y);
    switch (n.op) {
    case Op::Add: return {a.v + b.v, a.d + b.d};
    case Op::Sub: return {a.v - b.v, a.d - b.d};
    case Op::Mul: return {a.v * b.v, a.d * b.v + a.v * b.d};
    case Op::Div: return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
    case Op::Pow: {
        const double p = std::pow(a.v, b.v);
        double d = 0.0;
        if (b.d == 0.0) {
            d = (b.v == 0.0) ? 0.0 : b.v * std::pow(a.v, b.v - 1.0) * a.d;
        } else {
            d = p * (b.d * std::log(a.v) + b.v * a.d / a.v);
        }
        return {p, d};
    }
    default: return {};
    }
}

} // namespace

Expression Expression::parse(const std::string& text)
{
    Expression e;
    e.root_ = Parser(text).parse_all();
    e.text_ = text;
    return e;
}

double Expression::operator()(double x, double y) const
{
    return evaluate({x, 0.0}, {y, 0.0}).v;
}

Dual Expression::evaluate(Dual x, Dual y) const
{
    if (!root_) throw ParseError("empty expression");
    return eval(*root_, x, y);
}

} // namespace spl
