#pragma once

#include <memory>
#include <string>

namespace spl {

/// Value and first derivative, used to differentiate parsed expressions exactly.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

/// A parsed arithmetic expression in the variables `x` and `y`.
///
/// Grammar (ASCII):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-') unary | power
///   power  := atom ('^' unary)?
///   atom   := number | 'x' | 'x1' | 'y' | 'x2' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func   := sin | cos | tan | exp | log | sqrt | abs
///
/// `x1`/`x2` are aliases for `x`/`y`. There are no multi-argument functions,
/// so expressions never contain commas.
class Expression {
public:
    struct Node;

    Expression() = default;
    static Expression parse(const std::string& text);

    double operator()(double x, double y = 0.0) const;
    /// Evaluates with `x` (and optionally `y`) carrying a derivative seed.
    Dual evaluate(Dual x, Dual y = {}) const;

    const std::string& text() const { return text_; }
    bool empty() const { return !root_; }

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace spl
