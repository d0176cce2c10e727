#pragma once

#include <memory>
#include <string>

#include "subdiff/errors.hpp"

namespace subdiff {

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Parsed arithmetic expression over variables x and t.
//
// Grammar (whitespace-insensitive, no implicit multiplication):
//   expr    := term  (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          -- right-associative
//   primary := number | 'x' | 't' | fn '(' expr ')' | '(' expr ')'
//   fn      := sin | cos | exp | tanh | abs | sign | sqrt
//
// '^' binds tighter than unary minus: "-x^2" is -(x^2).
class Expr {
public:
    struct Node;

    static Expr parse(const std::string& src);

    // IEEE-double evaluation; domain violations produce NaN/inf, which
    // callers treat as contract errors.
    double eval(double x, double t) const;

    bool uses_x() const { return uses_x_; }
    bool uses_t() const { return uses_t_; }

    // Minimal-parentheses rendering; parse(str()) reproduces the same tree.
    std::string str() const;

private:
    explicit Expr(std::shared_ptr<const Node> root);

    std::shared_ptr<const Node> root_;
    bool uses_x_ = false;
    bool uses_t_ = false;
};

// The coefficient triple (F, sigma, h) of the driving SDE.
struct CoefficientField {
    Expr F;
    Expr sigma;
    Expr h;

    static CoefficientField from_strings(const std::string& f,
                                         const std::string& sigma,
                                         const std::string& h);
};

}  // namespace subdiff
