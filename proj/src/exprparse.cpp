#include "subdiff/exprparse.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace subdiff {

enum class Op {
    Num, X, T,
    Neg,
    Add, Sub, Mul, Div, Pow,
    Sin, Cos, Exp, Tanh, Abs, Sign, Sqrt,
};

struct Expr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->value = v;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct FnEntry {
    const char* name;
    Op op;
};
constexpr std::array<FnEntry, 7> kFunctions = {{
    {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"tanh", Op::Tanh},
    {"abs", Op::Abs}, {"sign", Op::Sign}, {"sqrt", Op::Sqrt},
}};

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;
    Tok tok = Tok::End;
    std::size_t tok_pos = 0;
    double number = 0.0;
    std::string ident;

    explicit Lexer(const std::string& s) : src(s) { advance(); }

    void advance() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
        tok_pos = pos;
        if (pos >= src.size()) {
            tok = Tok::End;
            return;
        }
        char c = src[pos];
        switch (c) {
            case '+': tok = Tok::Plus; ++pos; return;
            case '-': tok = Tok::Minus; ++pos; return;
            case '*': tok = Tok::Star; ++pos; return;
            case '/': tok = Tok::Slash; ++pos; return;
            case '^': tok = Tok::Caret; ++pos; return;
            case '(': tok = Tok::LParen; ++pos; return;
            case ')': tok = Tok::RParen; ++pos; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t end = pos;
            while (end < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[end])) || src[end] == '.'))
                ++end;
            if (end < src.size() && (src[end] == 'e' || src[end] == 'E')) {
                std::size_t e = end + 1;
                if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
                if (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) {
                    while (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e])))
                        ++e;
                    end = e;
                }
            }
            const char* first = src.data() + pos;
            const char* last = src.data() + end;
            double v = 0.0;
            auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc{} || res.ptr != last)
                throw SyntaxError("malformed numeric literal", pos);
            number = v;
            tok = Tok::Number;
            pos = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos;
            while (end < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
                ++end;
            ident = src.substr(pos, end - pos);
            tok = Tok::Ident;
            pos = end;
            return;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
    }
};

// ---------------------------------------------------------------------------
// Recursive-descent parser

struct Parser {
    Lexer lex;

    explicit Parser(const std::string& s) : lex(s) {}

    [[noreturn]] void fail(const std::string& expected) {
        throw SyntaxError("expected " + expected, lex.tok_pos);
    }

    NodePtr parse_expr() {
        NodePtr left = parse_term();
        while (lex.tok == Tok::Plus || lex.tok == Tok::Minus) {
            Op op = lex.tok == Tok::Plus ? Op::Add : Op::Sub;
            lex.advance();
            left = make(op, left, parse_term());
        }
        return left;
    }

    NodePtr parse_term() {
        NodePtr left = parse_unary();
        while (lex.tok == Tok::Star || lex.tok == Tok::Slash) {
            Op op = lex.tok == Tok::Star ? Op::Mul : Op::Div;
            lex.advance();
            left = make(op, left, parse_unary());
        }
        return left;
    }

    NodePtr parse_unary() {
        if (lex.tok == Tok::Minus) {
            lex.advance();
            return make(Op::Neg, parse_unary());
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (lex.tok == Tok::Caret) {
            lex.advance();
            return make(Op::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_primary() {
        switch (lex.tok) {
            case Tok::Number: {
                double v = lex.number;
                lex.advance();
                return make(Op::Num, nullptr, nullptr, v);
            }
            case Tok::LParen: {
                lex.advance();
                NodePtr e = parse_expr();
                if (lex.tok != Tok::RParen) fail("')'");
                lex.advance();
                return e;
            }
            case Tok::Ident: {
                std::string name = lex.ident;
                std::size_t at = lex.tok_pos;
                lex.advance();
                if (name == "x") return make(Op::X);
                if (name == "t") return make(Op::T);
                for (const auto& fn : kFunctions) {
                    if (name == fn.name) {
                        if (lex.tok != Tok::LParen) fail("'(' after function name");
                        lex.advance();
                        NodePtr arg = parse_expr();
                        if (lex.tok != Tok::RParen) fail("')'");
                        lex.advance();
                        return make(fn.op, arg);
                    }
                }
                throw SyntaxError(
                    "unknown identifier '" + name +
                    "' (expected x, t, or one of sin/cos/exp/tanh/abs/sign/sqrt)", at);
            }
            default:
                fail("a number, variable, function call, '(' or unary '-'");
        }
    }
};

double eval_node(const Expr::Node& n, double x, double t) {
    switch (n.op) {
        case Op::Num: return n.value;
        case Op::X: return x;
        case Op::T: return t;
        case Op::Neg: return -eval_node(*n.a, x, t);
        case Op::Add: return eval_node(*n.a, x, t) + eval_node(*n.b, x, t);
        case Op::Sub: return eval_node(*n.a, x, t) - eval_node(*n.b, x, t);
        case Op::Mul: return eval_node(*n.a, x, t) * eval_node(*n.b, x, t);
        case Op::Div: return eval_node(*n.a, x, t) / eval_node(*n.b, x, t);
        case Op::Pow: return std::pow(eval_node(*n.a, x, t), eval_node(*n.b, x, t));
        case Op::Sin: return std::sin(eval_node(*n.a, x, t));
        case Op::Cos: return std::cos(eval_node(*n.a, x, t));
        case Op::Exp: return std::exp(eval_node(*n.a, x, t));
        case Op::Tanh: return std::tanh(eval_node(*n.a, x, t));
        case Op::Abs: return std::fabs(eval_node(*n.a, x, t));
        case Op::Sign: {
            double v = eval_node(*n.a, x, t);
            return static_cast<double>(v > 0.0) - static_cast<double>(v < 0.0);
        }
        case Op::Sqrt: return std::sqrt(eval_node(*n.a, x, t));
    }
    return 0.0;
}

void scan_vars(const Expr::Node& n, bool& has_x, bool& has_t) {
    if (n.op == Op::X) has_x = true;
    if (n.op == Op::T) has_t = true;
    if (n.a) scan_vars(*n.a, has_x, has_t);
    if (n.b) scan_vars(*n.b, has_x, has_t);
}

// precedence levels: +,- = 1; *,/ = 2; unary - = 3; ^ = 4; atoms = 5
int level_of(Op op) {
    switch (op) {
        case Op::Add: case Op::Sub: return 1;
        case Op::Mul: case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

std::string number_str(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const char* fn_name(Op op) {
    for (const auto& fn : kFunctions)
        if (fn.op == op) return fn.name;
    return "?";
}

void print_node(const Expr::Node& n, int min_level, std::string& out) {
    int lvl = level_of(n.op);
    bool parens = lvl < min_level;
    if (parens) out += '(';
    switch (n.op) {
        case Op::Num: out += number_str(n.value); break;
        case Op::X: out += 'x'; break;
        case Op::T: out += 't'; break;
        case Op::Neg:
            out += '-';
            print_node(*n.a, 3, out);
            break;
        case Op::Add:
            print_node(*n.a, 1, out);
            out += " + ";
            print_node(*n.b, 2, out);
            break;
        case Op::Sub:
            print_node(*n.a, 1, out);
            out += " - ";
            print_node(*n.b, 2, out);
            break;
        case Op::Mul:
            print_node(*n.a, 2, out);
            out += '*';
            print_node(*n.b, 3, out);
            break;
        case Op::Div:
            print_node(*n.a, 2, out);
            out += '/';
            print_node(*n.b, 3, out);
            break;
        case Op::Pow:
            // '^' takes a primary on the left and binds right-associatively
            print_node(*n.a, 5, out);
            out += '^';
            print_node(*n.b, 3, out);
            break;
        default:
            out += fn_name(n.op);
            out += '(';
            print_node(*n.a, 0, out);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {
    scan_vars(*root_, uses_x_, uses_t_);
}

Expr Expr::parse(const std::string& src) {
    Parser p(src);
    NodePtr root = p.parse_expr();
    if (p.lex.tok != Tok::End)
        throw SyntaxError("trailing input after expression", p.lex.tok_pos);
    return Expr(std::move(root));
}

double Expr::eval(double x, double t) const { return eval_node(*root_, x, t); }

std::string Expr::str() const {
    std::string out;
    print_node(*root_, 0, out);
    return out;
}

CoefficientField CoefficientField::from_strings(const std::string& f,
                                                const std::string& sigma,
                                                const std::string& h) {
    return CoefficientField{Expr::parse(f), Expr::parse(sigma), Expr::parse(h)};
}

}  // namespace subdiff
