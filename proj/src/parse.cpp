#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "cartan/errors.hpp"
#include "cartan/expr.hpp"

namespace cartan {

namespace {

// Recursive descent over
//   sum     := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := atom ('^' signed-integer | '^' '(' signed-integer ')')?
//   atom    := number | name | name '(' args ')' | '(' sum ')'
class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

    Expr parse() {
        Expr e = sum();
        skip_ws();
        if (pos_ < text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void error(const std::string& msg) const { error_at(pos_, msg); }

    [[noreturn]] void error_at(std::size_t at, const std::string& msg) const {
        int line = opts_.line;
        int col = opts_.column;
        for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) error(std::string("expected '") + c + "' before end of expression");
            error(std::string("expected '") + c + "'");
        }
    }

    Expr sum() {
        Expr acc = term();
        for (;;) {
            if (accept('+')) acc = acc + term();
            else if (accept('-')) acc = acc - term();
            else return acc;
        }
    }

    Expr term() {
        Expr acc = unary();
        for (;;) {
            if (accept('*')) {
                acc = acc * unary();
            } else if (accept('/')) {
                skip_ws();
                std::size_t at = pos_;
                Expr d = unary();
                if (d.is_zero_literal()) error_at(at, "division by literal zero");
                acc = acc / d;
            } else {
                return acc;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (!accept('^')) return base;
        bool paren = accept('(');
        skip_ws();
        std::size_t at = pos_;
        bool neg = false;
        if (accept('-')) neg = true;
        else accept('+');
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) error_at(at, "exponent must be an integer");
        int n = 0;
        auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
        if (ec != std::errc()) error_at(start, "exponent out of range");
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            error_at(at, "exponent must be an integer");
        }
        if (paren) expect(')');
        if (base.is_zero_literal() && neg && n > 0) error_at(at, "division by literal zero");
        return pow(base, neg ? -n : n);
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || p != text_.data() + pos_) error_at(start, "malformed number");
        return Expr::constant(v);
    }

    Expr call(const std::string& fn, std::size_t at) {
        std::vector<Expr> args;
        if (!accept(')')) {
            do args.push_back(sum());
            while (accept(','));
            expect(')');
        }
        auto arity = [&](std::size_t n) {
            if (args.size() != n) {
                error_at(at, fn + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") +
                                 ", got " + std::to_string(args.size()));
            }
        };
        if (fn == "sin") return arity(1), sin(args[0]);
        if (fn == "cos") return arity(1), cos(args[0]);
        if (fn == "exp") return arity(1), exp(args[0]);
        if (fn == "ln" || fn == "log") return arity(1), ln(args[0]);
        if (fn == "sqrt") return arity(1), sqrt(args[0]);
        if (fn == "tan") return arity(1), sin(args[0]) / cos(args[0]);
        if (fn == "atan2") return arity(2), atan2(args[0], args[1]);
        error_at(at, "unknown function '" + fn + "'");
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= text_.size()) error("unexpected end of expression");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (accept('(')) {
            Expr e = sum();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            std::string name(text_.substr(start, pos_ - start));
            if (accept('(')) return call(name, start);
            for (std::size_t i = 0; i < opts_.coordinates.size(); ++i) {
                if (opts_.coordinates[i] == name) return Expr::coordinate(static_cast<int>(i));
            }
            if (name == "pi") return Expr::constant(std::numbers::pi);
            if (opts_.parameters && !opts_.parameters->count(name)) {
                error_at(start, "unknown identifier '" + name + "' (not a coordinate or declared parameter)");
            }
            return Expr::parameter(name);
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    const ParseOptions& opts_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const ParseOptions& options) {
    return Parser(text, options).parse();
}

}  // namespace cartan
