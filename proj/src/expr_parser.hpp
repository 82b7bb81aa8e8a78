#pragma once

// Recursive-descent parser shared by the polynomial and form syntaxes.
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ['^' ['-'] digits]
//   atom   := digits ['/' digits] | ident | 'd' '(' ident ')' | '(' expr ')'

#include <cctype>
#include <string>
#include <string_view>

#include "superhodge/superring.hpp"

namespace superhodge::detail {

/// Ops must provide:
///   Value constant(const mpq_class&), Value coordinate(std::string_view, std::size_t pos),
///   Value differential(std::string_view, std::size_t pos), Value add(Value, Value),
///   Value mul(Value, Value), Value neg(Value), Value pow(Value, int, std::size_t pos).
template <class Ops>
class ExprParser {
public:
    using Value = decltype(std::declval<Ops&>().constant(mpq_class(0)));

    ExprParser(std::string_view text, Ops& ops) : text_(text), ops_(ops) {}

    Value parse()
    {
        Value v = expr();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Value expr()
    {
        skip();
        bool neg = false;
        if (eat('-'))
            neg = true;
        else
            eat('+');
        Value v = term();
        if (neg) v = ops_.neg(std::move(v));
        for (;;) {
            if (eat('+'))
                v = ops_.add(std::move(v), term());
            else if (eat('-'))
                v = ops_.add(std::move(v), ops_.neg(term()));
            else
                return v;
        }
    }

    Value term()
    {
        Value v = factor();
        while (eat('*')) v = ops_.mul(std::move(v), factor());
        return v;
    }

    Value factor()
    {
        Value v = atom();
        if (eat('^')) {
            std::size_t at = pos_;
            bool neg = eat('-');
            skip();
            std::string digits = read_digits();
            if (digits.empty()) fail("expected exponent");
            int e = std::stoi(digits);
            v = ops_.pow(std::move(v), neg ? -e : e, at);
        }
        return v;
    }

    std::string read_digits()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string read_ident()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '\''))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Value atom()
    {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class num(read_digits());
            mpz_class den(1);
            skip();
            if (pos_ < text_.size() && text_[pos_] == '/') {
                ++pos_;
                skip();
                std::string d = read_digits();
                if (d.empty()) fail("expected denominator");
                den = mpz_class(d);
                if (den == 0) fail("zero denominator");
            }
            mpq_class q(num, den);
            q.canonicalize();
            return ops_.constant(q);
        }
        if (c == '(') {
            ++pos_;
            Value v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t at = pos_;
            std::string id = read_ident();
            if (id == "d") {
                skip();
                if (pos_ < text_.size() && text_[pos_] == '(') {
                    ++pos_;
                    skip();
                    std::size_t idpos = pos_;
                    std::string name = read_ident();
                    if (name.empty()) fail("expected coordinate inside d(...)");
                    if (!eat(')')) fail("expected ')'");
                    return ops_.differential(name, idpos);
                }
            }
            return ops_.coordinate(id, at);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    Ops& ops_;
    std::size_t pos_ = 0;
};

}  // namespace superhodge::detail
