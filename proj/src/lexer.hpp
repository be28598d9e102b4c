#pragma once

// Tokenizer shared by the core-term, type, judgment and lambda_Q parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ulc/errors.hpp"

namespace ulc::detail {

enum class Tok {
    Ident,
    Number,     // real literal
    ImagNumber, // literal with an `i` suffix, e.g. 0.5i
    Sym,        // punctuation; text holds the canonical spelling
    End,
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view src);

class TokenStream {
  public:
    explicit TokenStream(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    const Token &peek(std::size_t k = 0) const {
        std::size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token &next() {
        const Token &t = peek();
        if (pos_ + 1 < toks_.size()) {
            ++pos_;
        }
        return t;
    }
    bool at_sym(std::string_view s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    bool at_ident(std::string_view s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Ident && peek(k).text == s;
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool accept_sym(std::string_view s) {
        if (at_sym(s)) {
            next();
            return true;
        }
        return false;
    }
    bool accept_ident(std::string_view s) {
        if (at_ident(s)) {
            next();
            return true;
        }
        return false;
    }
    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) {
            fail("expected '" + std::string(s) + "'");
        }
    }
    void expect_ident(std::string_view s) {
        if (!accept_ident(s)) {
            fail("expected '" + std::string(s) + "'");
        }
    }
    [[noreturn]] void fail(const std::string &msg) const {
        const Token &t = peek();
        std::string near = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + " near " + near, t.line, t.column);
    }

    std::size_t mark() const { return pos_; }
    void reset(std::size_t m) { pos_ = m; }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace ulc::detail
