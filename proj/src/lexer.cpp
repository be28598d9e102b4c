#include "lexer.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <utility>

namespace ulc::detail {

namespace {

// Unicode spellings accepted as aliases of ASCII symbols.
const std::array<std::pair<std::string_view, std::string_view>, 12> kUnicode = {{
    {"⊸", "-o"},
    {"·", "*"},
    {"⊗", "(x)"},
    {"⊕", "(+)"},
    {"♯", "#"},
    {"♭", "!"},
    {"→", "->"},
    {"⇒", "=>"},
    {"⊢", "|-"},
    {"⊥", "_|_"},
    {"λ", "lam"},
    {"⋆", "()"},
}};

// Longest first.
const std::array<std::string_view, 25> kSymbols = {
    "_|_", "|+>", "|->", "->", "=>", "|-", "(", ")", "{", "}", ",", ";", "+",
    "-",   "*",   "/",   ".",  "|",  "<",  ">", ":", "#", "!", "=", "@",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token tok{Tok::Sym, "", 0.0, line, col};
        bool matched = false;
        for (auto [u, ascii] : kUnicode) {
            if (src.substr(i, u.size()) == u) {
                tok.text = std::string(ascii);
                tok.kind = ascii == "lam" ? Tok::Ident : Tok::Sym;
                advance(u.size());
                matched = true;
                break;
            }
        }
        if (matched) {
            if (tok.text == "()") {
                // The star is Void; emit it as two parentheses.
                out.push_back(Token{Tok::Sym, "(", 0.0, tok.line, tok.column});
                out.push_back(Token{Tok::Sym, ")", 0.0, tok.line, tok.column});
            } else {
                out.push_back(tok);
            }
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::string text(src.substr(i));
            char *end = nullptr;
            double v = std::strtod(text.c_str(), &end);
            std::size_t len = static_cast<std::size_t>(end - text.c_str());
            tok.kind = Tok::Number;
            tok.number = v;
            tok.text = text.substr(0, len);
            advance(len);
            if (i < src.size() && src[i] == 'i' && (i + 1 >= src.size() || !ident_char(src[i + 1]))) {
                tok.kind = Tok::ImagNumber;
                tok.text += "i";
                advance(1);
            }
            out.push_back(tok);
            continue;
        }
        if (ident_start(c) && !(src.substr(i, 3) == "_|_")) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) {
                ++j;
            }
            tok.kind = Tok::Ident;
            tok.text = std::string(src.substr(i, j - i));
            advance(j - i);
            out.push_back(tok);
            continue;
        }
        // `-o` is the linear arrow unless it starts a longer identifier.
        if (src.substr(i, 2) == "-o" && (i + 2 >= src.size() || !ident_char(src[i + 2]))) {
            tok.text = "-o";
            advance(2);
            out.push_back(tok);
            continue;
        }
        for (auto s : kSymbols) {
            if (src.substr(i, s.size()) == s) {
                tok.text = std::string(s);
                advance(s.size());
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
        }
        out.push_back(tok);
    }
    out.push_back(Token{Tok::End, "", 0.0, line, col});
    return out;
}

}  // namespace ulc::detail
