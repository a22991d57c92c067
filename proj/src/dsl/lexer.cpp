#include "lexer.hpp"

#include <cctype>

namespace oblique::dsl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t column = 1;

    auto push = [&](Tok kind, std::size_t length) {
        out.push_back({kind, std::string(text.substr(i, length)), line, column});
        i += length;
        column += length;
    };

    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            out.push_back({Tok::newline, "\\n", line, column});
            ++i;
            ++line;
            column = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++column;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') {
                ++i;
                ++column;
            }
            continue;
        }
        if (ident_start(c)) {
            std::size_t n = 1;
            while (i + n < text.size() && ident_char(text[i + n])) ++n;
            push(Tok::identifier, n);
            continue;
        }
        if (digit(c)) {
            std::size_t n = 1;
            while (i + n < text.size() && digit(text[i + n])) ++n;
            if (i + n + 1 < text.size() && text[i + n] == '.' && digit(text[i + n + 1])) {
                ++n;
                while (i + n < text.size() && digit(text[i + n])) ++n;
            }
            push(Tok::number, n);
            continue;
        }
        auto next = i + 1 < text.size() ? text[i + 1] : '\0';
        switch (c) {
            case '[': push(Tok::lbracket, 1); break;
            case ']': push(Tok::rbracket, 1); break;
            case '(': push(Tok::lparen, 1); break;
            case ')': push(Tok::rparen, 1); break;
            case '{': push(Tok::lbrace, 1); break;
            case '}': push(Tok::rbrace, 1); break;
            case ':': push(Tok::colon, 1); break;
            case ',': push(Tok::comma, 1); break;
            case ';': push(Tok::semicolon, 1); break;
            case '&': push(Tok::amp, 1); break;
            case '|': push(Tok::pipe, 1); break;
            case '/': push(Tok::slash, 1); break;
            case '=': next == '=' ? push(Tok::equals, 2) : push(Tok::assign, 1); break;
            case '!': next == '=' ? push(Tok::not_equals, 2) : push(Tok::bang, 1); break;
            case '-': next == '>' ? push(Tok::arrow, 2) : push(Tok::minus, 1); break;
            default: {
                // Keep multi-byte UTF-8 sequences together in one token.
                std::size_t n = 1;
                while (i + n < text.size() && (static_cast<unsigned char>(text[i + n]) & 0xC0) == 0x80) ++n;
                push(Tok::invalid, n);
                break;
            }
        }
    }
    out.push_back({Tok::end, "", line, column});
    return out;
}

std::string describe(const Token& token) {
    switch (token.kind) {
        case Tok::newline: return "end of line";
        case Tok::end: return "end of input";
        default: return "'" + token.text + "'";
    }
}

}  // namespace oblique::dsl
