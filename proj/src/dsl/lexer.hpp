#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oblique::dsl {

enum class Tok {
    identifier,
    number,
    lbracket,
    rbracket,
    lparen,
    rparen,
    lbrace,
    rbrace,
    colon,
    comma,
    semicolon,
    assign,
    equals,
    not_equals,
    bang,
    amp,
    pipe,
    arrow,
    minus,
    slash,
    newline,
    end,
    invalid,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

/// Splits source text into tokens. `#` starts a comment running to the end
/// of the line. Characters outside the grammar become `invalid` tokens.
std::vector<Token> tokenize(std::string_view text);

std::string describe(const Token& token);

}  // namespace oblique::dsl
