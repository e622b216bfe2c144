#pragma once

#include <string>
#include <vector>

namespace tracefix::lang {

enum class TokenKind { Ident, Keyword, Int, Str, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  // Identifier/keyword/punctuation spelling, decoded string contents, or
  // the decimal digits of an integer literal.
  std::string text;
  int line = 1;
};

// Splits MiniLang text into tokens. `//` comments run to end of line.
// Throws SyntaxError on malformed input.
std::vector<Token> tokenize(const std::string& source);

}  // namespace tracefix::lang
