#include "tracefix/lang/lexer.hpp"

#include <cctype>

#include "tracefix/lang/parser.hpp"

namespace tracefix::lang {

namespace {

const char* const kKeywords[] = {"fn",     "let",    "if",    "else", "while", "for",
                                 "in",     "return", "throw", "assert", "print", "len",
                                 "true",   "false"};

const char* const kTwoCharPuncts[] = {"==", "!=", "<=", ">=", "&&", "||", ".."};

}  // namespace

bool is_keyword(const std::string& word) {
  for (const char* k : kKeywords)
    if (word == k) return true;
  return false;
}

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word = src.substr(i, j - i);
      out.push_back({is_keyword(word) ? TokenKind::Keyword : TokenKind::Ident, word, line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < n && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw SyntaxError(line, "malformed number");
      out.push_back({TokenKind::Int, src.substr(i, j - i), line});
      i = j;
      continue;
    }
    if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < n) {
        char d = src[i];
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i + 1 >= n) break;
          char e = src[i + 1];
          switch (e) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default: throw SyntaxError(line, std::string("unknown escape \\") + e);
          }
          i += 2;
          continue;
        }
        text += d;
        ++i;
      }
      if (!closed) throw SyntaxError(line, "unterminated string literal");
      out.push_back({TokenKind::Str, text, line});
      continue;
    }
    bool matched = false;
    if (i + 1 < n) {
      for (const char* p : kTwoCharPuncts) {
        if (src[i] == p[0] && src[i + 1] == p[1]) {
          out.push_back({TokenKind::Punct, p, line});
          i += 2;
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    if (std::string("(){}[],;=<>+-*/%!").find(c) != std::string::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), line});
      ++i;
      continue;
    }
    throw SyntaxError(line, std::string("unexpected character '") + c + "'");
  }
  out.push_back({TokenKind::End, "", line});
  return out;
}

}  // namespace tracefix::lang
