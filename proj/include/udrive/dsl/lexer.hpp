#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "udrive/dsl/ast.hpp"

namespace udrive::dsl {

enum class TokenKind {
  kw_rule,
  kw_trigger,
  kw_condition,
  kw_then,
  kw_until,
  kw_end,
  ident,
  number,
  string,
  lparen,
  rparen,
  comma,
  bang,
  semicolon,
  error,
};

std::string_view to_string(TokenKind k);

struct Token {
  TokenKind kind = TokenKind::error;
  std::string text;  // identifier name, unescaped string, or error code
  double number = 0.0;
  SourceSpan span;
};

/// Whitespace and `#` comments are dropped. Bad input becomes `error` tokens
/// whose text is the diagnostic code (InvalidCharacter, UnterminatedString).
std::vector<Token> tokenize(std::string_view text);

}  // namespace udrive::dsl
