#include "udrive/dsl/lexer.hpp"

#include <cctype>
#include <charconv>
#include <map>

namespace udrive::dsl {
namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

const std::map<std::string_view, TokenKind> kKeywords{
    {"rule", TokenKind::kw_rule},   {"trigger", TokenKind::kw_trigger}, {"condition", TokenKind::kw_condition},
    {"then", TokenKind::kw_then},   {"until", TokenKind::kw_until},     {"end", TokenKind::kw_end},
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : src_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, int line, int col, std::string text = {}) const {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.span = {line, col, line_, col_};
    return t;
  }

  Token next() {
    int line = line_, col = col_;
    char c = peek();
    switch (c) {
      case '(': advance(); return make(TokenKind::lparen, line, col);
      case ')': advance(); return make(TokenKind::rparen, line, col);
      case ',': advance(); return make(TokenKind::comma, line, col);
      case '!': advance(); return make(TokenKind::bang, line, col);
      case ';': advance(); return make(TokenKind::semicolon, line, col);
      case '"': return string_literal(line, col);
      default: break;
    }
    if (is_digit(c) || ((c == '-' || c == '.') && is_digit(peek(1))) ||
        (c == '-' && peek(1) == '.' && is_digit(peek(2)))) {
      return number(line, col);
    }
    if (is_ident_start(c)) return identifier(line, col);
    // One error token per invalid UTF-8 sequence or stray byte.
    advance();
    while (pos_ < src_.size() && (static_cast<unsigned char>(src_[pos_]) & 0xC0) == 0x80) advance();
    return make(TokenKind::error, line, col, "InvalidCharacter");
  }

  Token number(int line, int col) {
    std::size_t start = pos_;
    if (peek() == '-') advance();
    while (is_digit(peek())) advance();
    if (peek() == '.' && is_digit(peek(1))) {
      advance();
      while (is_digit(peek())) advance();
    }
    Token t = make(TokenKind::number, line, col, std::string(src_.substr(start, pos_ - start)));
    std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    return t;
  }

  Token identifier(int line, int col) {
    std::size_t start = pos_;
    while (true) {
      if (is_ident_char(peek())) {
        advance();
      } else if (peek() == '-' && pos_ > start && std::isalpha(static_cast<unsigned char>(src_[pos_ - 1])) &&
                 std::isalpha(static_cast<unsigned char>(peek(1)))) {
        advance();  // `re-planning`
      } else {
        break;
      }
    }
    std::string_view word = src_.substr(start, pos_ - start);
    if (auto it = kKeywords.find(word); it != kKeywords.end()) return make(it->second, line, col);
    return make(TokenKind::ident, line, col, std::string(word));
  }

  Token string_literal(int line, int col) {
    advance();  // opening quote
    std::string value;
    while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && (peek(1) == '"' || peek(1) == '\\')) advance();
      value += src_[pos_];
      advance();
    }
    if (peek() != '"') return make(TokenKind::error, line, col, "UnterminatedString");
    advance();
    return make(TokenKind::string, line, col, std::move(value));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::kw_rule: return "'rule'";
    case TokenKind::kw_trigger: return "'trigger'";
    case TokenKind::kw_condition: return "'condition'";
    case TokenKind::kw_then: return "'then'";
    case TokenKind::kw_until: return "'until'";
    case TokenKind::kw_end: return "'end'";
    case TokenKind::ident: return "identifier";
    case TokenKind::number: return "number";
    case TokenKind::string: return "string";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::comma: return "','";
    case TokenKind::bang: return "'!'";
    case TokenKind::semicolon: return "';'";
    case TokenKind::error: return "invalid token";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace udrive::dsl
