// Copyright 2026 The ovb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ovb/lexer.h"

#include <array>
#include <cstdlib>

#include "ovb/errors.h"
#include "ovb/text.h"

namespace ovb::ql {
namespace {

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c >= 0x80;
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_ident_char(unsigned char c) { return is_ident_start(c) || is_digit(c); }

constexpr std::array<std::string_view, 9> kMultiCharOperators = {
    "->", "!=", "!~", "==", "<=", ">=", "&&", "||", "::"};

class Lexer {
 public:
  explicit Lexer(std::string_view source) : src_(source) {}

  std::vector<Token> run() {
    if (auto bad = text::find_invalid_utf8(src_)) {
      throw LexError(*bad, "illegal byte sequence");
    }
    while (pos_ < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (text::is_space(static_cast<char>(c))) {
        ++pos_;
        continue;
      }
      lex_one(c);
    }
    return std::move(tokens_);
  }

 private:
  void emit(TokenKind kind, std::size_t start, std::size_t end) {
    tokens_.push_back(
        Token{kind, std::string(src_.substr(start, end - start)), {start, end}});
    if (kind == TokenKind::kComment) return;
    if (kind != TokenKind::kSettingOpen && kind != TokenKind::kSettingClose &&
        !in_setting_) {
      at_prefix_ = false;
    }
    significant_ = kind;
    has_significant_ = true;
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void lex_one(unsigned char c) {
    const std::size_t start = pos_;
    if (c == '/' && peek(1) == '/') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      emit(TokenKind::kComment, start, pos_);
      return;
    }
    if (c == '/' && peek(1) == '*') {
      const std::size_t close = src_.find("*/", pos_ + 2);
      pos_ = close == std::string_view::npos ? src_.size() : close + 2;
      emit(TokenKind::kComment, start, pos_);
      return;
    }
    if (c == '"' || c == '\'') {
      lex_string(static_cast<char>(c));
      return;
    }
    if (c == '{' && peek(1) == '{') {
      const std::size_t close = src_.find("}}", pos_ + 2);
      const std::size_t newline = src_.find('\n', pos_ + 2);
      if (close != std::string_view::npos &&
          (newline == std::string_view::npos || newline > close)) {
        pos_ = close + 2;
        emit(TokenKind::kTemplatePlaceholder, start, pos_);
        return;
      }
    }
    if (is_digit(c) || (c == '-' && is_digit(static_cast<unsigned char>(
                                          peek(1))) &&
                        !after_operand())) {
      lex_number();
      return;
    }
    if (is_ident_start(c)) {
      while (pos_ < src_.size() &&
             is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
      emit(TokenKind::kIdent, start, pos_);
      return;
    }
    switch (c) {
      case '[':
        ++pos_;
        if (at_prefix_ && !in_setting_) {
          in_setting_ = true;
          emit(TokenKind::kSettingOpen, start, pos_);
        } else {
          emit(TokenKind::kBracketOpen, start, pos_);
        }
        return;
      case ']':
        ++pos_;
        if (in_setting_) {
          in_setting_ = false;
          emit(TokenKind::kSettingClose, start, pos_);
        } else {
          emit(TokenKind::kBracketClose, start, pos_);
        }
        return;
      case '(':
        ++pos_;
        ++paren_depth_;
        emit(TokenKind::kParenOpen, start, pos_);
        return;
      case ')':
        ++pos_;
        if (paren_depth_ > 0) --paren_depth_;
        emit(TokenKind::kParenClose, start, pos_);
        return;
      case ';':
        ++pos_;
        emit(TokenKind::kSemicolon, start, pos_);
        return;
      default:
        break;
    }
    for (std::string_view op : kMultiCharOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        const bool comparison = paren_depth_ > 0 || in_setting_;
        emit(!comparison && (op == "<<" || op == ">>")
                 ? TokenKind::kRecursionOp
                 : TokenKind::kOperator,
             start, pos_);
        return;
      }
    }
    if ((c == '<' || c == '>') && peek(1) == static_cast<char>(c)) {
      pos_ += 2;
      emit(paren_depth_ > 0 ? TokenKind::kOperator : TokenKind::kRecursionOp,
           start, pos_);
      return;
    }
    ++pos_;
    if ((c == '<' || c == '>') && paren_depth_ == 0 && !in_setting_) {
      emit(TokenKind::kRecursionOp, start, pos_);
      return;
    }
    emit(TokenKind::kOperator, start, pos_);
  }

  // True when the previous significant token ends an operand, which makes a
  // following '-' binary (difference) rather than a sign.
  bool after_operand() const {
    if (!has_significant_) return false;
    switch (significant_) {
      case TokenKind::kIdent:
      case TokenKind::kNumber:
      case TokenKind::kStringLiteral:
      case TokenKind::kParenClose:
      case TokenKind::kBracketClose:
        return true;
      default:
        return false;
    }
  }

  void lex_number() {
    const std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    while (is_digit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.' && is_digit(static_cast<unsigned char>(peek(1)))) {
      ++pos_;
      while (is_digit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '-' || peek(1) == '+') &&
          is_digit(static_cast<unsigned char>(peek(2)))))) {
      pos_ += 2;
      while (is_digit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    emit(TokenKind::kNumber, start, pos_);
  }

  void lex_string(char quote_char) {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      ++pos_;
      if (c == quote_char) {
        emit(TokenKind::kStringLiteral, start, pos_);
        return;
      }
    }
    throw LexError(start, "unterminated string literal");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
  bool at_prefix_ = true;
  bool in_setting_ = false;
  int paren_depth_ = 0;
  TokenKind significant_ = TokenKind::kSemicolon;
  bool has_significant_ = false;
};

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::kSettingOpen: return "setting-open";
    case TokenKind::kSettingClose: return "setting-close";
    case TokenKind::kIdent: return "ident";
    case TokenKind::kStringLiteral: return "string-literal";
    case TokenKind::kNumber: return "number";
    case TokenKind::kOperator: return "operator";
    case TokenKind::kBracketOpen: return "bracket-open";
    case TokenKind::kBracketClose: return "bracket-close";
    case TokenKind::kParenOpen: return "paren-open";
    case TokenKind::kParenClose: return "paren-close";
    case TokenKind::kSemicolon: return "semicolon";
    case TokenKind::kTemplatePlaceholder: return "template-placeholder";
    case TokenKind::kComment: return "comment";
    case TokenKind::kRecursionOp: return "recursion-op";
  }
  return "unknown";
}

std::vector<Token> tokenize(std::string_view source) {
  return Lexer(source).run();
}

std::string detokenize(const std::vector<Token>& tokens,
                       std::string_view source) {
  std::string out;
  out.reserve(source.size());
  std::size_t cursor = 0;
  for (const Token& token : tokens) {
    if (token.span.start > cursor) {
      out.append(source.substr(cursor, token.span.start - cursor));
    }
    out.append(token.text);
    cursor = token.span.end;
  }
  if (cursor < source.size()) out.append(source.substr(cursor));
  return out;
}

std::string unquote(std::string_view literal) {
  if (literal.size() < 2) return std::string(literal);
  const std::string_view body = literal.substr(1, literal.size() - 2);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out.push_back(c);
      continue;
    }
    const char e = body[++i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '"': out.push_back('"'); break;
      case '\'': out.push_back('\''); break;
      case '\\': out.push_back('\\'); break;
      case 'u': {
        if (i + 4 < body.size()) {
          const std::string hex(body.substr(i + 1, 4));
          char* end = nullptr;
          const long cp = std::strtol(hex.c_str(), &end, 16);
          if (end == hex.c_str() + 4) {
            text::append_utf8(out, static_cast<char32_t>(cp));
            i += 4;
            break;
          }
        }
        out += "\\u";
        break;
      }
      default:
        // Unknown escapes (regex classes such as \d) are kept verbatim.
        out.push_back('\\');
        out.push_back(e);
    }
  }
  return out;
}

std::string quote(std::string_view value) {
  std::string out;
  out.reserve(value.size() + 2);
  out.push_back('"');
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace ovb::ql
