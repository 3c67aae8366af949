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

// Lossless OverpassQL tokenizer. Whitespace is the only thing not carried
// by a token; every other byte of the input belongs to exactly one token.

#ifndef OVB_LEXER_H_
#define OVB_LEXER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ovb::ql {

enum class TokenKind {
  kSettingOpen,
  kSettingClose,
  kIdent,
  kStringLiteral,
  kNumber,
  kOperator,
  kBracketOpen,
  kBracketClose,
  kParenOpen,
  kParenClose,
  kSemicolon,
  kTemplatePlaceholder,
  kComment,
  kRecursionOp,
};

std::string_view token_kind_name(TokenKind kind);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  TokenKind kind;
  std::string text;
  Span span;

  friend bool operator==(const Token&, const Token&) = default;
};

// Throws LexError on an unterminated string literal or ill-formed UTF-8.
std::vector<Token> tokenize(std::string_view source);

// Rebuilds the source from tokens, taking inter-token bytes from `source`.
// Equal to `source` whenever `tokens` came from tokenize(source).
std::string detokenize(const std::vector<Token>& tokens,
                       std::string_view source);

// Resolves the quotes and backslash escapes of a string-literal token.
std::string unquote(std::string_view literal);

// Double-quoted literal with `"`, `\` and control characters escaped.
std::string quote(std::string_view value);

}  // namespace ovb::ql

#endif  // OVB_LEXER_H_
