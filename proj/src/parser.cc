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

#include "ovb/parser.h"

#include <algorithm>
#include <array>
#include <regex>
#include <utility>

#include "ovb/errors.h"
#include "ovb/text.h"

namespace ovb::ql {
namespace {

// Thrown inside a statement the grammar does not cover; the statement is
// then re-read as a raw node.
struct Fallback {};

constexpr std::array<std::string_view, 10> kElementTypes = {
    "node", "way", "relation", "rel", "area",
    "nwr",  "nw",  "nr",       "wr",  "derived"};

bool is_element_type(std::string_view word) {
  return std::find(kElementTypes.begin(), kElementTypes.end(), word) !=
         kElementTypes.end();
}

bool is_op(const Token& t, std::string_view text) {
  return t.kind == TokenKind::kOperator && t.text == text;
}

bool is_ident(const Token& t, std::string_view text) {
  return t.kind == TokenKind::kIdent && t.text == text;
}

bool is_opener(const Token& t) {
  return t.kind == TokenKind::kParenOpen || t.kind == TokenKind::kBracketOpen ||
         t.kind == TokenKind::kSettingOpen || is_op(t, "{");
}

bool is_closer(const Token& t) {
  return t.kind == TokenKind::kParenClose ||
         t.kind == TokenKind::kBracketClose ||
         t.kind == TokenKind::kSettingClose || is_op(t, "}");
}

std::string closer_for(const Token& opener) {
  switch (opener.kind) {
    case TokenKind::kParenOpen: return ")";
    case TokenKind::kBracketOpen:
    case TokenKind::kSettingOpen: return "]";
    default: return "}";
  }
}

bool closes(const Token& opener, const Token& closer) {
  switch (opener.kind) {
    case TokenKind::kParenOpen:
      return closer.kind == TokenKind::kParenClose;
    case TokenKind::kBracketOpen:
      return closer.kind == TokenKind::kBracketClose;
    case TokenKind::kSettingOpen:
      return closer.kind == TokenKind::kSettingClose;
    default:
      return is_op(closer, "}");
  }
}

class Parser {
 public:
  Parser(std::string_view source, std::vector<Token> tokens) : src_(source) {
    for (Token& t : tokens) {
      if (t.kind != TokenKind::kComment) toks_.push_back(std::move(t));
    }
  }

  QueryAst run() {
    check_balance();
    QueryAst ast;
    ast.span = {0, src_.size()};
    parse_settings(ast);
    ast.settings_span = settings_span_;
    while (!at_end()) {
      const std::size_t before = pos_;
      ast.statements.push_back(parse_statement());
      if (pos_ == before) throw ParseError(peek().span.start, {"statement"});
    }
    return ast;
  }

  // Parses exactly one tag filter spanning the whole token stream.
  std::optional<TagFilter> run_single_filter() {
    if (at_end() || peek().kind != TokenKind::kBracketOpen) return {};
    try {
      TagFilter f = parse_tag_filter();
      if (!at_end()) return {};
      return f;
    } catch (const Fallback&) {
      return {};
    }
  }

 private:
  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{TokenKind::kComment, "", {}};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : kEnd;
  }
  const Token& advance() { return toks_[pos_++]; }
  bool has(std::size_t ahead = 0) const { return pos_ + ahead < toks_.size(); }

  bool adjacent(std::size_t i) const {
    return i > 0 && toks_[i - 1].span.end == toks_[i].span.start;
  }

  void check_balance() const {
    std::vector<const Token*> stack;
    for (const Token& t : toks_) {
      if (is_opener(t)) {
        stack.push_back(&t);
      } else if (is_closer(t)) {
        if (stack.empty()) throw ParseError(t.span.start, {"statement"});
        if (!closes(*stack.back(), t)) {
          throw ParseError(t.span.start, {closer_for(*stack.back())});
        }
        stack.pop_back();
      } else if (t.kind == TokenKind::kSemicolon && !stack.empty() &&
                 (stack.back()->kind == TokenKind::kBracketOpen ||
                  stack.back()->kind == TokenKind::kSettingOpen)) {
        throw ParseError(t.span.start, {"]"});
      }
    }
    if (!stack.empty()) {
      throw ParseError(src_.size(), {closer_for(*stack.back())});
    }
  }

  // Source text of toks_[begin, end) with comments dropped and every gap
  // collapsed to one space.
  std::string compact(std::size_t begin, std::size_t end) const {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin && !adjacent(i)) out.push_back(' ');
      out += toks_[i].text;
    }
    return out;
  }

  std::size_t matching_close(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open; i < toks_.size(); ++i) {
      if (is_opener(toks_[i])) ++depth;
      if (is_closer(toks_[i]) && --depth == 0) return i;
    }
    return toks_.size();
  }

  std::size_t offset_here() const {
    return at_end() ? src_.size() : peek().span.start;
  }

  void parse_settings(QueryAst& ast) {
    if (at_end() || peek().kind != TokenKind::kSettingOpen) return;
    const std::size_t start = peek().span.start;
    while (!at_end() && peek().kind == TokenKind::kSettingOpen) {
      const Token& open = advance();
      Setting setting;
      if (at_end() || peek().kind != TokenKind::kIdent) {
        throw ParseError(offset_here(), {"ident"});
      }
      setting.name = advance().text;
      if (at_end() || !is_op(peek(), ":")) {
        throw ParseError(offset_here(), {":"});
      }
      advance();
      std::size_t arg_begin = pos_;
      int depth = 0;
      while (!at_end() && peek().kind != TokenKind::kSettingClose) {
        const Token& t = peek();
        if (is_opener(t)) ++depth;
        if (is_closer(t)) --depth;
        if (depth == 0 && is_op(t, ",")) {
          if (pos_ == arg_begin) throw ParseError(t.span.start, {"value"});
          setting.args.push_back(compact(arg_begin, pos_));
          arg_begin = pos_ + 1;
        }
        advance();
      }
      if (pos_ == arg_begin) throw ParseError(offset_here(), {"value"});
      setting.args.push_back(compact(arg_begin, pos_));
      if (at_end()) throw ParseError(src_.size(), {"]"});
      setting.span = {open.span.start, advance().span.end};
      ast.settings.push_back(std::move(setting));
    }
    if (at_end() || peek().kind != TokenKind::kSemicolon) {
      throw ParseError(offset_here(), {";", "["});
    }
    settings_span_ = {start, advance().span.end};
  }

  Statement parse_statement() {
    const std::size_t start = pos_;
    try {
      return parse_statement_strict();
    } catch (const Fallback&) {
      pos_ = start;
      return parse_raw();
    }
  }

  Statement parse_statement_strict() {
    const std::size_t start_offset = peek().span.start;
    const Token& t = peek();
    Statement st;
    if (t.kind == TokenKind::kParenOpen) {
      st = parse_block();
    } else if (t.kind == TokenKind::kIdent) {
      if (t.text == "out") return parse_output("", start_offset);
      if (t.text == "foreach") return parse_foreach("", start_offset);
      if (t.text == "if" && peek(1).kind == TokenKind::kParenOpen) {
        return parse_conditional(start_offset);
      }
      if (!is_element_type(t.text)) throw Fallback{};
      st = parse_query();
    } else if (is_op(t, ".") && peek(1).kind == TokenKind::kIdent &&
               adjacent(pos_ + 1)) {
      advance();
      std::string input = advance().text;
      const Token& next = peek();
      if (is_ident(next, "out")) return parse_output(input, start_offset);
      if (is_ident(next, "foreach")) return parse_foreach(input, start_offset);
      if (next.kind == TokenKind::kRecursionOp) {
        st.kind = StatementKind::kRecursion;
        st.input_set = std::move(input);
        st.element_type = advance().text;
      } else {
        st.kind = StatementKind::kQuery;
        st.input_set = std::move(input);
      }
    } else if (t.kind == TokenKind::kRecursionOp) {
      st.kind = StatementKind::kRecursion;
      st.element_type = advance().text;
    } else {
      throw Fallback{};
    }
    st.span = {start_offset, toks_[pos_ - 1].span.end};
    st = maybe_assignment(std::move(st));
    st.span = {start_offset, expect_semicolon()};
    return st;
  }

  std::size_t expect_semicolon() {
    if (at_end() || peek().kind != TokenKind::kSemicolon) throw Fallback{};
    return advance().span.end;
  }

  Statement maybe_assignment(Statement inner) {
    if (at_end() || !is_op(peek(), "->")) return inner;
    advance();
    if (!is_op(peek(), ".") || peek(1).kind != TokenKind::kIdent) {
      throw Fallback{};
    }
    advance();
    Statement assign;
    assign.kind = StatementKind::kAssignment;
    assign.set_name = advance().text;
    assign.children.push_back(std::move(inner));
    return assign;
  }

  Statement parse_block() {
    Statement st;
    st.kind = StatementKind::kUnion;
    advance();  // (
    while (!at_end() && peek().kind != TokenKind::kParenClose) {
      if (is_op(peek(), "-")) {
        if (st.children.size() != 1 || st.kind == StatementKind::kDifference) {
          throw Fallback{};
        }
        advance();
        st.kind = StatementKind::kDifference;
        if (at_end() || peek().kind == TokenKind::kParenClose) {
          throw Fallback{};
        }
        continue;
      }
      st.children.push_back(parse_statement());
    }
    if (at_end()) throw Fallback{};
    if (st.kind == StatementKind::kDifference && st.children.size() != 2) {
      throw Fallback{};
    }
    st.span.end = advance().span.end;
    return st;
  }

  Statement parse_query() {
    Statement st;
    st.kind = StatementKind::kQuery;
    st.element_type = advance().text;
    if (is_op(peek(), ".") && adjacent(pos_) &&
        peek(1).kind == TokenKind::kIdent && adjacent(pos_ + 1)) {
      advance();
      st.input_set = advance().text;
    }
    while (!at_end()) {
      if (peek().kind == TokenKind::kBracketOpen) {
        st.filters.emplace_back(parse_tag_filter());
      } else if (peek().kind == TokenKind::kParenOpen) {
        st.filters.emplace_back(parse_paren_filter());
      } else {
        break;
      }
    }
    return st;
  }

  // Quoted literal, or a run of touching ident/number/operator tokens such
  // as addr:street or fast_food.
  std::string parse_word() {
    if (at_end()) throw Fallback{};
    if (peek().kind == TokenKind::kStringLiteral) return unquote(advance().text);
    const std::size_t begin = pos_;
    std::string word;
    while (!at_end()) {
      const Token& t = peek();
      if (pos_ > begin && !adjacent(pos_)) break;
      const bool word_like =
          t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber ||
          (t.kind == TokenKind::kOperator && t.text != "=" && t.text != "!=" &&
           t.text != "~" && t.text != "!~" && t.text != "," &&
           t.text != "!" && t.text != "{" && t.text != "}");
      if (!word_like) break;
      word += advance().text;
    }
    if (word.empty()) throw Fallback{};
    return word;
  }

  TagFilter parse_tag_filter() {
    TagFilter f;
    const std::size_t start = advance().span.start;  // [
    if (is_op(peek(), "!")) {
      advance();
      f.key = parse_word();
      f.relation = TagRelation::kNotExists;
    } else if (is_op(peek(), "~")) {
      advance();
      f.key = parse_word();
      if (!is_op(peek(), "~")) throw Fallback{};
      advance();
      f.value = parse_word();
      f.relation = TagRelation::kRegexKeyValue;
      f.case_insensitive = parse_case_flag();
    } else {
      f.key = parse_word();
      if (peek().kind == TokenKind::kBracketClose) {
        f.relation = TagRelation::kExists;
      } else {
        const Token& op = peek();
        if (is_op(op, "=")) {
          f.relation = TagRelation::kEquals;
        } else if (is_op(op, "!=")) {
          f.relation = TagRelation::kNotEquals;
        } else if (is_op(op, "~")) {
          f.relation = TagRelation::kRegexValue;
        } else if (is_op(op, "!~")) {
          f.relation = TagRelation::kNotRegexValue;
        } else {
          throw Fallback{};
        }
        advance();
        f.value = parse_word();
        if (f.relation == TagRelation::kRegexValue ||
            f.relation == TagRelation::kNotRegexValue) {
          f.case_insensitive = parse_case_flag();
        }
      }
    }
    if (at_end() || peek().kind != TokenKind::kBracketClose) throw Fallback{};
    if (text::trim(f.key).empty()) throw Fallback{};
    f.span = {start, advance().span.end};
    return f;
  }

  bool parse_case_flag() {
    if (is_op(peek(), ",") && is_ident(peek(1), "i")) {
      pos_ += 2;
      return true;
    }
    return false;
  }

  SpatialFilter parse_paren_filter() {
    const std::size_t open = pos_;
    const std::size_t close = matching_close(open);
    if (close >= toks_.size()) throw Fallback{};
    SpatialFilter f;
    f.text = compact(open + 1, close);
    f.span = {toks_[open].span.start, toks_[close].span.end};
    f.kind = classify_paren(open + 1, close);
    pos_ = close + 1;
    return f;
  }

  SpatialKind classify_paren(std::size_t begin, std::size_t end) const {
    const std::size_t n = end - begin;
    if (n == 0) return SpatialKind::kOther;
    const Token& first = toks_[begin];
    if (n == 1 && first.kind == TokenKind::kTemplatePlaceholder) {
      return SpatialKind::kPlaceholder;
    }
    if (n == 7) {
      bool bbox = true;
      for (std::size_t i = 0; i < n; ++i) {
        const Token& t = toks_[begin + i];
        bbox = bbox && (i % 2 == 0 ? t.kind == TokenKind::kNumber
                                   : is_op(t, ","));
      }
      if (bbox) return SpatialKind::kBBox;
    }
    if (first.kind == TokenKind::kIdent) {
      if (first.text == "around") return SpatialKind::kAround;
      if (first.text == "area") return SpatialKind::kAreaRef;
      if (first.text == "if" && n > 1 && is_op(toks_[begin + 1], ":")) {
        return SpatialKind::kIfCondition;
      }
      if (first.text == "id" && n > 1 && is_op(toks_[begin + 1], ":")) {
        return SpatialKind::kId;
      }
    }
    bool ids = true;
    for (std::size_t i = begin; i < end; ++i) {
      ids = ids && (toks_[i].kind == TokenKind::kNumber || is_op(toks_[i], ","));
    }
    return ids ? SpatialKind::kId : SpatialKind::kOther;
  }

  Statement parse_output(std::string input, std::size_t start_offset) {
    Statement st;
    st.kind = StatementKind::kOutput;
    st.input_set = std::move(input);
    advance();  // out
    while (!at_end() && peek().kind != TokenKind::kSemicolon) {
      const Token& t = peek();
      if (t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber) {
        st.modifiers.push_back(advance().text);
      } else if (t.kind == TokenKind::kParenOpen) {
        const std::size_t close = matching_close(pos_);
        if (close >= toks_.size()) throw Fallback{};
        st.modifiers.push_back("(" + compact(pos_ + 1, close) + ")");
        pos_ = close + 1;
      } else {
        throw Fallback{};
      }
    }
    st.span = {start_offset, expect_semicolon()};
    return st;
  }

  std::vector<Statement> parse_body(std::string_view closer) {
    std::vector<Statement> body;
    while (!at_end() && !(peek().text == closer && is_closer(peek()))) {
      body.push_back(parse_statement());
    }
    if (at_end()) throw Fallback{};
    advance();
    return body;
  }

  std::size_t optional_semicolon() {
    const std::size_t end = toks_[pos_ - 1].span.end;
    if (!at_end() && peek().kind == TokenKind::kSemicolon) {
      return advance().span.end;
    }
    return end;
  }

  Statement parse_foreach(std::string input, std::size_t start_offset) {
    Statement st;
    st.kind = StatementKind::kForeach;
    st.input_set = std::move(input);
    advance();  // foreach
    if (st.input_set.empty() && is_op(peek(), ".") &&
        peek(1).kind == TokenKind::kIdent) {
      advance();
      st.input_set = advance().text;
    }
    if (is_op(peek(), "->")) {
      advance();
      if (!is_op(peek(), ".") || peek(1).kind != TokenKind::kIdent) {
        throw Fallback{};
      }
      advance();
      st.set_name = advance().text;
    }
    if (peek().kind == TokenKind::kParenOpen) {
      advance();
      st.children = parse_body(")");
    } else if (is_op(peek(), "{")) {
      advance();
      st.children = parse_body("}");
    } else {
      throw Fallback{};
    }
    st.span = {start_offset, optional_semicolon()};
    return st;
  }

  Statement parse_conditional(std::size_t start_offset) {
    Statement st;
    st.kind = StatementKind::kConditional;
    advance();  // if
    const std::size_t close = matching_close(pos_);
    if (close >= toks_.size()) throw Fallback{};
    st.text = compact(pos_ + 1, close);
    pos_ = close + 1;
    if (!is_op(peek(), "{")) throw Fallback{};
    advance();
    st.children = parse_body("}");
    if (is_ident(peek(), "else") && is_op(peek(1), "{")) {
      pos_ += 2;
      st.has_else = true;
      st.else_children = parse_body("}");
    }
    st.span = {start_offset, optional_semicolon()};
    return st;
  }

  Statement parse_raw() {
    const std::size_t begin = pos_;
    std::size_t end = pos_;
    std::size_t span_end = at_end() ? src_.size() : peek().span.start;
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (is_opener(t)) {
        ++depth;
      } else if (is_closer(t)) {
        if (depth == 0) break;
        --depth;
      } else if (t.kind == TokenKind::kSemicolon && depth == 0) {
        end = pos_;
        span_end = advance().span.end;
        Statement st;
        st.kind = StatementKind::kRaw;
        st.text = compact(begin, end);
        st.span = {toks_[begin].span.start, span_end};
        return st;
      }
      span_end = advance().span.end;
    }
    end = pos_;
    Statement st;
    st.kind = StatementKind::kRaw;
    st.text = compact(begin, end);
    st.span = {begin < toks_.size() ? toks_[begin].span.start : span_end,
               span_end};
    return st;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Span settings_span_;
};

void print_statement(const Statement& st, std::string& out);

void print_filters(const Statement& st, std::string& out) {
  for (const Filter& filter : st.filters) {
    if (const auto* tag = std::get_if<TagFilter>(&filter)) {
      out.push_back('[');
      switch (tag->relation) {
        case TagRelation::kExists:
          out += quote(tag->key);
          break;
        case TagRelation::kNotExists:
          out += "!" + quote(tag->key);
          break;
        case TagRelation::kRegexKeyValue:
          out += "~" + quote(tag->key) + "~" + quote(tag->value.value_or(""));
          break;
        default:
          out += quote(tag->key);
          out += relation_symbol(tag->relation);
          out += quote(tag->value.value_or(""));
      }
      if (tag->case_insensitive) out += ",i";
      out.push_back(']');
    } else {
      out += "(" + std::get<SpatialFilter>(filter).text + ")";
    }
  }
}

// Statement without its terminator.
void print_body(const Statement& st, std::string& out) {
  switch (st.kind) {
    case StatementKind::kQuery:
      out += st.element_type;
      if (!st.input_set.empty()) out += "." + st.input_set;
      print_filters(st, out);
      break;
    case StatementKind::kRecursion:
      if (!st.input_set.empty()) out += "." + st.input_set + " ";
      out += st.element_type;
      break;
    case StatementKind::kUnion:
    case StatementKind::kDifference:
      out.push_back('(');
      for (std::size_t i = 0; i < st.children.size(); ++i) {
        if (i == 1 && st.kind == StatementKind::kDifference) out += "-";
        print_statement(st.children[i], out);
      }
      out.push_back(')');
      break;
    case StatementKind::kAssignment:
      print_body(st.children.front(), out);
      out += "->." + st.set_name;
      break;
    case StatementKind::kOutput:
      if (!st.input_set.empty()) out += "." + st.input_set + " ";
      out += "out";
      for (const std::string& m : st.modifiers) out += " " + m;
      break;
    case StatementKind::kRaw:
      out += st.text;
      break;
    case StatementKind::kForeach:
    case StatementKind::kConditional:
      break;
  }
}

void print_statement(const Statement& st, std::string& out) {
  if (st.kind == StatementKind::kForeach) {
    out += "foreach";
    if (!st.input_set.empty()) out += "." + st.input_set;
    if (!st.set_name.empty()) out += "->." + st.set_name;
    out.push_back('(');
    for (const Statement& c : st.children) print_statement(c, out);
    out.push_back(')');
    return;
  }
  if (st.kind == StatementKind::kConditional) {
    out += "if(" + st.text + "){";
    for (const Statement& c : st.children) print_statement(c, out);
    out.push_back('}');
    if (st.has_else) {
      out += "else{";
      for (const Statement& c : st.else_children) print_statement(c, out);
      out.push_back('}');
    }
    return;
  }
  print_body(st, out);
  out.push_back(';');
}

void collect_tags(const Statement& st, TagSet& tags) {
  if (st.kind == StatementKind::kRaw) {
    const TagSet found = scan_tags(st.text);
    tags.insert(found.begin(), found.end());
  }
  for (const Filter& filter : st.filters) {
    const auto* f = std::get_if<TagFilter>(&filter);
    if (f == nullptr) continue;
    try {
      tags.insert(Tag::make(f->key, f->relation,
                            f->value ? std::optional<std::string_view>(*f->value)
                                     : std::nullopt));
    } catch (const ValidationError&) {
      // Whitespace-only key after normalization; not a usable tag.
    }
  }
  for (const Statement& c : st.children) collect_tags(c, tags);
  for (const Statement& c : st.else_children) collect_tags(c, tags);
}

std::size_t count_raw(const Statement& st) {
  if (st.kind == StatementKind::kRaw) return st.span.size();
  std::size_t total = 0;
  for (const Statement& c : st.children) total += count_raw(c);
  for (const Statement& c : st.else_children) total += count_raw(c);
  return total;
}

nlohmann::json span_json(const Span& span) {
  return nlohmann::json::array({span.start, span.end});
}

nlohmann::json statement_json(const Statement& st, bool spans) {
  nlohmann::json j;
  j["kind"] = statement_kind_name(st.kind);
  if (spans) j["span"] = span_json(st.span);
  switch (st.kind) {
    case StatementKind::kQuery:
      j["type"] = st.element_type;
      break;
    case StatementKind::kRecursion:
      j["operator"] = st.element_type;
      break;
    case StatementKind::kAssignment:
    case StatementKind::kForeach:
      j["set"] = st.set_name;
      break;
    case StatementKind::kOutput:
      j["modifiers"] = st.modifiers;
      break;
    case StatementKind::kRaw:
    case StatementKind::kConditional:
      j["text"] = st.text;
      break;
    default:
      break;
  }
  if (!st.input_set.empty()) j["input_set"] = st.input_set;
  if (st.kind == StatementKind::kQuery) {
    nlohmann::json filters = nlohmann::json::array();
    for (const Filter& filter : st.filters) {
      nlohmann::json fj;
      if (const auto* tag = std::get_if<TagFilter>(&filter)) {
        fj["kind"] = "tag";
        fj["key"] = tag->key;
        fj["relation"] = relation_symbol(tag->relation);
        fj["value"] = tag->value ? nlohmann::json(*tag->value) : nullptr;
        if (tag->case_insensitive) fj["case_insensitive"] = true;
        if (spans) fj["span"] = span_json(tag->span);
      } else {
        const auto& sf = std::get<SpatialFilter>(filter);
        fj["kind"] = spatial_kind_name(sf.kind);
        fj["text"] = sf.text;
        if (spans) fj["span"] = span_json(sf.span);
      }
      filters.push_back(std::move(fj));
    }
    j["filters"] = std::move(filters);
  }
  if (!st.children.empty() || st.kind == StatementKind::kUnion) {
    nlohmann::json children = nlohmann::json::array();
    for (const Statement& c : st.children) {
      children.push_back(statement_json(c, spans));
    }
    j["children"] = std::move(children);
  }
  if (st.has_else) {
    nlohmann::json children = nlohmann::json::array();
    for (const Statement& c : st.else_children) {
      children.push_back(statement_json(c, spans));
    }
    j["else_children"] = std::move(children);
  }
  return j;
}

// Candidate filters for the raw-node fallback: a bracket holding an
// optionally quoted key, an optional operator and value, and an optional
// ",i" flag.
const std::regex& filter_pattern() {
  static const std::regex pattern(
      R"re(\[\s*[!~]?\s*(?:"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*'|[^\]\["'=!~,\s;]+)\s*)re"
      R"re((?:(?:=|!=|~|!~)\s*(?:"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*'|[^\]\["',\s;]+)\s*(?:,\s*i\s*)?)?\])re");
  return pattern;
}

}  // namespace

std::string_view statement_kind_name(StatementKind kind) {
  switch (kind) {
    case StatementKind::kQuery: return "query";
    case StatementKind::kUnion: return "union";
    case StatementKind::kDifference: return "difference";
    case StatementKind::kOutput: return "output";
    case StatementKind::kRecursion: return "recursion";
    case StatementKind::kAssignment: return "assignment";
    case StatementKind::kForeach: return "foreach";
    case StatementKind::kConditional: return "conditional";
    case StatementKind::kRaw: return "raw";
  }
  return "raw";
}

std::string_view spatial_kind_name(SpatialKind kind) {
  switch (kind) {
    case SpatialKind::kBBox: return "bbox";
    case SpatialKind::kAround: return "around";
    case SpatialKind::kAreaRef: return "area";
    case SpatialKind::kPlaceholder: return "placeholder";
    case SpatialKind::kId: return "id";
    case SpatialKind::kIfCondition: return "if";
    case SpatialKind::kOther: return "other";
  }
  return "other";
}

QueryAst parse(std::string_view source) {
  return Parser(source, tokenize(source)).run();
}

std::string print(const QueryAst& ast) {
  std::string out;
  for (const Setting& s : ast.settings) {
    out += "[" + s.name + ":";
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += s.args[i];
    }
    out.push_back(']');
  }
  if (!ast.settings.empty()) out.push_back(';');
  for (const Statement& st : ast.statements) print_statement(st, out);
  return out;
}

TagSet extract_tags(const QueryAst& ast) {
  TagSet tags;
  for (const Statement& st : ast.statements) collect_tags(st, tags);
  return tags;
}

std::size_t raw_bytes(const QueryAst& ast) {
  std::size_t total = 0;
  for (const Statement& st : ast.statements) total += count_raw(st);
  return total;
}

nlohmann::json ast_to_json(const QueryAst& ast, bool include_spans) {
  nlohmann::json j;
  j["kind"] = "program";
  if (include_spans) j["span"] = span_json(ast.span);
  nlohmann::json settings = nlohmann::json::array();
  for (const Setting& s : ast.settings) {
    nlohmann::json sj{{"name", s.name}, {"args", s.args}};
    if (include_spans) sj["span"] = span_json(s.span);
    settings.push_back(std::move(sj));
  }
  j["settings"] = std::move(settings);
  nlohmann::json children = nlohmann::json::array();
  for (const Statement& st : ast.statements) {
    children.push_back(statement_json(st, include_spans));
  }
  j["children"] = std::move(children);
  return j;
}

bool structurally_equal(const QueryAst& a, const QueryAst& b) {
  return ast_to_json(a, false) == ast_to_json(b, false);
}

}  // namespace ovb::ql

namespace ovb {

std::optional<Tag> parse_tag(std::string_view filter) {
  const std::string trimmed(text::trim(filter));
  // A leading '[' would lex as a settings block, so lex behind a dummy
  // element type and drop it again.
  const std::string source = "node" + trimmed;
  std::vector<ql::Token> tokens;
  try {
    tokens = ql::tokenize(source);
  } catch (const LexError&) {
    return std::nullopt;
  }
  if (tokens.empty()) return std::nullopt;
  tokens.erase(tokens.begin());
  auto f = ql::Parser(source, std::move(tokens)).run_single_filter();
  if (!f) return std::nullopt;
  try {
    return Tag::make(f->key, f->relation,
                     f->value ? std::optional<std::string_view>(*f->value)
                              : std::nullopt);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

TagSet scan_tags(std::string_view text) {
  TagSet tags;
  const std::string s(text);
  const std::regex& pattern = ql::filter_pattern();
  for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    if (auto tag = parse_tag(it->str())) tags.insert(std::move(*tag));
  }
  return tags;
}

}  // namespace ovb
