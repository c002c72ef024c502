// Copyright 2026 The nlpre Authors
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

// Reader for the TOML subset used by run configuration files:
// [table] headers, key = value pairs, # comments, and values that are
// numbers, booleans, basic or literal strings, or (possibly multi-line)
// arrays of those. Keys are flattened to "table.key".

#ifndef NLPRE_TOML_LITE_HPP_
#define NLPRE_TOML_LITE_HPP_

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlpre::toml {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Value {
  enum class Kind { kNumber, kBool, kString, kArray };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  bool boolean = false;
  std::string str;
  std::vector<Value> array;

  static Value of(double v) { return Value{Kind::kNumber, v, false, {}, {}}; }
  static Value of(bool v) { return Value{Kind::kBool, 0.0, v, {}, {}}; }
  static Value of(std::string v) { return Value{Kind::kString, 0.0, false, std::move(v), {}}; }

  bool is_number() const { return kind == Kind::kNumber; }
  bool is_string() const { return kind == Kind::kString; }
  bool is_array() const { return kind == Kind::kArray; }
};

using Table = std::map<std::string, Value>;

namespace detail {

class Cursor {
 public:
  Cursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  // Like skip_ws, but stops at a newline.
  void skip_inline_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  char take() { return text_[pos_++]; }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  std::string key() {
    skip_inline_ws();
    std::string out;
    if (peek() == '"' || peek() == '\'') return string_literal();
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        out.push_back(take());
      } else {
        break;
      }
    }
    if (out.empty()) fail("expected a key");
    return out;
  }

  std::string dotted_key() {
    std::string k = key();
    skip_inline_ws();
    while (peek() == '.') {
      take();
      k += "." + key();
      skip_inline_ws();
    }
    return k;
  }

  std::string string_literal() {
    const char quote = take();
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        if (done()) fail("unterminated escape");
        const char e = take();
        switch (e) {
          case 'n':
            out.push_back('\n');
            break;
          case 't':
            out.push_back('\t');
            break;
          case '"':
            out.push_back('"');
            break;
          case '\\':
            out.push_back('\\');
            break;
          default:
            fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  Value value() {
    skip_inline_ws();
    const char c = peek();
    if (c == '"' || c == '\'') return Value::of(string_literal());
    if (c == '[') return array();
    std::string word;
    while (!done()) {
      const char d = peek();
      if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || d == '+' || d == '-' || d == '_') {
        word.push_back(take());
      } else {
        break;
      }
    }
    if (word.empty()) fail("expected a value");
    if (word == "true") return Value::of(true);
    if (word == "false") return Value::of(false);
    std::string digits;
    for (char d : word)
      if (d != '_') digits.push_back(d);
    char* end = nullptr;
    const double v = std::strtod(digits.c_str(), &end);
    if (end == digits.c_str() || *end != '\0') fail("invalid value '" + word + "'");
    return Value::of(v);
  }

  Value array() {
    take();  // '['
    Value arr;
    arr.kind = Value::Kind::kArray;
    skip_ws();
    if (peek() == ']') {
      take();
      return arr;
    }
    while (true) {
      skip_ws();
      arr.array.push_back(value());
      skip_ws();
      const char c = done() ? '\0' : take();
      if (c == ']') break;
      if (c != ',') fail("expected ',' or ']' in array");
      skip_ws();
      if (peek() == ']') {
        take();
        break;
      }
    }
    return arr;
  }

  void end_of_line() {
    skip_inline_ws();
    if (peek() == '#') {
      while (!done() && peek() != '\n') take();
    }
    if (!done() && peek() != '\n') fail("unexpected trailing characters");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

}  // namespace detail

inline Table parse(std::string_view text) {
  Table out;
  std::string prefix;
  detail::Cursor cur(text, 1);
  while (true) {
    cur.skip_ws();
    if (cur.done()) break;
    if (cur.peek() == '[') {
      cur.take();
      prefix = cur.dotted_key();
      cur.skip_inline_ws();
      if (cur.peek() != ']') cur.fail("expected ']' after table name");
      cur.take();
      cur.end_of_line();
      continue;
    }
    const std::size_t line = cur.line();
    const std::string key = cur.dotted_key();
    cur.skip_inline_ws();
    if (cur.peek() != '=') cur.fail("expected '=' after key '" + key + "'");
    cur.take();
    Value v = cur.value();
    cur.end_of_line();
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (out.count(full)) throw ParseError(line, "duplicate key '" + full + "'");
    out.emplace(full, std::move(v));
  }
  return out;
}

}  // namespace nlpre::toml

#endif  // NLPRE_TOML_LITE_HPP_
