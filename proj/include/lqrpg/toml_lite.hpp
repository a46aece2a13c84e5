#pragma once

// Minimal TOML subset reader: tables, string/number/boolean scalars, and
// (nested) numeric arrays. Covers the system-definition schema; errors carry
// line and column positions.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lqrpg::toml {

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) +
                           ": " + msg),
        line(line),
        col(col) {}
  int line, col;
};

struct Value {
  std::variant<double, std::string, bool, std::vector<Value>> data;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>(data); }

  double number() const { return std::get<double>(data); }
  const std::string& string() const { return std::get<std::string>(data); }
  const std::vector<Value>& array() const { return std::get<std::vector<Value>>(data); }
};

using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;

namespace detail {

class Cursor {
 public:
  Cursor(const std::string& text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }

  // whitespace, newlines and comments
  void skip_ws() {
    for (;;) {
      skip_ws_inline();
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') get();
      } else if (!eof() && (peek() == '\n' || peek() == '\r')) {
        get();
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline std::string parse_key(Cursor& cur) {
  std::string key;
  while (!cur.eof() && is_key_char(cur.peek())) key += cur.get();
  if (key.empty()) cur.fail("expected a key");
  return key;
}

inline Value parse_value(Cursor& cur);

inline Value parse_array(Cursor& cur) {
  cur.get();  // '['
  std::vector<Value> items;
  for (;;) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated array");
    if (cur.peek() == ']') {
      cur.get();
      return Value{std::move(items)};
    }
    items.push_back(parse_value(cur));
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated array");
    if (cur.peek() == ',') {
      cur.get();
    } else if (cur.peek() != ']') {
      cur.fail("expected ',' or ']' in array");
    }
  }
}

inline Value parse_value(Cursor& cur) {
  cur.skip_ws();
  if (cur.eof()) cur.fail("expected a value");
  const char c = cur.peek();
  if (c == '[') return parse_array(cur);
  if (c == '"') {
    cur.get();
    std::string s;
    while (!cur.eof() && cur.peek() != '"') {
      if (cur.peek() == '\n') cur.fail("unterminated string");
      s += cur.get();
    }
    if (cur.eof()) cur.fail("unterminated string");
    cur.get();
    return Value{std::move(s)};
  }
  std::string tok;
  while (!cur.eof() && (is_key_char(cur.peek()) || cur.peek() == '+' || cur.peek() == '.' ||
                        cur.peek() == 'e' || cur.peek() == 'E'))
    tok += cur.get();
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return Value{v};
  } catch (const std::exception&) {
    cur.fail("cannot parse value '" + tok + "'");
  }
}

}  // namespace detail

inline Document parse(const std::string& text) {
  detail::Cursor cur(text);
  Document doc;
  std::string table;
  for (;;) {
    cur.skip_ws();
    if (cur.eof()) return doc;
    if (cur.peek() == '[') {
      cur.get();
      table = detail::parse_key(cur);
      cur.skip_ws_inline();
      if (cur.eof() || cur.peek() != ']') cur.fail("expected ']' after table name");
      cur.get();
      doc[table];  // tables may be empty
      continue;
    }
    const int line = cur.line(), col = cur.col();
    const std::string key = detail::parse_key(cur);
    cur.skip_ws_inline();
    if (cur.eof() || cur.peek() != '=') throw ParseError(line, col, "expected '=' after key '" + key + "'");
    cur.get();
    doc[table][key] = detail::parse_value(cur);
  }
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace lqrpg::toml
