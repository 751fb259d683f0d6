#include "nuelab/cli/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace nuelab::cli {
namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  Json parse() {
    Json root = Json::object();
    Json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        const std::size_t key_line = line_, key_col = col_;
        const std::string key = parse_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        Json value = parse_value();
        if (table->contains(key)) fail(key_line, key_col, fmt::format("duplicate key '{}'", key));
        (*table)[key] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;

  [[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& msg) const {
    throw ConfigError(fmt::format("line {}, column {}: {}", line, col, msg));
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(line_, col_, msg); }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void expect(char c) {
    if (peek() != c) fail(eof() ? fmt::format("expected '{}' before end of input", c)
                                : fmt::format("expected '{}' but found '{}'", c, peek()));
    get();
  }
  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }
  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  // Blank space, comments and newlines inside arrays.
  void skip_array_space() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (peek() != '\n') return;
      get();
    }
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail(fmt::format("unexpected '{}' after value", peek()));
    get();
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    std::string key;
    while (!eof() && bare_key_char(peek())) key += get();
    if (key.empty()) fail(eof() ? "expected a key" : fmt::format("expected a key but found '{}'", peek()));
    return key;
  }

  Json& open_table(Json& root) {
    const std::size_t hl = line_, hc = col_;
    get();
    skip_spaces();
    Json* t = &root;
    std::string path;
    while (true) {
      const std::string part = parse_key();
      path += path.empty() ? part : "." + part;
      if (!t->contains(part)) (*t)[part] = Json::object();
      t = &(*t)[part];
      if (!t->is_object()) fail(hl, hc, fmt::format("'{}' is already a value", path));
      skip_spaces();
      if (peek() == '.') {
        get();
        skip_spaces();
        continue;
      }
      break;
    }
    expect(']');
    if (std::find(tables_.begin(), tables_.end(), path) != tables_.end())
      fail(hl, hc, fmt::format("table [{}] defined twice", path));
    tables_.push_back(path);
    return *t;
  }
  std::vector<std::string> tables_;

  Json parse_value() {
    if (eof() || peek() == '\n') fail("missing value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (s_.substr(pos_, 4) == "true" && !bare_key_char(pos_ + 4 < s_.size() ? s_[pos_ + 4] : ' ')) {
      for (int i = 0; i < 4; ++i) get();
      return true;
    }
    if (s_.substr(pos_, 5) == "false" && !bare_key_char(pos_ + 5 < s_.size() ? s_[pos_ + 5] : ' ')) {
      for (int i = 0; i < 5; ++i) get();
      return false;
    }
    return parse_number();
  }

  Json parse_string() {
    const std::size_t l = line_, c = col_;
    get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail(l, c, "unterminated string");
      char ch = get();
      if (ch == '"') break;
      if (ch == '\\') {
        if (eof()) fail(l, c, "unterminated string");
        const char e = get();
        switch (e) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: fail(fmt::format("unknown escape '\\{}'", e));
        }
      }
      out += ch;
    }
    return out;
  }

  Json parse_array() {
    get();
    Json arr = Json::array();
    skip_array_space();
    if (peek() == ']') {
      get();
      return arr;
    }
    while (true) {
      skip_array_space();
      arr.push_back(parse_value());
      skip_array_space();
      if (peek() == ',') {
        get();
        skip_array_space();
        if (peek() == ']') {
          get();
          return arr;
        }
        continue;
      }
      expect(']');
      return arr;
    }
  }

  Json parse_number() {
    const std::size_t l = line_, c = col_;
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_'))
      tok += get();
    std::string digits;
    for (char ch : tok)
      if (ch != '_') digits += ch;
    if (digits.empty()) fail(l, c, fmt::format("unexpected '{}'", peek()));
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* e = digits.data() + digits.size();
    if (!is_float) {
      std::int64_t v = 0;
      const auto r = std::from_chars(b, e, v);
      if (r.ec == std::errc() && r.ptr == e) return v;
    } else {
      double v = 0.0;
      const auto r = std::from_chars(b, e, v);
      if (r.ec == std::errc() && r.ptr == e) return v;
    }
    fail(l, c, fmt::format("invalid value '{}'", tok));
  }
};

}  // namespace

Json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

}  // namespace nuelab::cli
