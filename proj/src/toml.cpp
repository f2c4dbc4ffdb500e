#include "ztsfc/toml.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ztsfc/errors.hpp"

namespace ztsfc::toml {

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
};

[[noreturn]] void parse_error(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string parse_basic_string(Cursor& c, const std::string& origin, int line) {
  ++c.pos;  // opening quote
  std::string out;
  while (true) {
    if (c.done()) parse_error(origin, line, "unterminated string");
    char ch = c.text[c.pos++];
    if (ch == '"') return out;
    if (ch == '\\') {
      if (c.done()) parse_error(origin, line, "unterminated escape");
      char esc = c.text[c.pos++];
      switch (esc) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: parse_error(origin, line, std::string("unsupported escape \\") + esc);
      }
    } else {
      out.push_back(ch);
    }
  }
}

std::int64_t parse_integer(Cursor& c, const std::string& origin, int line) {
  std::size_t start = c.pos;
  if (!c.done() && (c.peek() == '-' || c.peek() == '+')) ++c.pos;
  while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
  if (c.pos == start) parse_error(origin, line, "expected integer");
  std::string token(c.text.substr(start, c.pos - start));
  try {
    return std::stoll(token);
  } catch (const std::exception&) {
    parse_error(origin, line, "integer out of range: " + token);
  }
}

Value parse_scalar(Cursor& c, const std::string& origin, int line) {
  if (c.peek() == '"') return parse_basic_string(c, origin, line);
  if (c.text.compare(c.pos, 4, "true") == 0) {
    c.pos += 4;
    return true;
  }
  if (c.text.compare(c.pos, 5, "false") == 0) {
    c.pos += 5;
    return false;
  }
  return parse_integer(c, origin, line);
}

Value parse_value(Cursor& c, const std::string& origin, int line) {
  c.skip_ws();
  if (c.done()) parse_error(origin, line, "missing value");
  if (c.peek() != '[') return parse_scalar(c, origin, line);

  ++c.pos;  // '['
  std::vector<std::string> strings;
  std::vector<std::int64_t> ints;
  bool saw_string = false, saw_int = false;
  while (true) {
    c.skip_ws();
    if (c.done()) parse_error(origin, line, "unterminated array");
    if (c.peek() == ']') {
      ++c.pos;
      break;
    }
    Value v = parse_scalar(c, origin, line);
    if (std::holds_alternative<std::string>(v)) {
      saw_string = true;
      strings.push_back(std::get<std::string>(std::move(v)));
    } else if (std::holds_alternative<std::int64_t>(v)) {
      saw_int = true;
      ints.push_back(std::get<std::int64_t>(v));
    } else {
      parse_error(origin, line, "array elements must be strings or integers");
    }
    if (saw_string && saw_int) parse_error(origin, line, "mixed array element types");
    c.skip_ws();
    if (!c.done() && c.peek() == ',') ++c.pos;
  }
  if (saw_int) return ints;
  return strings;
}

}  // namespace

Document Document::parse(std::string_view text, const std::string& origin) {
  Document doc;
  doc.origin_ = origin;
  std::string current_table;  // "" = root
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    Cursor c{line, 0};
    c.skip_ws();
    if (c.done() || c.peek() == '#') continue;

    if (c.peek() == '[') {
      ++c.pos;
      std::size_t start = c.pos;
      while (!c.done() && is_bare_key_char(c.peek())) ++c.pos;
      std::string name(line.substr(start, c.pos - start));
      if (name.empty() || c.done() || c.peek() != ']') {
        parse_error(origin, line_no, "malformed table header");
      }
      ++c.pos;
      c.skip_ws();
      if (!c.done() && c.peek() != '#') parse_error(origin, line_no, "trailing content after table header");
      current_table = name;
      doc.tables_[current_table];  // table may stay empty
      continue;
    }

    std::size_t key_start = c.pos;
    while (!c.done() && is_bare_key_char(c.peek())) ++c.pos;
    std::string key(line.substr(key_start, c.pos - key_start));
    if (key.empty()) parse_error(origin, line_no, "expected key");
    c.skip_ws();
    if (c.done() || c.peek() != '=') parse_error(origin, line_no, "expected '=' after key");
    ++c.pos;
    Value value = parse_value(c, origin, line_no);
    c.skip_ws();
    if (!c.done() && c.peek() != '#') parse_error(origin, line_no, "trailing content after value");

    auto& entries = doc.tables_[current_table];
    for (const auto& [k, _] : entries) {
      if (k == key) parse_error(origin, line_no, "duplicate key '" + key + "'");
    }
    entries.emplace_back(key, Entry{std::move(value), line_no});
  }
  return doc;
}

Document Document::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const Document::Entry* Document::find(const std::string& table, const std::string& key) const {
  auto it = tables_.find(table);
  if (it == tables_.end()) return nullptr;
  for (const auto& [k, entry] : it->second) {
    if (k == key) return &entry;
  }
  return nullptr;
}

void Document::missing(const std::string& table, const std::string& key, const char* type) const {
  std::ostringstream os;
  os << origin_ << ": missing or mistyped " << type << " '" << key << "'";
  if (!table.empty()) os << " in [" << table << "]";
  throw ConfigError(os.str());
}

bool Document::has(const std::string& table, const std::string& key) const {
  return find(table, key) != nullptr;
}

std::int64_t Document::get_int(const std::string& table, const std::string& key) const {
  const Entry* e = find(table, key);
  if (!e || !std::holds_alternative<std::int64_t>(e->value)) missing(table, key, "integer");
  return std::get<std::int64_t>(e->value);
}

std::int64_t Document::get_int_or(const std::string& table, const std::string& key,
                                  std::int64_t dflt) const {
  return has(table, key) ? get_int(table, key) : dflt;
}

bool Document::get_bool(const std::string& table, const std::string& key) const {
  const Entry* e = find(table, key);
  if (!e || !std::holds_alternative<bool>(e->value)) missing(table, key, "boolean");
  return std::get<bool>(e->value);
}

bool Document::get_bool_or(const std::string& table, const std::string& key, bool dflt) const {
  return has(table, key) ? get_bool(table, key) : dflt;
}

std::string Document::get_string(const std::string& table, const std::string& key) const {
  const Entry* e = find(table, key);
  if (!e || !std::holds_alternative<std::string>(e->value)) missing(table, key, "string");
  return std::get<std::string>(e->value);
}

std::string Document::get_string_or(const std::string& table, const std::string& key,
                                    const std::string& dflt) const {
  return has(table, key) ? get_string(table, key) : dflt;
}

std::vector<std::string> Document::get_string_array(const std::string& table,
                                                    const std::string& key) const {
  const Entry* e = find(table, key);
  if (!e || !std::holds_alternative<std::vector<std::string>>(e->value)) {
    missing(table, key, "string array");
  }
  return std::get<std::vector<std::string>>(e->value);
}

std::vector<std::string> Document::keys(const std::string& table) const {
  std::vector<std::string> out;
  auto it = tables_.find(table);
  if (it == tables_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& [k, _] : it->second) out.push_back(k);
  return out;
}

bool Document::has_table(const std::string& table) const { return tables_.count(table) > 0; }

std::vector<std::string> Document::subtables(const std::string& prefix) const {
  std::vector<std::string> out;
  std::string want = prefix + ".";
  for (const auto& [name, _] : tables_) {
    if (name.rfind(want, 0) != 0) continue;
    std::string rest = name.substr(want.size());
    if (rest.find('.') != std::string::npos) continue;
    out.push_back(rest);
  }
  return out;
}

}  // namespace ztsfc::toml
