#pragma once

// Minimal TOML reader covering what the ztsfc config files use: [table]
// headers (dotted), bare keys, basic strings, integers, booleans, and
// single-line arrays of strings or integers. Unknown syntax is an error.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ztsfc::toml {

using Value =
    std::variant<std::int64_t, bool, std::string, std::vector<std::string>, std::vector<std::int64_t>>;

class Document {
 public:
  static Document parse(std::string_view text, const std::string& origin = "<string>");
  static Document parse_file(const std::string& path);

  bool has(const std::string& table, const std::string& key) const;

  std::int64_t get_int(const std::string& table, const std::string& key) const;
  std::int64_t get_int_or(const std::string& table, const std::string& key, std::int64_t dflt) const;
  bool get_bool(const std::string& table, const std::string& key) const;
  bool get_bool_or(const std::string& table, const std::string& key, bool dflt) const;
  std::string get_string(const std::string& table, const std::string& key) const;
  std::string get_string_or(const std::string& table, const std::string& key,
                            const std::string& dflt) const;
  std::vector<std::string> get_string_array(const std::string& table, const std::string& key) const;

  // Keys of one table, in file order.
  std::vector<std::string> keys(const std::string& table) const;
  bool has_table(const std::string& table) const;
  // Child names directly under `prefix`: subtables("functions") -> {"ips", ...}.
  std::vector<std::string> subtables(const std::string& prefix) const;

 private:
  struct Entry {
    Value value;
    int line = 0;
  };
  // table path -> key -> entry; insertion order preserved per table.
  std::map<std::string, std::vector<std::pair<std::string, Entry>>> tables_;
  std::string origin_;

  const Entry* find(const std::string& table, const std::string& key) const;
  [[noreturn]] void missing(const std::string& table, const std::string& key,
                            const char* type) const;
};

}  // namespace ztsfc::toml
