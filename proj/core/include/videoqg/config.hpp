#pragma once

#include <map>
#include <string>
#include <vector>

#include "videoqg/errors.hpp"

namespace videoqg {

// Minimal INI: [section] headers, key = value lines, '#' or ';' comments.
// Insertion order is preserved so files round-trip predictably.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_text(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  // Throws ConfigError naming the key when absent and no fallback is given.
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  // All keys of a section in file order (empty if the section is absent).
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;
  std::vector<std::string> section_names() const;

  std::string render() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
};

long parse_long(const std::string& value, const std::string& what);
double parse_double(const std::string& value, const std::string& what);
bool parse_bool(const std::string& value, const std::string& what);
std::vector<double> parse_double_list(const std::string& value, const std::string& what);
std::vector<std::uint64_t> parse_seed_list(const std::string& value, const std::string& what);

}  // namespace videoqg
