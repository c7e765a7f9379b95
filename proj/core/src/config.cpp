#include "videoqg/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace videoqg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path);
}

IniFile IniFile::parse_text(const std::string& text, const std::string& origin) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header '" +
                          t + "'");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      }
      if (!ini.sections_.count(section)) {
        ini.order_.push_back(section);
        ini.sections_[section] = {};
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" +
                        t + "'");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    }
    ini.set(section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return ini;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  for (const auto& [k, v] : it->second) {
    if (k == key) return true;
  }
  return false;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it != sections_.end()) {
    for (const auto& [k, v] : it->second) {
      if (k == key) return v;
    }
  }
  throw ConfigError("missing key '" + key + "' in section [" + section + "]");
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

void IniFile::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!sections_.count(section)) {
    order_.push_back(section);
    sections_[section] = {};
  }
  for (auto& [k, v] : sections_[section]) {
    if (k == key) {
      v = value;
      return;
    }
  }
  sections_[section].emplace_back(key, value);
}

std::vector<std::pair<std::string, std::string>> IniFile::section(const std::string& name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? std::vector<std::pair<std::string, std::string>>{} : it->second;
}

std::vector<std::string> IniFile::section_names() const { return order_; }

std::string IniFile::render() const {
  std::ostringstream out;
  for (const auto& name : order_) {
    out << '[' << name << "]\n";
    for (const auto& [k, v] : sections_.at(name)) out << k << " = " << v << '\n';
    out << '\n';
  }
  return out.str();
}

void IniFile::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << render();
}

long parse_long(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + value + "' is not an integer");
  }
}

double parse_double(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + value + "' is not a number");
  }
}

bool parse_bool(const std::string& value, const std::string& what) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(what + ": '" + value + "' is not a boolean");
}

namespace {

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split_commas(value)) {
    if (!part.empty()) out.push_back(parse_double(part, what));
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& value, const std::string& what) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split_commas(value)) {
    if (!part.empty()) out.push_back(static_cast<std::uint64_t>(parse_long(part, what)));
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

}  // namespace videoqg
