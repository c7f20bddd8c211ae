#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace auvlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

/// INI-style key/value store: `[section]` headers, `key = value` lines,
/// full-line comments starting with '#' or ';'.  Section and key order
/// are preserved so serialized files diff cleanly; duplicate sections or
/// keys are parse errors rather than silent overwrites.
class IniDocument {
 public:
  static IniDocument parse(const std::string& text) {
    IniDocument doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) {
          doc.fail(line_no, "malformed section header: " + t);
        }
        section = detail::trim(t.substr(1, t.size() - 2));
        if (section.empty()) doc.fail(line_no, "empty section name");
        if (doc.values_.count(section)) {
          doc.fail(line_no, "duplicate section [" + section + "]");
        }
        doc.values_[section];
        doc.section_order_.push_back(section);
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        doc.fail(line_no, "expected key = value, got: " + t);
      }
      const std::string key = detail::trim(t.substr(0, eq));
      const std::string value = detail::trim(t.substr(eq + 1));
      if (key.empty()) doc.fail(line_no, "empty key");
      if (section.empty()) {
        doc.fail(line_no, "key '" + key + "' appears before any section");
      }
      auto& sec = doc.values_[section];
      if (sec.count(key)) {
        doc.fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
      }
      sec[key] = value;
      doc.key_order_[section].push_back(key);
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& section : section_order_) {
      if (!first) out << "\n";
      first = false;
      out << "[" << section << "]\n";
      for (const auto& key : key_order_.at(section)) {
        out << key << " = " << values_.at(section).at(key) << "\n";
      }
    }
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << serialize();
  }

  bool has_section(const std::string& section) const {
    return values_.count(section) > 0;
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section);
    return it != values_.end() && it->second.count(key) > 0;
  }

  const std::string& get(const std::string& section,
                         const std::string& key) const {
    const auto sec = values_.find(section);
    if (sec == values_.end()) {
      throw ConfigError("missing section [" + section + "]");
    }
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) {
      throw ConfigError("missing key '" + key + "' in [" + section + "]");
    }
    return it->second;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), section, key);
  }

  long get_long(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) {
      throw ConfigError("key '" + key + "' in [" + section +
                        "] is not an integer: " + v);
    }
    return x;
  }

  bool get_bool(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "' in [" + section +
                      "] is not a boolean: " + v);
  }

  /// Comma-separated list of doubles; `expected < 0` accepts any length.
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key,
                                  int expected = -1) const {
    std::vector<double> out;
    for (const std::string& item : split_list(get(section, key))) {
      out.push_back(parse_double(item, section, key));
    }
    if (expected >= 0 && static_cast<int>(out.size()) != expected) {
      throw ConfigError("key '" + key + "' in [" + section + "] needs " +
                        std::to_string(expected) + " values, got " +
                        std::to_string(out.size()));
    }
    return out;
  }

  std::vector<long> get_longs(const std::string& section,
                              const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : split_list(get(section, key))) {
      char* end = nullptr;
      const long x = std::strtol(item.c_str(), &end, 10);
      if (item.empty() || end != item.c_str() + item.size()) {
        throw ConfigError("key '" + key + "' in [" + section +
                          "] has a non-integer entry: " + item);
      }
      out.push_back(x);
    }
    return out;
  }

  void set(const std::string& section, const std::string& key,
           const std::string& value) {
    if (!values_.count(section)) {
      values_[section];
      section_order_.push_back(section);
    }
    auto& sec = values_[section];
    if (!sec.count(key)) key_order_[section].push_back(key);
    sec[key] = value;
  }

  void set_double(const std::string& section, const std::string& key,
                  double value) {
    set(section, key, detail::format_double(value));
  }

  void set_long(const std::string& section, const std::string& key,
                long value) {
    set(section, key, std::to_string(value));
  }

  void set_bool(const std::string& section, const std::string& key,
                bool value) {
    set(section, key, value ? "true" : "false");
  }

  void set_doubles(const std::string& section, const std::string& key,
                   const std::vector<double>& values) {
    std::string joined;
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) joined += ", ";
      joined += detail::format_double(values[i]);
    }
    set(section, key, joined);
  }

  void set_longs(const std::string& section, const std::string& key,
                 const std::vector<long>& values) {
    std::string joined;
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) joined += ", ";
      joined += std::to_string(values[i]);
    }
    set(section, key, joined);
  }

  const std::vector<std::string>& sections() const { return section_order_; }

  const std::vector<std::string>& keys(const std::string& section) const {
    static const std::vector<std::string> empty;
    const auto it = key_order_.find(section);
    return it == key_order_.end() ? empty : it->second;
  }

 private:
  [[noreturn]] void fail(int line_no, const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_no) + ": " + what);
  }

  static double parse_double(const std::string& v, const std::string& section,
                             const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
      throw ConfigError("key '" + key + "' in [" + section +
                        "] is not a number: " + v);
    }
    return x;
  }

  static std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) out.push_back(detail::trim(item));
    if (out.empty()) out.push_back("");
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
  std::vector<std::string> section_order_;
  std::map<std::string, std::vector<std::string>> key_order_;
};

}  // namespace auvlab
