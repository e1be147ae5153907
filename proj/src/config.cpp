#include "bstab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bstab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return *end == '\0';
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) cfg.fail(lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (cfg.section_lines_.count(section)) cfg.fail(lineno, "duplicate section [" + section + "]");
      cfg.section_lines_[section] = lineno;
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) cfg.fail(lineno, "expected 'key = value', got '" + line + "'");
    if (section.empty()) cfg.fail(lineno, "key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) cfg.fail(lineno, "empty key");
    auto& sec = cfg.data_[section];
    if (sec.count(key)) cfg.fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = Entry{trim(line.substr(eq + 1)), lineno};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void ConfigFile::fail(int line, const std::string& message) const {
  throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto e = s->second.find(key);
  return e == s->second.end() ? nullptr : &e->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

bool ConfigFile::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_) out.push_back(name);
  return out;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, v)) fail(e->line, key + ": expected a number, got '" + e->value + "'");
  return v;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  char* end = nullptr;
  const long v = std::strtol(e->value.c_str(), &end, 10);
  if (e->value.empty() || *end != '\0') fail(e->line, key + ": expected an integer, got '" + e->value + "'");
  return static_cast<int>(v);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(e->line, key + ": expected a boolean, got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    double v = 0.0;
    if (!parse_double(item, v)) fail(e->line, key + ": expected a comma-separated list of numbers");
    out.push_back(v);
  }
  return out;
}

std::vector<Complex> ConfigFile::get_complexes(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return {};
  std::vector<Complex> out;
  for (const auto& item : split_list(e->value)) {
    const char* s = item.c_str();
    char* end = nullptr;
    const double a = std::strtod(s, &end);
    if (end == s) fail(e->line, key + ": cannot parse '" + item + "' as a complex number");
    if (*end == '\0') {
      out.emplace_back(a, 0.0);
      continue;
    }
    if (*end == 'i' && end[1] == '\0') {
      out.emplace_back(0.0, a);
      continue;
    }
    const char* rest = end;
    const double b = std::strtod(rest, &end);
    if (end == rest || *end != 'i' || end[1] != '\0')
      fail(e->line, key + ": cannot parse '" + item + "' as a complex number");
    out.emplace_back(a, b);
  }
  return out;
}

void ConfigFile::check_keys(const std::string& section, const std::set<std::string>& allowed) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return;
  for (const auto& [key, entry] : s->second)
    if (!allowed.count(key)) fail(entry.line, "unknown key '" + key + "' in [" + section + "]");
}

void ConfigFile::check_sections(const std::set<std::string>& allowed) const {
  for (const auto& [name, line] : section_lines_)
    if (!allowed.count(name)) fail(line, "unknown section [" + name + "]");
}

}  // namespace bstab
