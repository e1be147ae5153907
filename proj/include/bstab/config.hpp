#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bstab/linalg.hpp"

namespace bstab {

/// Flat "key = value" text with [section] headers. '#' and ';' start
/// comments. Every lookup error names the source line.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] bool has_section(const std::string& section) const;
  [[nodiscard]] std::vector<std::string> sections() const;
  [[nodiscard]] const std::string& source() const { return source_; }
  [[nodiscard]] const std::string& text() const { return text_; }

  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key, double fallback) const;
  [[nodiscard]] int get_int(const std::string& section, const std::string& key, int fallback) const;
  [[nodiscard]] bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated list.
  [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                                const std::vector<double>& fallback) const;
  [[nodiscard]] std::vector<Complex> get_complexes(const std::string& section, const std::string& key) const;

  /// Rejects keys outside `allowed`, and sections outside `sections`.
  void check_keys(const std::string& section, const std::set<std::string>& allowed) const;
  void check_sections(const std::set<std::string>& allowed) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  [[noreturn]] void fail(int line, const std::string& message) const;
  [[nodiscard]] const Entry* find(const std::string& section, const std::string& key) const;

  std::string source_;
  std::string text_;
  std::map<std::string, std::map<std::string, Entry>> data_;
  std::map<std::string, int> section_lines_;
};

}  // namespace bstab
