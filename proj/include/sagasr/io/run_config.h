#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace sagasr::io {

// Flat key=value configuration with a fixed key set. Keys not declared in the
// defaults are rejected, so typos fail loudly instead of being ignored.
class RunConfig {
 public:
  explicit RunConfig(std::map<std::string, std::string> defaults);

  // Parses "key=value" lines; blank lines and lines starting with '#' are
  // skipped.
  void merge_text(const std::string& text);
  void merge_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Sorted "key=value" lines.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace sagasr::io
