#pragma once

// Key-value text reports: one `key = value` per line, in a fixed order.
// Doubles use the shortest round-trip form, so parse + write reproduces
// a report byte for byte.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "smid/health.hpp"
#include "smid/stage1.hpp"
#include "smid/stage2.hpp"

namespace smid {

class KeyValueReport {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, bool value);
  void set(const std::string& key, const Vec3& value);

  bool contains(const std::string& key) const;
  /// Throws ParseError naming the key when it is missing or malformed.
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  Vec3 get_vec3(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& os) const;
  std::string str() const;
  static KeyValueReport parse(std::istream& is);
  static KeyValueReport parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static KeyValueReport load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void append(KeyValueReport& rep, const Stage1Result& r);
void append(KeyValueReport& rep, const HealthVerdict& v);
void append(KeyValueReport& rep, const HealthThresholds& t);
void append(KeyValueReport& rep, const CalibrationResult& c, const std::string& prefix);

Stage1Result stage1_from_report(const KeyValueReport& rep);
HealthVerdict verdict_from_report(const KeyValueReport& rep);
CalibrationResult calibration_from_report(const KeyValueReport& rep, const std::string& prefix);

}  // namespace smid
