#include "smid/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "smid/csv_io.hpp"

namespace smid {

namespace {

Error bad(const std::string& key, const std::string& why) {
  return Error(ErrorCode::ParseError, "report key '" + key + "': " + why);
}

double to_double(const std::string& key, std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw bad(key, "not a number");
  }
  return v;
}

std::string slot_key(StateSlot s) { return "state." + std::string(to_string(s)); }

}  // namespace

void KeyValueReport::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of(" =\n") != std::string::npos ||
      value.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "invalid report entry '" + key + "'");
  }
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueReport::set(const std::string& key, double value) { set(key, format_double(value)); }
void KeyValueReport::set(const std::string& key, int value) { set(key, std::to_string(value)); }
void KeyValueReport::set(const std::string& key, bool value) {
  set(key, std::string(value ? "true" : "false"));
}
void KeyValueReport::set(const std::string& key, const Vec3& v) {
  set(key, format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()));
}

bool KeyValueReport::contains(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return true;
  }
  return false;
}

const std::string& KeyValueReport::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  throw bad(key, "missing");
}

double KeyValueReport::get_double(const std::string& key) const { return to_double(key, get(key)); }

int KeyValueReport::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw bad(key, "not an integer");
  }
  return v;
}

bool KeyValueReport::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw bad(key, "not a boolean");
}

Vec3 KeyValueReport::get_vec3(const std::string& key) const {
  const std::string& s = get(key);
  Vec3 v;
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = k < 2 ? s.find(' ', pos) : s.size();
    if (end == std::string::npos) throw bad(key, "expected three numbers");
    v[k] = to_double(key, std::string_view(s).substr(pos, end - pos));
    pos = end + 1;
  }
  return v;
}

void KeyValueReport::write(std::ostream& os) const {
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

std::string KeyValueReport::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

KeyValueReport KeyValueReport::parse(std::istream& is) {
  KeyValueReport rep;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "report line " + std::to_string(lineno) +
                                             ": expected 'key = value'");
    }
    rep.set(line.substr(0, eq), line.substr(eq + 3));
  }
  return rep;
}

KeyValueReport KeyValueReport::parse(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

void KeyValueReport::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write(f);
}

KeyValueReport KeyValueReport::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse(f);
}

void append(KeyValueReport& rep, const Stage1Result& r) {
  rep.set("stage1.channel", std::string(to_string(r.channel)));
  rep.set("stage1.selected", std::string(to_string(r.selected)));
  rep.set("stage1.delta_b", r.delta_b);
  const auto models = channel_models(r.channel);
  for (std::size_t i = 0; i < models.size() && i < r.b.size(); ++i) {
    rep.set("stage1.b." + std::string(to_string(models[i])), r.b[i]);
  }
  for (int i = 0; i < kStateSlots; ++i) {
    const auto s = static_cast<StateSlot>(i);
    rep.set("stage1." + slot_key(s), r.x_m.get(s));
  }
  rep.set("stage1.residual_rmse", r.residual_rmse);
  rep.set("stage1.loss.norm", r.losses.norm);
  rep.set("stage1.loss.pos", r.losses.pos);
  rep.set("stage1.loss.std", r.losses.std);
  rep.set("stage1.loss.vec", r.losses.vec);
  rep.set("stage1.loss.rot", r.losses.rot);
  rep.set("stage1.data_weight", r.data_weight);
  rep.set("stage1.iterations", r.iterations);
  rep.set("stage1.converged", r.converged);
}

void append(KeyValueReport& rep, const HealthVerdict& v) {
  rep.set("health.accepted", v.accepted);
  std::string failed;
  for (auto c : v.failed_criteria) {
    if (!failed.empty()) failed += ',';
    failed += to_string(c);
  }
  rep.set("health.failed_criteria", failed.empty() ? std::string("none") : failed);
}

void append(KeyValueReport& rep, const HealthThresholds& t) {
  rep.set("health.min_delta_b", t.min_delta_b);
  rep.set("health.max_loss_norm", t.max_loss_norm);
  rep.set("health.max_loss_std", t.max_loss_std);
}

void append(KeyValueReport& rep, const CalibrationResult& c, const std::string& prefix) {
  rep.set(prefix + ".kind", std::string(to_string(c.kind)));
  for (StateSlot s : model_slots(c.kind)) rep.set(prefix + "." + slot_key(s), c.states.get(s));
  rep.set(prefix + ".reference_penalized", c.reference_penalized);
  rep.set(prefix + ".reference_required", c.reference_required);
  rep.set(prefix + ".reference_residual_norm", c.reference_residual_norm);
  rep.set(prefix + ".rmse_per_axis", c.rmse_per_axis);
  rep.set(prefix + ".rotation_series_error", c.rotation_series_error);
  rep.set(prefix + ".iterations", c.iterations);
  rep.set(prefix + ".converged", c.converged);
}

Stage1Result stage1_from_report(const KeyValueReport& rep) {
  Stage1Result r;
  const auto channel = parse_channel(rep.get("stage1.channel"));
  if (!channel) throw bad("stage1.channel", "unknown channel");
  r.channel = *channel;
  const auto selected = parse_model_kind(rep.get("stage1.selected"));
  if (!selected) throw bad("stage1.selected", "unknown model");
  r.selected = *selected;
  r.delta_b = rep.get_double("stage1.delta_b");
  for (ModelKind m : channel_models(r.channel)) {
    r.b.push_back(rep.get_double("stage1.b." + std::string(to_string(m))));
  }
  for (int i = 0; i < kStateSlots; ++i) {
    const auto s = static_cast<StateSlot>(i);
    r.x_m.set(s, rep.get_vec3("stage1." + slot_key(s)));
  }
  r.residual_rmse = rep.get_double("stage1.residual_rmse");
  r.losses.norm = rep.get_double("stage1.loss.norm");
  r.losses.pos = rep.get_double("stage1.loss.pos");
  r.losses.std = rep.get_double("stage1.loss.std");
  r.losses.vec = rep.get_double("stage1.loss.vec");
  r.losses.rot = rep.get_double("stage1.loss.rot");
  r.data_weight = rep.get_double("stage1.data_weight");
  r.iterations = rep.get_int("stage1.iterations");
  r.converged = rep.get_bool("stage1.converged");
  return r;
}

HealthVerdict verdict_from_report(const KeyValueReport& rep) {
  HealthVerdict v;
  v.accepted = rep.get_bool("health.accepted");
  const std::string& failed = rep.get("health.failed_criteria");
  if (failed != "none") {
    std::size_t pos = 0;
    while (pos <= failed.size()) {
      std::size_t end = failed.find(',', pos);
      if (end == std::string::npos) end = failed.size();
      const auto c = parse_health_criterion(std::string_view(failed).substr(pos, end - pos));
      if (!c) throw bad("health.failed_criteria", "unknown criterion");
      v.failed_criteria.push_back(*c);
      pos = end + 1;
    }
  }
  if (v.accepted != v.failed_criteria.empty()) {
    throw bad("health.accepted", "inconsistent with failed_criteria");
  }
  return v;
}

CalibrationResult calibration_from_report(const KeyValueReport& rep, const std::string& prefix) {
  CalibrationResult c;
  const auto kind = parse_model_kind(rep.get(prefix + ".kind"));
  if (!kind) throw bad(prefix + ".kind", "unknown model");
  c.kind = *kind;
  for (StateSlot s : model_slots(c.kind)) c.states.set(s, rep.get_vec3(prefix + "." + slot_key(s)));
  c.reference_penalized = rep.get_bool(prefix + ".reference_penalized");
  c.reference_required = rep.get_bool(prefix + ".reference_required");
  c.reference_residual_norm = rep.get_double(prefix + ".reference_residual_norm");
  c.rmse_per_axis = rep.get_vec3(prefix + ".rmse_per_axis");
  c.rotation_series_error = rep.get_double(prefix + ".rotation_series_error");
  c.iterations = rep.get_int(prefix + ".iterations");
  c.converged = rep.get_bool(prefix + ".converged");
  return c;
}

}  // namespace smid
