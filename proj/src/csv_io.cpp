#include "smid/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "smid/error.hpp"

namespace smid {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, std::size_t lineno) {
  std::vector<double> out;
  out.reserve(expected);
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    const char* comma = p;
    while (comma < end && *comma != ',') ++comma;
    double v = 0.0;
    const char* b = p;
    while (b < comma && *b == ' ') ++b;
    const auto res = std::from_chars(b, comma, v);
    if (res.ec != std::errc() || res.ptr != comma || b == comma) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number '" +
                                             std::string(p, comma) + "'");
    }
    out.push_back(v);
    if (comma == end) break;
    p = comma + 1;
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                           std::to_string(expected) + " columns, got " +
                                           std::to_string(out.size()));
  }
  return out;
}

void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_double(v);
    first = false;
  }
  os << '\n';
}

void check_time(double t, double prev, bool have_prev, std::size_t lineno) {
  if (have_prev && !(t > prev)) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(lineno) + ": timestamps must be strictly increasing");
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return f;
}

}  // namespace

void write_core_csv(std::ostream& os, const CoreStateSeries& series) {
  os << kCoreCsvHeader << '\n';
  for (const auto& s : series.samples) {
    write_row(os, {s.t, s.p_wi.x(), s.p_wi.y(), s.p_wi.z(), s.v_wi.x(), s.v_wi.y(), s.v_wi.z(),
                   s.q_wi.w(), s.q_wi.x(), s.q_wi.y(), s.q_wi.z(), s.omega_i.x(), s.omega_i.y(),
                   s.omega_i.z()});
  }
}

void write_measurement_csv(std::ostream& os, const MeasurementSeries& series) {
  if (series.channel == Channel::Vector3) {
    os << kVectorCsvHeader << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
      const Vec3& m = series.vectors[i];
      write_row(os, {series.t[i], m.x(), m.y(), m.z()});
    }
  } else {
    os << kRotationCsvHeader << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
      const Quat& q = series.rotations[i];
      write_row(os, {series.t[i], q.w(), q.x(), q.y(), q.z()});
    }
  }
}

CoreStateSeries read_core_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kCoreCsvHeader) {
    throw Error(ErrorCode::ParseError, "line 1: expected header " + std::string(kCoreCsvHeader));
  }
  CoreStateSeries out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto v = parse_row(line, 14, lineno);
    check_time(v[0], out.samples.empty() ? 0.0 : out.samples.back().t, !out.samples.empty(),
               lineno);
    CoreStateSample s;
    s.t = v[0];
    s.p_wi = Vec3(v[1], v[2], v[3]);
    s.v_wi = Vec3(v[4], v[5], v[6]);
    s.q_wi = Quat(v[7], v[8], v[9], v[10]);
    s.omega_i = Vec3(v[11], v[12], v[13]);
    try {
      (void)quat_to_matrix(s.q_wi);  // rejects far-from-unit quaternions
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
    }
    out.samples.push_back(s);
  }
  if (out.samples.empty()) throw Error(ErrorCode::EmptyInput, "core CSV has no rows");
  if (out.samples.size() > 1) {
    const double span = out.samples.back().t - out.samples.front().t;
    out.rate_hz = static_cast<double>(out.samples.size() - 1) / span;
  }
  return out;
}

MeasurementSeries read_measurement_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  line = strip_cr(line);
  MeasurementSeries out;
  std::size_t cols = 0;
  if (line == kVectorCsvHeader) {
    out.channel = Channel::Vector3;
    cols = 4;
  } else if (line == kRotationCsvHeader) {
    out.channel = Channel::Rotation;
    cols = 5;
  } else {
    throw Error(ErrorCode::ParseError, "line 1: unknown measurement header '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto v = parse_row(line, cols, lineno);
    check_time(v[0], out.t.empty() ? 0.0 : out.t.back(), !out.t.empty(), lineno);
    out.t.push_back(v[0]);
    if (cols == 4) {
      out.vectors.emplace_back(v[1], v[2], v[3]);
    } else {
      const Quat q(v[1], v[2], v[3], v[4]);
      if (!(q.norm() > 0.0)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": zero quaternion");
      }
      out.rotations.push_back(q);
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "measurement CSV has no rows");
  return out;
}

void save_core_csv(const std::filesystem::path& path, const CoreStateSeries& series) {
  auto f = open_out(path);
  write_core_csv(f, series);
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void save_measurement_csv(const std::filesystem::path& path, const MeasurementSeries& series) {
  auto f = open_out(path);
  write_measurement_csv(f, series);
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

CoreStateSeries load_core_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_core_csv(f);
}

MeasurementSeries load_measurement_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_measurement_csv(f);
}

}  // namespace smid
