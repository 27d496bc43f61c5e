#pragma once

// CSV import/export of core-state and measurement streams.
//
// Core:        t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz
// Vector3:     t,mx,my,mz
// Rotation:    t,qw,qx,qy,qz

#include <filesystem>
#include <iosfwd>
#include <string>

#include "smid/types.hpp"

namespace smid {

inline constexpr const char* kCoreCsvHeader = "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz";
inline constexpr const char* kVectorCsvHeader = "t,mx,my,mz";
inline constexpr const char* kRotationCsvHeader = "t,qw,qx,qy,qz";

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

void write_core_csv(std::ostream& os, const CoreStateSeries& series);
void write_measurement_csv(std::ostream& os, const MeasurementSeries& series);

/// Parse errors name the 1-based line.
CoreStateSeries read_core_csv(std::istream& is);
/// The channel follows from the header.
MeasurementSeries read_measurement_csv(std::istream& is);

void save_core_csv(const std::filesystem::path& path, const CoreStateSeries& series);
void save_measurement_csv(const std::filesystem::path& path, const MeasurementSeries& series);
CoreStateSeries load_core_csv(const std::filesystem::path& path);
MeasurementSeries load_measurement_csv(const std::filesystem::path& path);

}  // namespace smid
