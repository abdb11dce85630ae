#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scif/map_builder.hpp"
#include "scif/metrics.hpp"
#include "scif/sim.hpp"
#include "scif/tag_map.hpp"

namespace scif::io {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become Error(kParse) with line:column.
Json parse_json(std::string_view text, const std::string& source_name);
/// Throws Error(kIo) if the file cannot be read.
Json load_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Applies "a.b.c=value". The value is parsed as JSON when possible and taken
/// as a string otherwise; intermediate objects are created as needed.
void apply_override(Json& root, std::string_view assignment);

/// Field-checked conversions. Errors name the offending field path, e.g.
/// "scenario.waypoints[2].x: missing required field". Unknown fields are
/// rejected.
sim::Scenario parse_scenario(const Json& j);
sim::Scenario load_scenario(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

TagMap parse_tag_map(const Json& j);
Json tag_map_to_json(const TagMap& map);

MappingSession parse_session(const Json& j);
Json session_to_json(const MappingSession& session);

/// %.17g, which parses back to the identical double.
std::string format_double(double v);

// Stream files. Row epoch k of the odometry file is the control k-1 -> k.
std::string truth_csv(const std::vector<Pose2>& poses);
std::string odometry_csv(const std::vector<Control>& odometry);
std::string measurements_csv(const std::vector<sim::EmittedMeasurement>& measurements);
std::vector<Pose2> parse_truth_csv(std::string_view text, const std::string& source);
std::vector<Control> parse_odometry_csv(std::string_view text, const std::string& source);
std::vector<sim::EmittedMeasurement> parse_measurements_csv(std::string_view text,
                                                            const std::string& source);

void write_stream(const std::filesystem::path& dir, const sim::Stream& stream);
/// Reads truth.csv, odometry.csv and measurements.csv from `dir`. Throws
/// Error(kIo) for missing files and Error(kLengthMismatch) when the files
/// disagree on the number of epochs.
sim::Stream read_stream(const std::filesystem::path& dir);

std::string trajectory_csv(const std::vector<EpochEstimate>& track, const ErrorSeries& errors);

}  // namespace scif::io
