#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scif/geometry.hpp"
#include "scif/localizer.hpp"

namespace scif {

/// Per-epoch position error; nullopt where the method produced no estimate.
using ErrorSeries = std::vector<std::optional<double>>;

/// Throws Error(kLengthMismatch) when the track and truth differ in length.
ErrorSeries position_errors(std::span<const EpochEstimate> track, std::span<const Pose2> truth);

struct ErrorReport {
  double rmse = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  double success_rate = 0.0;
  double success_threshold = 1.0;
  std::size_t present = 0;
  std::size_t epochs = 0;
  ErrorSeries series;
};

/// Statistics over present epochs; absent epochs count as failures in the
/// success rate. Throws Error(kEmptyInput) without any present error.
ErrorReport summarize(const ErrorSeries& errors, double success_threshold = 1.0);

/// Percent reduction relative to the baseline; nullopt where the baseline is 0.
struct Reduction {
  std::optional<double> rmse;
  std::optional<double> mean;
  std::optional<double> std;
};
Reduction proportional_reduction(const ErrorReport& baseline, const ErrorReport& method);

}  // namespace scif
