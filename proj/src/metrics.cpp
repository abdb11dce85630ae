#include "scif/metrics.hpp"

#include <cmath>
#include <string>

#include "scif/error.hpp"

namespace scif {

ErrorSeries position_errors(std::span<const EpochEstimate> track, std::span<const Pose2> truth) {
  if (track.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "position_errors: " + std::to_string(track.size()) + " estimates vs " +
                    std::to_string(truth.size()) + " truth poses");
  }
  ErrorSeries out(track.size());
  for (std::size_t k = 0; k < track.size(); ++k) {
    if (track[k].state) {
      out[k] = (track[k].state->mean.translation() - truth[k].translation()).norm();
    }
  }
  return out;
}

ErrorReport summarize(const ErrorSeries& errors, double success_threshold) {
  ErrorReport r;
  r.series = errors;
  r.epochs = errors.size();
  r.success_threshold = success_threshold;
  double sum = 0.0;
  double sq = 0.0;
  std::size_t ok = 0;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!std::isfinite(*e)) throw Error(ErrorCode::kNonFinite, "summarize: non-finite error");
    ++r.present;
    sum += *e;
    sq += *e * *e;
    if (*e < success_threshold) ++ok;
  }
  if (r.present == 0) throw Error(ErrorCode::kEmptyInput, "summarize: no present errors");
  const auto n = static_cast<double>(r.present);
  r.mean = sum / n;
  r.rmse = std::sqrt(sq / n);
  double var = 0.0;
  for (const auto& e : errors) {
    if (e) var += (*e - r.mean) * (*e - r.mean);
  }
  r.std = std::sqrt(var / n);
  r.success_rate = static_cast<double>(ok) / static_cast<double>(r.epochs);
  return r;
}

namespace {

std::optional<double> reduce(double baseline, double value) {
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * (baseline - value) / baseline;
}

}  // namespace

Reduction proportional_reduction(const ErrorReport& baseline, const ErrorReport& method) {
  return {reduce(baseline.rmse, method.rmse), reduce(baseline.mean, method.mean),
          reduce(baseline.std, method.std)};
}

}  // namespace scif
