#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "scif/measurement.hpp"
#include "scif/motion_model.hpp"
#include "scif/split_cif.hpp"

namespace scif {

/// Measurements fused together in one update.
using MeasurementGroup = std::vector<TagMeasurement>;

/// One stored epoch: the estimate after all fusion at that epoch, the control
/// that produced it from the previous epoch, and every group fused at it (so
/// a back-projection pass can fuse them again in the same order).
struct HistoryRecord {
  SplitState state;
  Control control;
  std::vector<MeasurementGroup> fused;
};

enum class FusionPass { kArrival, kReplay };

using PropagateFn = std::function<SplitState(const SplitState&, const Control&)>;
using UpdateFn = std::function<SplitState(const SplitState&, std::span<const TagMeasurement>,
                                          FusionPass)>;

/// Bounded, epoch-contiguous store of past estimates and controls used to
/// fuse late measurements at their emission epoch and re-propagate forward.
class HistoryBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 200;

  explicit HistoryBuffer(std::size_t capacity = kDefaultCapacity);

  /// Appends the estimate for the next epoch; evicts the oldest record when
  /// full. Throws Error(kNonContiguousEpoch) if state.epoch != head + 1.
  void record_epoch(const SplitState& state, const Control& u);

  /// Fuses `group` (one shared stamp) at the stored epoch nearest that stamp
  /// (ties to the older epoch), then re-propagates every later record through
  /// its stored control and re-fuses that record's groups. Returns the new
  /// head state. Throws Error(kStaleMeasurement) if the stamp precedes the
  /// oldest record and Error(kInvalidArgument) for an empty or mixed group.
  SplitState apply_delayed(std::span<const TagMeasurement> group, const PropagateFn& propagate,
                           const UpdateFn& update);
  SplitState apply_delayed(const TagMeasurement& meas, const PropagateFn& propagate,
                           const UpdateFn& update) {
    return apply_delayed(std::span<const TagMeasurement>(&meas, 1), propagate, update);
  }

  /// Stored epoch a stamp attaches to.
  std::int64_t match_epoch(double stamp) const;

  void clear() { records_.clear(); }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::int64_t tail_epoch() const;
  std::int64_t head_epoch() const;
  const HistoryRecord& head() const;
  const std::deque<HistoryRecord>& records() const { return records_; }

 private:
  std::size_t capacity_;
  std::deque<HistoryRecord> records_;
};

}  // namespace scif
