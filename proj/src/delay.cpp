#include "scif/delay.hpp"

#include <cmath>
#include <string>

#include "scif/error.hpp"

namespace scif {

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "history buffer: capacity must be positive");
  }
}

void HistoryBuffer::record_epoch(const SplitState& state, const Control& u) {
  if (!records_.empty() && state.epoch != records_.back().state.epoch + 1) {
    throw Error(ErrorCode::kNonContiguousEpoch,
                "history buffer: epoch " + std::to_string(state.epoch) +
                    " does not follow " + std::to_string(records_.back().state.epoch));
  }
  records_.push_back({state, u, {}});
  while (records_.size() > capacity_) records_.pop_front();
}

std::int64_t HistoryBuffer::tail_epoch() const {
  if (records_.empty()) throw Error(ErrorCode::kEmptyInput, "history buffer is empty");
  return records_.front().state.epoch;
}

std::int64_t HistoryBuffer::head_epoch() const {
  if (records_.empty()) throw Error(ErrorCode::kEmptyInput, "history buffer is empty");
  return records_.back().state.epoch;
}

const HistoryRecord& HistoryBuffer::head() const {
  if (records_.empty()) throw Error(ErrorCode::kEmptyInput, "history buffer is empty");
  return records_.back();
}

std::int64_t HistoryBuffer::match_epoch(double stamp) const {
  const std::int64_t tail = tail_epoch();
  const std::int64_t head = head_epoch();
  // Nearest integer epoch, x.5 going to the older one.
  const auto nearest = static_cast<std::int64_t>(std::ceil(stamp - 0.5));
  if (nearest < tail) {
    throw Error(ErrorCode::kStaleMeasurement,
                "measurement stamp " + std::to_string(stamp) +
                    " is older than the history tail " + std::to_string(tail));
  }
  return nearest > head ? head : nearest;
}

SplitState HistoryBuffer::apply_delayed(std::span<const TagMeasurement> group,
                                        const PropagateFn& propagate,
                                        const UpdateFn& update) {
  if (group.empty()) throw Error(ErrorCode::kInvalidArgument, "apply_delayed: empty group");
  for (const TagMeasurement& m : group) {
    if (m.stamp != group.front().stamp) {
      throw Error(ErrorCode::kInvalidArgument, "apply_delayed: group mixes stamps");
    }
  }
  const std::int64_t epoch = match_epoch(static_cast<double>(group.front().stamp));
  auto index = static_cast<std::size_t>(epoch - tail_epoch());

  HistoryRecord& at_stamp = records_[index];
  SplitState state = update(at_stamp.state, group, FusionPass::kArrival);
  at_stamp.state = state;
  at_stamp.fused.emplace_back(group.begin(), group.end());

  for (++index; index < records_.size(); ++index) {
    HistoryRecord& rec = records_[index];
    state = propagate(state, rec.control);
    for (const MeasurementGroup& g : rec.fused) {
      state = update(state, g, FusionPass::kReplay);
    }
    rec.state = state;
  }
  return state;
}

}  // namespace scif
