#include "dda/stream.hpp"

#include <algorithm>
#include <cmath>

#include "dda/error.hpp"

namespace dda {

TimeIndexedStream::TimeIndexedStream(std::vector<Sample> samples, Tick period_length)
    : samples_(std::move(samples)), period_length_(period_length) {
  if (samples_.empty()) throw Error("stream must contain at least one sample");
  if (period_length_ < 1) throw Error("period_length must be >= 1");

  const auto dim = samples_.front().features.size();
  if (dim < 1) throw Error("feature dimension must be >= 1");
  Tick prev = samples_.front().timestamp;
  for (const Sample& s : samples_) {
    if (s.features.size() != dim)
      throw Error("inconsistent feature dimension in stream");
    if (!s.features.allFinite() || !std::isfinite(s.label))
      throw Error("non-finite sample in stream");
    if (s.timestamp < prev)
      throw Error("stream timestamps must be non-decreasing");
    prev = s.timestamp;
  }
}

std::size_t TimeIndexedStream::lower_bound(Tick t) const {
  auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                             [](const Sample& s, Tick v) { return s.timestamp < v; });
  return static_cast<std::size_t>(it - samples_.begin());
}

AdaptationTask::AdaptationTask(StreamPtr stream, Tick task_time, Tick memory, Tick horizon)
    : stream_(std::move(stream)), task_time_(task_time), memory_(memory), horizon_(horizon) {
  if (!stream_) throw Error("task requires a stream");
  if (memory_ < 1 || horizon_ < 1) throw Error("task memory and horizon must be >= 1");
  train_begin_ = stream_->lower_bound(task_time_ - memory_);
  train_end_ = stream_->lower_bound(task_time_);
  test_begin_ = train_end_;
  test_end_ = stream_->lower_bound(task_time_ + horizon_);
}

std::span<const Sample> AdaptationTask::train_window() const {
  const auto& s = stream_->samples();
  return {s.data() + train_begin_, train_end_ - train_begin_};
}

std::span<const Sample> AdaptationTask::test_window() const {
  const auto& s = stream_->samples();
  return {s.data() + test_begin_, test_end_ - test_begin_};
}

std::vector<AdaptationTask> generate_tasks(StreamPtr stream, Tick memory_k,
                                           Tick horizon_tau, Tick interval,
                                           const TaskGenOptions& opts) {
  if (!stream) throw Error("generate_tasks requires a stream");
  if (memory_k < 1) throw Error("memory_k must be >= 1");
  if (horizon_tau < 1) throw Error("horizon_tau must be >= 1");
  if (interval < 1) throw Error("interval must be >= 1");

  const Tick t0 = stream->first_tick();
  const Tick end = stream->end_tick();
  if (end - t0 < memory_k + horizon_tau && !opts.allow_partial_memory)
    throw Error("insufficient stream: " + std::to_string(end - t0) +
                " ticks < memory " + std::to_string(memory_k) + " + horizon " +
                std::to_string(horizon_tau));

  // Grid anchored at t0 + memory_k. Negative j admits partial-memory tasks.
  Tick first_t = t0 + memory_k;
  if (opts.allow_partial_memory) {
    while (first_t - interval > t0) first_t -= interval;
  }

  std::vector<AdaptationTask> tasks;
  for (Tick t = first_t; t + horizon_tau <= end; t += interval) {
    const Tick mem = std::min<Tick>(memory_k, t - t0);
    tasks.emplace_back(stream, t, mem, horizon_tau);
  }
  if (tasks.empty())
    throw Error("insufficient stream: no task fits memory " + std::to_string(memory_k) +
                " + horizon " + std::to_string(horizon_tau));
  return tasks;
}

TaskSplit split_tasks(std::vector<AdaptationTask> tasks, Tick split_time) {
  for (std::size_t i = 1; i < tasks.size(); ++i)
    if (tasks[i].task_time() < tasks[i - 1].task_time())
      throw Error("split_tasks requires chronologically ordered tasks");

  TaskSplit split;
  split.split_time = split_time;
  for (AdaptationTask& t : tasks) {
    if (t.test_end_tick() <= split_time)
      split.train_tasks.push_back(std::move(t));
    else
      split.test_tasks.push_back(std::move(t));
  }
  if (split.train_tasks.empty() || split.test_tasks.empty())
    throw Error("degenerate split: " + std::to_string(split.train_tasks.size()) +
                " train / " + std::to_string(split.test_tasks.size()) +
                " test tasks at split_time " + std::to_string(split_time));
  return split;
}

}  // namespace dda
