#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dda {

// Abstract integer time step. Calendar frequencies (days, months, ...) map
// onto ticks in configuration, never inside the core.
using Tick = std::int64_t;

// One observation: an m-dimensional feature vector and a scalar label.
struct Sample {
  Tick timestamp = 0;
  Eigen::VectorXd features;
  double label = 0.0;
};

// Ordered feature/label samples. `period_length` is the grouping granularity
// (ticks per period) used by the similarity feature extractor.
//
// Immutable after construction; safe to share read-only across threads.
class TimeIndexedStream {
public:
  // Validates: non-empty, fixed feature dimension, finite values,
  // non-decreasing timestamps, period_length >= 1.
  TimeIndexedStream(std::vector<Sample> samples, Tick period_length);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  Tick period_length() const { return period_length_; }
  int feature_dim() const { return static_cast<int>(samples_.front().features.size()); }

  Tick first_tick() const { return samples_.front().timestamp; }
  // One past the last timestamp.
  Tick end_tick() const { return samples_.back().timestamp + 1; }
  // Stream length in ticks.
  Tick tick_length() const { return end_tick() - first_tick(); }

  // Index of the first sample with timestamp >= t.
  std::size_t lower_bound(Tick t) const;

private:
  std::vector<Sample> samples_;
  Tick period_length_ = 1;
};

using StreamPtr = std::shared_ptr<const TimeIndexedStream>;

// A (train window, test window) pair anchored at task_time t: the train
// window covers ticks [t - memory, t), the test window [t, t + horizon).
// Windows are contiguous views into the shared stream, so tasks are cheap
// to copy and safe to share across workers.
class AdaptationTask {
public:
  AdaptationTask(StreamPtr stream, Tick task_time, Tick memory, Tick horizon);

  Tick task_time() const { return task_time_; }
  Tick memory() const { return memory_; }
  Tick horizon() const { return horizon_; }
  Tick train_begin_tick() const { return task_time_ - memory_; }
  // Exclusive tick bound of the test window.
  Tick test_end_tick() const { return task_time_ + horizon_; }

  std::span<const Sample> train_window() const;
  std::span<const Sample> test_window() const;

  const TimeIndexedStream& stream() const { return *stream_; }
  const StreamPtr& stream_ptr() const { return stream_; }

private:
  StreamPtr stream_;
  Tick task_time_ = 0;
  Tick memory_ = 0;
  Tick horizon_ = 0;
  std::size_t train_begin_ = 0, train_end_ = 0;
  std::size_t test_begin_ = 0, test_end_ = 0;
};

struct TaskSplit {
  std::vector<AdaptationTask> train_tasks;
  std::vector<AdaptationTask> test_tasks;
  Tick split_time = 0;
};

struct TaskGenOptions {
  // Admit tasks whose train window is clipped at the stream start. The task
  // grid stays anchored at first_tick + memory_k; earlier grid points are
  // added with whatever memory is available.
  bool allow_partial_memory = false;
};

// Rolling task construction: tasks at t = first_tick + memory_k + j*interval
// while t + horizon_tau <= end_tick, in chronological order.
// Throws Error("insufficient stream ...") when no task fits.
std::vector<AdaptationTask> generate_tasks(StreamPtr stream, Tick memory_k,
                                           Tick horizon_tau, Tick interval,
                                           const TaskGenOptions& opts = {});

// Partition chronologically ordered tasks. A task goes to the train side iff
// its test window lies entirely before split_time; a task whose test window
// straddles split_time is assigned to the test side.
// Throws Error("degenerate split ...") if either side would be empty.
TaskSplit split_tasks(std::vector<AdaptationTask> tasks, Tick split_time);

}  // namespace dda
