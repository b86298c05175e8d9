#include <doctest.h>

#include <sstream>

#include "dda/csv.hpp"
#include "dda/error.hpp"
#include "dda/stream.hpp"

using namespace dda;

namespace {

StreamPtr dense_stream(Tick length, Tick period_length = 5, Tick first_tick = 0) {
  std::vector<Sample> samples;
  for (Tick t = 0; t < length; ++t) {
    Sample s;
    s.timestamp = first_tick + t;
    s.features = Eigen::VectorXd::Constant(2, static_cast<double>(t));
    s.label = static_cast<double>(t);
    samples.push_back(std::move(s));
  }
  return std::make_shared<TimeIndexedStream>(std::move(samples), period_length);
}

// Brute-force reference: every t with full memory, on the interval grid,
// whose test window fits in the stream.
int brute_force_task_count(Tick length, Tick k, Tick tau, Tick interval) {
  int count = 0;
  for (Tick t = k; t + tau <= length; ++t)
    if ((t - k) % interval == 0) ++count;
  return count;
}

}  // namespace

TEST_SUITE("stream") {

TEST_CASE("generate_tasks places tasks on the interval grid") {
  const auto tasks = generate_tasks(dense_stream(100), 20, 5, 5);
  REQUIRE(tasks.size() == 16);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(tasks[i].task_time() == 20 + static_cast<Tick>(i) * 5);
    CHECK(tasks[i].memory() == 20);
    CHECK(tasks[i].horizon() == 5);
  }
}

TEST_CASE("generate_tasks single window") {
  const auto tasks = generate_tasks(dense_stream(25), 20, 5, 1);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].task_time() == 20);
}

TEST_CASE("generate_tasks insufficient stream") {
  CHECK_THROWS_WITH_AS(generate_tasks(dense_stream(24), 20, 5, 1),
                       doctest::Contains("insufficient stream"), Error);
}

TEST_CASE("task windows are disjoint, ordered and contiguous") {
  const auto stream = dense_stream(90, 5, 1000);  // nonzero first tick
  const auto tasks = generate_tasks(stream, 15, 7, 4);
  REQUIRE(!tasks.empty());
  for (const auto& task : tasks) {
    const auto train = task.train_window();
    const auto test = task.test_window();
    REQUIRE(!train.empty());
    REQUIRE(!test.empty());
    CHECK(train.back().timestamp < test.front().timestamp);
    CHECK(train.front().timestamp >= task.train_begin_tick());
    CHECK(test.back().timestamp < task.test_end_tick());
    // Concatenation of the two windows is one contiguous slice.
    CHECK(train.data() + train.size() == test.data());
    for (std::size_t i = 1; i < train.size(); ++i)
      CHECK(train[i].timestamp == train[i - 1].timestamp + 1);
  }
}

TEST_CASE("task count matches brute-force enumeration") {
  for (Tick length : {40, 55, 73, 100}) {
    for (Tick k : {5, 12, 20}) {
      for (Tick tau : {1, 4, 9}) {
        for (Tick interval : {1, 3, 7}) {
          if (length < k + tau) continue;
          const auto tasks = generate_tasks(dense_stream(length), k, tau, interval);
          const int expected = brute_force_task_count(length, k, tau, interval);
          CHECK(static_cast<int>(tasks.size()) == expected);
          CHECK(static_cast<int>(tasks.size()) ==
                static_cast<int>((length - k - tau) / interval) + 1);
        }
      }
    }
  }
}

TEST_CASE("partial memory tasks are opt-in") {
  TaskGenOptions opts;
  opts.allow_partial_memory = true;
  const auto tasks = generate_tasks(dense_stream(100), 20, 5, 5, opts);
  const auto strict = generate_tasks(dense_stream(100), 20, 5, 5);
  CHECK(tasks.size() > strict.size());
  CHECK(tasks.front().task_time() < 20);
  CHECK(tasks.front().memory() < 20);
  for (const auto& task : tasks) {
    CHECK(!task.train_window().empty());
    CHECK(task.train_window().back().timestamp < task.task_time());
  }
}

TEST_CASE("split_tasks partitions by test window end") {
  auto tasks = generate_tasks(dense_stream(100), 20, 5, 5);  // t = 20..95
  const auto split = split_tasks(tasks, 70);
  CHECK(split.train_tasks.size() == 10);
  CHECK(split.test_tasks.size() == 6);
  for (const auto& t : split.train_tasks) CHECK(t.test_end_tick() <= 70);
  for (const auto& t : split.test_tasks) CHECK(t.test_end_tick() > 70);
  CHECK(split.train_tasks.size() + split.test_tasks.size() == tasks.size());
}

TEST_CASE("split_tasks assigns straddled tasks to the test side") {
  auto tasks = generate_tasks(dense_stream(100), 20, 5, 5);
  // split_time strictly inside the test window [40, 45) of the t=40 task
  const auto split = split_tasks(tasks, 42);
  bool found = false;
  for (const auto& t : split.test_tasks)
    if (t.task_time() == 40) found = true;
  CHECK(found);
}

TEST_CASE("split_tasks rejects degenerate splits") {
  auto tasks = generate_tasks(dense_stream(100), 20, 5, 5);
  CHECK_THROWS_WITH_AS(split_tasks(tasks, 0), doctest::Contains("degenerate split"), Error);
  CHECK_THROWS_WITH_AS(split_tasks(tasks, 10000), doctest::Contains("degenerate split"),
                       Error);
}

TEST_CASE("stream validation") {
  std::vector<Sample> bad;
  Sample a;
  a.timestamp = 5;
  a.features = Eigen::VectorXd::Ones(2);
  Sample b = a;
  b.timestamp = 3;  // out of order
  bad = {a, b};
  CHECK_THROWS_WITH_AS(TimeIndexedStream(std::move(bad), 1),
                       doctest::Contains("non-decreasing"), Error);

  Sample c = a;
  c.features = Eigen::VectorXd::Ones(3);
  std::vector<Sample> mixed = {a, c};
  CHECK_THROWS_AS(TimeIndexedStream(std::move(mixed), 1), Error);
}

TEST_CASE("stream csv round trip") {
  const auto stream = dense_stream(12, 3);
  std::ostringstream out;
  write_stream_csv(*stream, out);

  std::istringstream in(out.str());
  const TimeIndexedStream back = read_stream_csv(in, 3);
  REQUIRE(back.size() == stream->size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.samples()[i].timestamp == stream->samples()[i].timestamp);
    CHECK((back.samples()[i].features - stream->samples()[i].features)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(back.samples()[i].label == stream->samples()[i].label);
  }
}

TEST_CASE("stream csv rejects malformed input") {
  std::istringstream bad_header("time,f0,label\n1,2,3\n");
  CHECK_THROWS_WITH_AS(read_stream_csv(bad_header, 1), doctest::Contains("header"), Error);

  std::istringstream unsorted("timestamp,f0,label\n2,1.0,1.0\n1,1.0,1.0\n");
  CHECK_THROWS_WITH_AS(read_stream_csv(unsorted, 1), doctest::Contains("time-sorted"), Error);

  std::istringstream bad_field("timestamp,f0,label\n1,oops,1.0\n");
  CHECK_THROWS_AS(read_stream_csv(bad_field, 1), Error);

  std::istringstream short_row("timestamp,f0,f1,label\n1,1.0,2.0\n");
  CHECK_THROWS_AS(read_stream_csv(short_row, 1), Error);
}

}  // TEST_SUITE
