#include "dda/csv.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <string_view>
#include <system_error>
#include <vector>

#include "dda/error.hpp"

namespace dda {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view s, std::size_t row) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("stream csv: bad numeric field '" + std::string(s) + "' at row " +
                std::to_string(row));
  return v;
}

Tick parse_tick(std::string_view s, std::size_t row) {
  Tick v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("stream csv: bad timestamp '" + std::string(s) + "' at row " +
                std::to_string(row));
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

TimeIndexedStream read_stream_csv(std::istream& in, Tick period_length) {
  std::string line;
  if (!std::getline(in, line)) throw Error("stream csv: empty input");
  strip_cr(line);

  const auto header = split_fields(line);
  if (header.size() < 3 || header.front() != "timestamp" || header.back() != "label")
    throw Error("stream csv: header must be 'timestamp,f0,...,label'");
  const int m = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < m; ++j) {
    const std::string expect = "f" + std::to_string(j);
    if (header[1 + j] != expect)
      throw Error("stream csv: expected column '" + expect + "', got '" +
                  std::string(header[1 + j]) + "'");
  }

  std::vector<Sample> samples;
  std::size_t row = 1;
  Tick prev = std::numeric_limits<Tick>::min();
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != m + 2)
      throw Error("stream csv: row " + std::to_string(row) + " has " +
                  std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(m + 2));
    Sample s;
    s.timestamp = parse_tick(fields[0], row);
    if (s.timestamp < prev)
      throw Error("stream csv: rows not time-sorted at row " + std::to_string(row));
    prev = s.timestamp;
    s.features.resize(m);
    for (int j = 0; j < m; ++j) s.features[j] = parse_double(fields[1 + j], row);
    s.label = parse_double(fields[m + 1], row);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw Error("stream csv: no data rows");
  return TimeIndexedStream(std::move(samples), period_length);
}

TimeIndexedStream read_stream_csv(const std::filesystem::path& path, Tick period_length) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stream csv: " + path.string());
  return read_stream_csv(in, period_length);
}

void write_stream_csv(const TimeIndexedStream& stream, std::ostream& out) {
  const int m = stream.feature_dim();
  out << "timestamp";
  for (int j = 0; j < m; ++j) out << ",f" << j;
  out << ",label\n";
  for (const Sample& s : stream.samples()) {
    out << s.timestamp;
    for (int j = 0; j < m; ++j) out << ',' << format_double(s.features[j]);
    out << ',' << format_double(s.label) << '\n';
  }
}

void write_stream_csv(const TimeIndexedStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write stream csv: " + path.string());
  write_stream_csv(stream, out);
}

}  // namespace dda
