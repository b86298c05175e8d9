#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dda/stream.hpp"

namespace dda {

// Shortest round-trip decimal form of v; byte-stable across runs.
std::string format_double(double v);

// Stream CSV: header `timestamp,f0,...,f{m-1},label`, one sample per row,
// rows time-sorted. Ingestion fails loudly on any deviation.
TimeIndexedStream read_stream_csv(std::istream& in, Tick period_length);
TimeIndexedStream read_stream_csv(const std::filesystem::path& path, Tick period_length);

void write_stream_csv(const TimeIndexedStream& stream, std::ostream& out);
void write_stream_csv(const TimeIndexedStream& stream, const std::filesystem::path& path);

}  // namespace dda
