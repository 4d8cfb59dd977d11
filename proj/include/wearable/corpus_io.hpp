#pragma once

#include "wearable/timeseries.hpp"

#include <istream>
#include <ostream>
#include <span>
#include <string>

namespace wearable {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Header `user_id,date,slot_0,...,slot_{L-1},coverage`, one row per series.
void write_corpus_csv(std::ostream& out, const Corpus& corpus);

/// Reads the format written by write_corpus_csv. The slot width is inferred
/// from the column count; kind and normalization are supplied by the caller.
Corpus read_corpus_csv(std::istream& in, SensorKind kind, bool normalized = false);

/// Raw records as `user_id,timestamp_ms,kind,value` with a header line.
void write_samples_csv(std::ostream& out, std::span<const Sample> samples);

/// Reads `user_id,utc_offset_minutes` rows (header optional).
DayPolicy read_offsets_csv(std::istream& in, int default_offset_minutes = 0);

}  // namespace wearable
