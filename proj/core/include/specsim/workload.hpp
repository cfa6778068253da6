#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace specsim {

struct TraceRecord {
  double arrival_ms = 0.0;
  int input_len = 1;
  int output_len = 1;
};

/// Reads a `arrival_ms,input_len,output_len` CSV (optional header). Records
/// are sorted by arrival on ingest; malformed rows raise ParseError with the
/// line number. An empty file yields an empty trace.
std::vector<TraceRecord> ingest_trace(const std::string& path);

void write_trace(const std::string& path, std::span<const TraceRecord> records);

struct RateSegment {
  double duration_ms = 0.0;
  double rate_per_s = 0.0;
};

/// Piecewise-constant Poisson arrivals; lengths drawn uniformly from the
/// inclusive ranges. Deterministic for a fixed seed.
std::vector<TraceRecord> synth_workload(std::span<const RateSegment> segments,
                                        std::pair<int, int> input_len,
                                        std::pair<int, int> output_len, std::uint64_t seed);

/// Discretizes one period of a sinusoidal rate profile into segments whose
/// peak/valley ratio matches the requested value.
std::vector<RateSegment> sine_segments(double mean_rate_per_s, double peak_to_valley,
                                       double duration_ms, int steps);

/// Deterministic prompt for a trace record: `len` tokens derived from
/// (seed, record index). EOS is never used inside prompts; a non-positive
/// length is clamped to one token.
std::vector<int> synth_prompt(std::uint64_t seed, int index, int len, int vocab);

}  // namespace specsim
