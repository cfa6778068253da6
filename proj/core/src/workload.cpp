#include "specsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "specsim/errors.hpp"
#include "specsim/rng.hpp"

namespace specsim {

namespace {

bool parse_row(const std::string& line, TraceRecord& rec) {
  double a = 0, in_len = 0, out_len = 0;
  char extra = 0;
  const int got = std::sscanf(line.c_str(), " %lf , %lf , %lf %c", &a, &in_len, &out_len, &extra);
  if (got != 3) return false;
  if (a < 0 || in_len < 0 || out_len < 0) return false;
  rec.arrival_ms = a;
  rec.input_len = static_cast<int>(in_len);
  rec.output_len = static_cast<int>(out_len);
  return true;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<TraceRecord> ingest_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open trace file");
  std::vector<TraceRecord> out;
  std::string line;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    TraceRecord rec;
    if (!parse_row(line, rec)) {
      if (first_content) {  // optional header row
        first_content = false;
        continue;
      }
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed trace row: " + line);
    }
    first_content = false;
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.arrival_ms < b.arrival_ms;
                   });
  return out;
}

void write_trace(const std::string& path, std::span<const TraceRecord> records) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "arrival_ms,input_len,output_len\n";
  for (const auto& r : records) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f,%d,%d\n", r.arrival_ms, r.input_len, r.output_len);
    out << buf;
  }
}

std::vector<TraceRecord> synth_workload(std::span<const RateSegment> segments,
                                        std::pair<int, int> input_len,
                                        std::pair<int, int> output_len, std::uint64_t seed) {
  SplitMixStream arrivals(substream(seed, 0x61727276ull));  // "arrv"
  SplitMixStream lengths(substream(seed, 0x6c656e73ull));   // "lens"
  std::vector<TraceRecord> out;
  double seg_start = 0.0;
  for (const auto& seg : segments) {
    if (seg.duration_ms < 0) throw std::invalid_argument("segment duration must be >= 0");
    const double seg_end = seg_start + seg.duration_ms;
    if (seg.rate_per_s > 0.0) {
      const double rate_per_ms = seg.rate_per_s / 1000.0;
      double t = seg_start + arrivals.next_exp(rate_per_ms);
      while (t < seg_end) {
        TraceRecord rec;
        rec.arrival_ms = t;
        rec.input_len = lengths.next_int(input_len.first, input_len.second);
        rec.output_len = lengths.next_int(output_len.first, output_len.second);
        out.push_back(rec);
        t += arrivals.next_exp(rate_per_ms);
      }
    }
    seg_start = seg_end;
  }
  return out;
}

std::vector<RateSegment> sine_segments(double mean_rate_per_s, double peak_to_valley,
                                       double duration_ms, int steps) {
  if (steps < 1 || mean_rate_per_s <= 0 || peak_to_valley < 1)
    throw std::invalid_argument("invalid sinusoid spec");
  // mean*(1 + a sin) with amplitude a = (k-1)/(k+1) hits mean*k.. picking the
  // ratio between peak and valley equal to peak_to_valley.
  const double a = (peak_to_valley - 1.0) / (peak_to_valley + 1.0);
  std::vector<RateSegment> segs(steps);
  for (int i = 0; i < steps; ++i) {
    const double phase = 2.0 * 3.14159265358979323846 * (i + 0.5) / steps;
    segs[i].duration_ms = duration_ms / steps;
    segs[i].rate_per_s = mean_rate_per_s * (1.0 + a * std::sin(phase));
  }
  return segs;
}

std::vector<int> synth_prompt(std::uint64_t seed, int index, int len, int vocab) {
  const int n = std::max(len, 1);
  std::vector<int> prompt(n);
  SplitMixStream stream(substream(substream(seed, 0x70726d70ull), static_cast<std::uint64_t>(index)));
  for (int i = 0; i < n; ++i) prompt[i] = stream.next_int(0, vocab - 2);  // never EOS
  return prompt;
}

}  // namespace specsim
