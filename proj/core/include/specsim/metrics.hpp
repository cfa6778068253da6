#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specsim/overlap.hpp"

namespace specsim {

struct IterationRecord {
  int n = 0;
  double clock_ms = 0.0;  // clock after the iteration
  int batch = 0;
  double r = 1.0;
  bool overlap = false;
  int chunks = 1;
  double s_mean = 0.0;
  double draft_ms = 0.0;
  double verify_ms = 0.0;
  double overhead_ms = 0.0;
  double makespan_ms = 0.0;
  int committed = 0;
  int gate_layers = 0;
  int prune_events = 0;
};

struct EventRecord {
  int iteration = 0;
  TimelineEvent event;
};

struct MetricsSummary {
  std::string mode;
  std::uint64_t seed = 0;
  long long requests = 0;
  long long finished = 0;
  long long total_output_tokens = 0;
  double makespan_ms = 0.0;
  double throughput_tok_s = 0.0;
  double mean_request_latency_ms = 0.0;
  double p50_request_latency_ms = 0.0;
  double p99_request_latency_ms = 0.0;
  double mean_tpot_ms = 0.0;    // per-request latency per output token, averaged
  double global_tpot_ms = 0.0;  // total busy time over total tokens
  double draft_time_ms = 0.0;
  double verify_time_ms = 0.0;
  double overhead_time_ms = 0.0;
  double verify_share = 0.0;  // verify / (draft + verify)
  long long drafted_tokens = 0;
  long long submitted_tokens = 0;
  long long accepted_tokens = 0;
  double acceptance_ratio = 0.0;  // accepted / submitted
  long long wasted_draft_tokens = 0;
  long long false_prunes = 0;
  double layer_work = 0.0;       // verification layers actually consumed
  double layer_work_full = 0.0;  // layers a full pass would have consumed
  long long iterations = 0;
  long long overlap_iterations = 0;
  std::vector<std::pair<int, long long>> early_exit_layer_hist;
  std::vector<std::pair<int, long long>> spec_length_hist;
  std::vector<std::pair<int, long long>> batch_size_hist;
  bool oracle_checked = false;
  bool oracle_ok = true;
};

struct Metrics {
  MetricsSummary summary;
  std::vector<IterationRecord> iterations;
  std::vector<EventRecord> events;
};

/// JSON-lines: one record per iteration (when kept), then one summary object
/// as the final line. Field names are documented in docs/schemas.md.
void write_metrics_jsonl(const Metrics& metrics, const std::string& path);

/// Single-row CSV with the headline summary fields.
void write_summary_csv(const MetricsSummary& summary, const std::string& path);

/// One timeline event per line; written only when event logging is enabled.
void write_events_jsonl(const Metrics& metrics, const std::string& path);

}  // namespace specsim
