#include "specsim/metrics.hpp"

#include <fstream>

#include "json.hpp"
#include "specsim/errors.hpp"

namespace specsim {

namespace {

using nlohmann::json;

json hist_json(const std::vector<std::pair<int, long long>>& hist) {
  json arr = json::array();
  for (const auto& [k, v] : hist) arr.push_back(json::array({k, v}));
  return arr;
}

const char* event_kind_name(TimelineEvent::Kind kind) {
  switch (kind) {
    case TimelineEvent::Kind::DraftChunk: return "draft_chunk";
    case TimelineEvent::Kind::VerifyChunk: return "verify_chunk";
    case TimelineEvent::Kind::Reset: return "reset";
    case TimelineEvent::Kind::Commit: return "commit";
  }
  return "?";
}

json summary_json(const MetricsSummary& s) {
  json j;
  j["record"] = "summary";
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["requests"] = s.requests;
  j["finished"] = s.finished;
  j["total_output_tokens"] = s.total_output_tokens;
  j["makespan_ms"] = s.makespan_ms;
  j["throughput_tok_s"] = s.throughput_tok_s;
  j["mean_request_latency_ms"] = s.mean_request_latency_ms;
  j["p50_request_latency_ms"] = s.p50_request_latency_ms;
  j["p99_request_latency_ms"] = s.p99_request_latency_ms;
  j["mean_tpot_ms"] = s.mean_tpot_ms;
  j["global_tpot_ms"] = s.global_tpot_ms;
  j["draft_time_ms"] = s.draft_time_ms;
  j["verify_time_ms"] = s.verify_time_ms;
  j["overhead_time_ms"] = s.overhead_time_ms;
  j["verify_share"] = s.verify_share;
  j["drafted_tokens"] = s.drafted_tokens;
  j["submitted_tokens"] = s.submitted_tokens;
  j["accepted_tokens"] = s.accepted_tokens;
  j["acceptance_ratio"] = s.acceptance_ratio;
  j["wasted_draft_tokens"] = s.wasted_draft_tokens;
  j["false_prunes"] = s.false_prunes;
  j["layer_work"] = s.layer_work;
  j["layer_work_full"] = s.layer_work_full;
  j["iterations"] = s.iterations;
  j["overlap_iterations"] = s.overlap_iterations;
  j["early_exit_layer_hist"] = hist_json(s.early_exit_layer_hist);
  j["spec_length_hist"] = hist_json(s.spec_length_hist);
  j["batch_size_hist"] = hist_json(s.batch_size_hist);
  j["oracle_checked"] = s.oracle_checked;
  j["oracle_ok"] = s.oracle_ok;
  return j;
}

}  // namespace

void write_metrics_jsonl(const Metrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  for (const auto& it : metrics.iterations) {
    json j;
    j["record"] = "iteration";
    j["n"] = it.n;
    j["clock_ms"] = it.clock_ms;
    j["batch"] = it.batch;
    j["r"] = it.r;
    j["overlap"] = it.overlap;
    j["chunks"] = it.chunks;
    j["s_mean"] = it.s_mean;
    j["draft_ms"] = it.draft_ms;
    j["verify_ms"] = it.verify_ms;
    j["overhead_ms"] = it.overhead_ms;
    j["makespan_ms"] = it.makespan_ms;
    j["committed"] = it.committed;
    j["gate_layers"] = it.gate_layers;
    j["prune_events"] = it.prune_events;
    out << j.dump() << "\n";
  }
  out << summary_json(metrics.summary).dump() << "\n";
}

void write_summary_csv(const MetricsSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << "mode,seed,requests,finished,total_output_tokens,makespan_ms,throughput_tok_s,"
         "mean_request_latency_ms,p50_request_latency_ms,p99_request_latency_ms,mean_tpot_ms,"
         "global_tpot_ms,verify_share,acceptance_ratio,wasted_draft_tokens,false_prunes,"
         "layer_work,layer_work_full,oracle_ok\n";
  json row = json::array(
      {s.mode, s.seed, s.requests, s.finished, s.total_output_tokens, s.makespan_ms,
       s.throughput_tok_s, s.mean_request_latency_ms, s.p50_request_latency_ms,
       s.p99_request_latency_ms, s.mean_tpot_ms, s.global_tpot_ms, s.verify_share,
       s.acceptance_ratio, s.wasted_draft_tokens, s.false_prunes, s.layer_work,
       s.layer_work_full, s.oracle_ok});
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ",";
    const std::string cell = row[i].dump();
    line += (cell.front() == '"') ? cell.substr(1, cell.size() - 2) : cell;
  }
  out << line << "\n";
}

void write_events_jsonl(const Metrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  for (const auto& ev : metrics.events) {
    json j;
    j["iteration"] = ev.iteration;
    j["kind"] = event_kind_name(ev.event.kind);
    j["chunk"] = ev.event.chunk;
    j["start_ms"] = ev.event.start_ms;
    j["end_ms"] = ev.event.end_ms;
    out << j.dump() << "\n";
  }
}

}  // namespace specsim
