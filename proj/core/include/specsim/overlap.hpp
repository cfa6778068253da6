#pragma once

#include <span>
#include <vector>

#include "specsim/latmodel.hpp"

namespace specsim {

/// Chosen draft/verify co-execution plan for one iteration.
struct OverlapPlan {
  bool enabled = false;
  int chunk = 0;     // frontier chunk size s_c (tokens per request per step)
  double r = 1.0;    // draft-side SM share when enabled
  double predicted_ms = 0.0;  // pipeline estimate at (chunk, r)
  double serial_ms = 0.0;     // whole-GPU serial estimate for the same s
};

/// All-accepted pipeline estimate: chunks of `chunk` tokens (last possibly
/// short) are drafted serially on the draft partition while verification of
/// chunk i overlaps drafting of chunk i+1 on the complementary partition.
double predict_pipeline_ms(int s, int chunk, double b, double r, const LatencyModel& models);

/// Grid search over chunk sizes and draft shares. A pair is feasible when its
/// pipeline estimate strictly beats the whole-GPU serial estimate
/// draft(s;b,1) + target(s;b,1); the feasible pair minimizing the estimate is
/// chosen (ties toward the smaller chunk, then the smaller share). When no
/// pair is feasible the plan falls back to serial execution.
OverlapPlan plan_overlap(int s, int b, const LatencyModel& models,
                         std::span<const double> r_grid);

struct TimelineEvent {
  enum class Kind { DraftChunk, VerifyChunk, Reset, Commit };
  Kind kind;
  double start_ms = 0.0;
  double end_ms = 0.0;
  int chunk = 0;
};

/// Execution record for one frontier chunk, produced by the simulator.
struct ChunkExec {
  double draft_ms = 0.0;    // 0 when no tokens were drafted in this chunk
  double verify_ms = 0.0;   // base verification time (0 when no participants)
  double overhead_ms = 0.0; // exit-estimator and pruning overhead
  bool has_verify = false;
  bool reset = false;       // >= 1 request's frontier ended at this chunk
  int committed = 0;
};

struct PipelineTimeline {
  std::vector<TimelineEvent> events;
  double makespan_ms = 0.0;
  double draft_busy_ms = 0.0;
  double verify_busy_ms = 0.0;
  double wasted_draft_ms = 0.0;  // drafted chunks that never reached verification
};

/// Lays out one iteration. Draft chunks run back to back on the draft lane;
/// verify chunk i waits for both draft chunk i and verify chunk i-1. Serial
/// execution is the single-chunk special case. `head_start_ms` lets the first
/// draft chunk begin before t=0 (work pre-drafted during the previous
/// iteration's final verify step). Once a reset has been observed, draft
/// chunks that would start after it are cancelled; chunks already in flight
/// complete and count as waste if never verified.
PipelineTimeline schedule_iteration(std::span<const ChunkExec> chunks, double head_start_ms);

}  // namespace specsim
