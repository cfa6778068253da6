#include "specsim/overlap.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace specsim {

double predict_pipeline_ms(int s, int chunk, double b, double r, const LatencyModel& models) {
  if (s < 1 || chunk < 1) throw std::invalid_argument("s and chunk must be >= 1");
  double draft_t = 0.0;
  double verify_t = 0.0;
  int remaining = s;
  while (remaining > 0) {
    const int c = std::min(chunk, remaining);
    remaining -= c;
    draft_t += models.draft_ms(b, c, r);
    verify_t = std::max(verify_t, draft_t) + models.target_ms(b, c, r);
  }
  return verify_t;
}

OverlapPlan plan_overlap(int s, int b, const LatencyModel& models,
                         std::span<const double> r_grid) {
  OverlapPlan plan;
  plan.serial_ms = models.serial_iteration_ms(b, s);
  plan.predicted_ms = plan.serial_ms;
  double best = std::numeric_limits<double>::infinity();
  for (int chunk = 1; chunk <= s; ++chunk) {
    for (double r : r_grid) {
      const double pred = predict_pipeline_ms(s, chunk, b, r, models);
      if (pred < plan.serial_ms && pred < best) {
        best = pred;
        plan.enabled = true;
        plan.chunk = chunk;
        plan.r = r;
        plan.predicted_ms = pred;
      }
    }
  }
  return plan;
}

PipelineTimeline schedule_iteration(std::span<const ChunkExec> chunks, double head_start_ms) {
  PipelineTimeline tl;
  double draft_t = -head_start_ms;
  double verify_t = 0.0;
  double reset_at = std::numeric_limits<double>::infinity();
  std::vector<double> draft_end(chunks.size(), -head_start_ms);
  std::vector<bool> drafted(chunks.size(), false);

  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const ChunkExec& ch = chunks[i];
    if (ch.draft_ms > 0.0) {
      // A chunk nobody will verify is cancelled if its draft has not started
      // by the time the reset is observed; in-flight drafts run to waste.
      const bool cancelled = !ch.has_verify && draft_t >= reset_at;
      if (!cancelled) {
        tl.events.push_back({TimelineEvent::Kind::DraftChunk, draft_t, draft_t + ch.draft_ms,
                             static_cast<int>(i)});
        draft_t += ch.draft_ms;
        draft_end[i] = draft_t;
        drafted[i] = true;
        tl.draft_busy_ms += ch.draft_ms;
        if (!ch.has_verify) tl.wasted_draft_ms += ch.draft_ms;
      }
    } else {
      draft_end[i] = draft_t;
      drafted[i] = true;
    }
    if (ch.has_verify) {
      if (!drafted[i]) continue;  // unreachable after a total reset
      const double start = std::max(verify_t, std::max(draft_end[i], 0.0));
      const double total = ch.verify_ms + ch.overhead_ms;
      tl.events.push_back(
          {TimelineEvent::Kind::VerifyChunk, start, start + total, static_cast<int>(i)});
      verify_t = start + total;
      tl.verify_busy_ms += total;
      if (ch.committed > 0)
        tl.events.push_back({TimelineEvent::Kind::Commit, verify_t, verify_t,
                             static_cast<int>(i)});
      if (ch.reset) {
        tl.events.push_back({TimelineEvent::Kind::Reset, verify_t, verify_t,
                             static_cast<int>(i)});
        reset_at = std::min(reset_at, verify_t);
      }
    }
  }
  for (const auto& ev : tl.events) tl.makespan_ms = std::max(tl.makespan_ms, ev.end_ms);
  return tl;
}

}  // namespace specsim
