#pragma once

#include <span>
#include <utility>
#include <vector>

#include "specsim/latmodel.hpp"

namespace specsim {

/// Policy for token-wise early exit during verification. Exit decisions start
/// at layer l_init; the rank threshold K is conservative there and tightens
/// linearly toward the last layer.
struct ExitPolicy {
  int l_init = 8;
  int k_init = 10;
  int k_final = 2;

  /// Non-increasing threshold schedule over [l_init, num_layers], >= 1.
  int k_at(int layer, int num_layers) const;
};

/// Per-request gate inputs: assigned speculative length and the acceptance
/// estimate for it under the current serving context.
struct GateEntry {
  int spec_length = 0;
  double accept_estimate = 1.0;
};

/// Expected number of drafted tokens in rejected suffixes:
/// sum_i s_i * (1 - a_i).
double estimate_prunable(std::span<const GateEntry> batch);

struct SavingEstimate {
  double estimator_layers = 0.0;  // estimator latency converted to layers
  double remaining_layers = 0.0;  // depth still able to benefit from pruning
  double save_ms = 0.0;           // verification time pruning can still save
};

/// Core arithmetic on explicit stage latencies: the estimator's latency is
/// converted to an equivalent consumed depth L * t_ee / t_target, subtracted
/// from the remaining depth (clamped at zero), and scaled back to time.
SavingEstimate effective_saving_from(double t_ee_ms, double t_target_ms, int layer,
                                     int num_layers);

/// Same, with the latencies evaluated from the fitted models at (b, r, s_eff).
SavingEstimate effective_saving(int layer, double b, double r, double s_eff,
                                const LatencyModel& models, int num_layers);

/// Prune trigger: true iff the time pruning can still save strictly exceeds
/// the pruning overhead, both evaluated at the prunable-token estimate.
bool should_prune(int layer, std::span<const GateEntry> batch, double b, double r,
                  const LatencyModel& models, int num_layers);

/// Token-level exit test on intermediate logits: prune candidate iff at least
/// k tokens outrank the drafted token, where ties in logit value are resolved
/// toward the lower token id. Equivalent to falling outside the top-k set.
bool token_exit_test(std::span<const double> logits, int drafted_token, int k);

/// Precomputed gate schedule for one verification pass. The trigger is
/// monotone in depth, so the gated region is a single contiguous layer range.
struct GatePlan {
  int first_layer = 1;  // first gated layer
  int stop_layer = 0;   // first layer past the gated range
  double s_eff = 1.0;   // prunable estimate used for overhead costing
  bool active() const { return first_layer < stop_layer; }
};

GatePlan make_gate_plan(const ExitPolicy& policy, std::span<const GateEntry> batch, double b,
                        double r, const LatencyModel& models, int num_layers);

}  // namespace specsim
