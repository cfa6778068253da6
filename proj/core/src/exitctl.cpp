#include "specsim/exitctl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specsim {

int ExitPolicy::k_at(int layer, int num_layers) const {
  if (k_init < 1 || k_final < 1 || k_final > k_init)
    throw std::invalid_argument("exit policy thresholds must satisfy k_init >= k_final >= 1");
  if (layer <= l_init || num_layers <= l_init) return k_init;
  if (layer >= num_layers) return k_final;
  const double t = static_cast<double>(layer - l_init) / static_cast<double>(num_layers - l_init);
  const int k = static_cast<int>(std::lround(k_init + (k_final - k_init) * t));
  return std::max(1, k);
}

double estimate_prunable(std::span<const GateEntry> batch) {
  double total = 0.0;
  for (const auto& e : batch) {
    if (e.accept_estimate < 0.0 || e.accept_estimate > 1.0)
      throw std::invalid_argument("acceptance estimate outside [0,1]");
    total += e.spec_length * (1.0 - e.accept_estimate);
  }
  return total;
}

SavingEstimate effective_saving_from(double t_ee_ms, double t_target_ms, int layer,
                                     int num_layers) {
  if (!(t_target_ms > 0.0)) throw std::invalid_argument("target latency must be positive");
  SavingEstimate out;
  out.estimator_layers = num_layers * t_ee_ms / t_target_ms;
  out.remaining_layers = std::max(static_cast<double>(num_layers - layer) - out.estimator_layers, 0.0);
  out.save_ms = out.remaining_layers / num_layers * t_target_ms;
  return out;
}

SavingEstimate effective_saving(int layer, double b, double r, double s_eff,
                                const LatencyModel& models, int num_layers) {
  if (layer < 1 || layer > num_layers) throw std::invalid_argument("layer out of range");
  if (s_eff < 0.0) throw std::invalid_argument("s_eff must be >= 0");
  const double t_ee = models.ee_check_ms(b, s_eff, r);
  const double t_target = models.target_ms(b, s_eff, r);
  return effective_saving_from(t_ee, t_target, layer, num_layers);
}

bool should_prune(int layer, std::span<const GateEntry> batch, double b, double r,
                  const LatencyModel& models, int num_layers) {
  const double s_eff = std::max(estimate_prunable(batch), 1.0);
  const SavingEstimate saving = effective_saving(layer, b, r, s_eff, models, num_layers);
  const double t_prune = models.prune_ms(b, s_eff, r);
  return saving.save_ms > t_prune;
}

bool token_exit_test(std::span<const double> logits, int drafted_token, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (drafted_token < 0 || drafted_token >= static_cast<int>(logits.size()))
    throw std::invalid_argument("drafted token outside vocabulary");
  const double ref = logits[drafted_token];
  int outranking = 0;
  for (int v = 0; v < static_cast<int>(logits.size()); ++v) {
    if (logits[v] > ref || (logits[v] == ref && v < drafted_token)) {
      if (++outranking >= k) return true;  // prune candidate
    }
  }
  return false;
}

GatePlan make_gate_plan(const ExitPolicy& policy, std::span<const GateEntry> batch, double b,
                        double r, const LatencyModel& models, int num_layers) {
  GatePlan plan;
  plan.first_layer = policy.l_init;
  plan.stop_layer = policy.l_init;
  plan.s_eff = std::max(estimate_prunable(batch), 1.0);
  if (policy.l_init > num_layers || policy.l_init < 1 || batch.empty()) return plan;
  // The trigger only weakens with depth, so scan forward until it fails.
  int layer = policy.l_init;
  while (layer < num_layers && should_prune(layer, batch, b, r, models, num_layers)) ++layer;
  plan.stop_layer = layer;
  return plan;
}

}  // namespace specsim
