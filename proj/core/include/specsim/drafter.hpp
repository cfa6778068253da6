#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "specsim/latmodel.hpp"
#include "specsim/sdcore.hpp"

namespace specsim {

struct DrafterConfig {
  std::vector<int> candidates{1, 2, 3, 4, 5, 6, 8, 10};
  double epsilon = 1e-6;
  int window_ctx = 64;      // rounds retained per serving context
  int window_request = 16;  // rounds retained per request
  double kernel_len = 1.0;  // squared-exponential length scale over candidate indices
  double kernel_var = 1.0;
  double noise_var = 0.1;
  double cold_start_accept = 0.7;

  /// Confidence schedule 2*ln(|S| * n^2 * pi^2 / 6); positive, non-decreasing.
  double beta(int round) const;
};

/// Cost of one verification round per committed token: t / (s*a + epsilon).
double objective(double t_hat_ms, int s, double a_hat, double epsilon);

/// Serving-context bucket: batch size rounded to the nearest power of two in
/// log space, draft SM share rounded to the nearest tenth.
struct ContextKey {
  int batch_log2 = 0;
  int sm_decile = 10;
  auto operator<=>(const ContextKey&) const = default;
  static ContextKey of(int batch, double r);
  int batch_bucket() const { return 1 << batch_log2; }
  double sm_bucket() const { return sm_decile / 10.0; }
};

/// Gaussian-process posterior over the per-length cost within one context.
/// Observations live in a sliding window of recent rounds; the prior mean is
/// the window mean, so shifting every cost by a constant shifts the posterior
/// mean uniformly and leaves selections unchanged.
class GpPosterior {
 public:
  /// Records the realized cost t_obs / (s*a_obs + eps) and refreshes the
  /// cached posterior. Observations older than window_ctx rounds are dropped.
  void observe(int s, double t_obs_ms, double a_obs, int round, const DrafterConfig& cfg);

  /// Lower-confidence-bound argmin over the candidate set, ties toward the
  /// smaller length.
  int select_length(int round, const DrafterConfig& cfg) const;

  double mu(int s, const DrafterConfig& cfg) const;
  double sigma(int s, const DrafterConfig& cfg) const;
  int observation_count() const { return static_cast<int>(window_.size()); }
  int count_at(int s, const DrafterConfig& cfg) const;

 private:
  struct Obs {
    int index;  // candidate index
    double cost;
    int round;
  };
  void recompute(const DrafterConfig& cfg);

  std::vector<Obs> window_;
  std::vector<double> mu_, sigma_;
  bool cached_ = false;
};

/// Context-level acceptance statistics; request-level windows live on the
/// requests themselves. Lookup order for an estimate: the request's own
/// window at s, the context window at s, the context overall mean, then the
/// configured cold-start value.
class AcceptanceBook {
 public:
  AcceptanceBook(int window, double cold_default) : window_(window), cold_(cold_default) {}

  void record(ContextKey key, int round, int s, double ratio);
  double estimate(const Request& req, ContextKey key, int s) const;
  double context_rate(ContextKey key, int s) const;
  double context_overall(ContextKey key) const;

 private:
  int window_;
  double cold_;
  std::map<ContextKey, std::deque<std::tuple<int, int, double>>> win_;  // (round, s, ratio)
};

/// Per-request speculative-length controller. Each serving context keeps a
/// cost posterior and a windowed latency table; the first |S| rounds in a
/// fresh context sweep the candidates round-robin, after which requests pick
/// the LCB argmin of their personalized cost.
class AdaptiveDrafter {
 public:
  AdaptiveDrafter(DrafterConfig cfg, const LatencyModel* models)
      : cfg_(std::move(cfg)), models_(models) {}

  const DrafterConfig& config() const { return cfg_; }

  /// Assigns a speculative length to every request in the batch.
  std::vector<int> assign_lengths(std::span<const Request* const> batch, int b, double r,
                                  const AcceptanceBook& book);

  /// Feeds back one executed round: the batch latency and the mean acceptance
  /// ratio per distinct assigned length.
  void observe_round(int b, double r, double t_obs_ms,
                     std::span<const std::pair<int, double>> acceptance_by_s);

  const GpPosterior* find_posterior(ContextKey key) const;
  int rounds_in(ContextKey key) const;

 private:
  struct CtxState {
    GpPosterior gp;
    int rounds = 0;
    std::map<int, std::deque<std::pair<int, double>>> latency;  // s -> (round, ms)
  };

  double latency_estimate(const CtxState& ctx, int b, double r, int s) const;

  DrafterConfig cfg_;
  const LatencyModel* models_;
  std::map<ContextKey, CtxState> ctx_;
};

}  // namespace specsim
