#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "specsim/exitctl.hpp"
#include "specsim/toylm.hpp"

namespace specsim {

/// Windowed acceptance bookkeeping: one entry per verification round,
/// retaining the most recent `window` rounds.
class AcceptanceWindow {
 public:
  struct Entry {
    int spec_length = 0;
    int submitted = 0;
    int accepted = 0;
  };

  void push(Entry entry, int window);
  /// Mean accepted/submitted ratio over entries with the given assigned
  /// length; negative when no such entry exists.
  double rate_for(int spec_length) const;
  /// Mean ratio over all retained rounds; negative when empty.
  double overall() const;
  int size() const { return static_cast<int>(entries_.size()); }

 private:
  std::deque<Entry> entries_;
};

/// One serving request. `committed` is always a prefix of the target model's
/// greedy decode of the prompt, ensuring speculative execution is lossless.
struct Request {
  int id = 0;
  double arrival_ms = 0.0;
  std::vector<int> prompt;
  int max_out = 0;
  std::vector<int> committed;
  int spec_length = 4;
  bool done = false;
  AcceptanceWindow accept_window;
  /// Absolute output position exempt from exit tests for one round after a
  /// prune-triggered reset; -1 when unset.
  int exempt_position = -1;

  double finish_ms = 0.0;
  int rounds = 0;

  int remaining() const { return max_out - static_cast<int>(committed.size()); }
};

/// Result of one verification pass over a span of drafted tokens.
struct VerifyOutcome {
  int submitted = 0;
  int accepted_count = 0;
  std::optional<int> recovery_token;
  /// Effective prune boundary: (first discarded drafted index, layer at which
  /// it was pruned). Unset when nothing was discarded by the exit gate.
  std::optional<std::pair<int, int>> pruned_at;
  /// Total verification layers consumed: the full depth for tokens that ran
  /// to completion, the prune layer for tokens exited early.
  double full_layers_run = 0.0;
  /// Layers at which the exit estimator was consulted during this pass.
  int gate_layers = 0;
  /// Distinct layers at which at least one token was pruned.
  std::vector<int> prune_layers;
  /// Set when the gate discarded a token the target would have accepted.
  bool false_prune = false;
  /// Prefix length (prompt + committed) this outcome was produced against.
  std::size_t base_len = 0;
};

/// Drafting, verification, and commit over the toy model pair. All methods
/// are pure with respect to the model; only commit() mutates the request.
class SpeculativeEngine {
 public:
  explicit SpeculativeEngine(const LayeredToyLM* model) : model_(model) {}

  const LayeredToyLM& model() const { return *model_; }

  /// Drafts up to `s` tokens autoregressively from prompt+committed, stopping
  /// at EOS or when the request's output budget is exhausted.
  std::vector<int> draft_tokens(const Request& req, int s) const;

  /// Parallel verification: accepts the longest prefix matching the target's
  /// greedy continuation; on the first mismatch the target's own token is
  /// returned as the recovery token. Every submitted token consumes the full
  /// layer depth.
  VerifyOutcome full_verify(const Request& req, std::span<const int> drafted) const;

  /// Layer-by-layer verification with token-wise early exit. While the gate
  /// plan allows it, each still-active token is rank-tested against the
  /// intermediate logits; the earliest failing token is pruned together with
  /// its entire suffix. Survivors are verified exactly. If the first drafted
  /// token is pruned and no position was fully verified, that token is
  /// force-verified so every round can commit at least one token.
  VerifyOutcome verify_with_early_exit(const Request& req, std::span<const int> drafted,
                                       const ExitPolicy& policy, const GatePlan& gate) const;

  /// Appends the accepted prefix plus the recovery token (when present),
  /// truncating at max_out and marking completion on EOS or budget
  /// exhaustion. Returns the number of tokens committed. Throws when the
  /// outcome was produced against a different prefix.
  int commit(Request& req, const VerifyOutcome& outcome, std::span<const int> drafted) const;

 private:
  std::vector<int> context_of(const Request& req) const;

  const LayeredToyLM* model_;
};

}  // namespace specsim
