#include "specsim/sdcore.hpp"

#include <algorithm>
#include <stdexcept>

namespace specsim {

void AcceptanceWindow::push(Entry entry, int window) {
  entries_.push_back(entry);
  while (static_cast<int>(entries_.size()) > window) entries_.pop_front();
}

double AcceptanceWindow::rate_for(int spec_length) const {
  double acc = 0.0;
  int n = 0;
  for (const auto& e : entries_) {
    if (e.spec_length == spec_length && e.submitted > 0) {
      acc += static_cast<double>(e.accepted) / e.submitted;
      ++n;
    }
  }
  return n ? acc / n : -1.0;
}

double AcceptanceWindow::overall() const {
  double acc = 0.0;
  int n = 0;
  for (const auto& e : entries_) {
    if (e.submitted > 0) {
      acc += static_cast<double>(e.accepted) / e.submitted;
      ++n;
    }
  }
  return n ? acc / n : -1.0;
}

std::vector<int> SpeculativeEngine::context_of(const Request& req) const {
  std::vector<int> ctx;
  ctx.reserve(req.prompt.size() + req.committed.size());
  ctx.insert(ctx.end(), req.prompt.begin(), req.prompt.end());
  ctx.insert(ctx.end(), req.committed.begin(), req.committed.end());
  return ctx;
}

std::vector<int> SpeculativeEngine::draft_tokens(const Request& req, int s) const {
  if (req.done) throw std::logic_error("draft_tokens on a finished request");
  if (s < 1) throw std::invalid_argument("speculative length must be >= 1");
  std::vector<int> ctx = context_of(req);
  std::vector<int> out;
  const int budget = std::min(s, req.remaining());
  out.reserve(budget);
  for (int i = 0; i < budget; ++i) {
    const int tok = model_->draft_next(ctx);
    out.push_back(tok);
    ctx.push_back(tok);
    if (tok == model_->eos_token()) break;
  }
  return out;
}

VerifyOutcome SpeculativeEngine::full_verify(const Request& req,
                                             std::span<const int> drafted) const {
  if (drafted.empty()) throw std::invalid_argument("full_verify on empty draft");
  VerifyOutcome out;
  out.base_len = req.prompt.size() + req.committed.size();
  out.submitted = static_cast<int>(drafted.size());
  out.full_layers_run = static_cast<double>(model_->num_layers()) * out.submitted;

  std::vector<int> ctx = context_of(req);
  for (int tok : drafted) {
    const int truth = model_->target_next(ctx);
    if (tok == truth) {
      ++out.accepted_count;
      ctx.push_back(tok);
    } else {
      out.recovery_token = truth;
      break;
    }
  }
  return out;
}

VerifyOutcome SpeculativeEngine::verify_with_early_exit(const Request& req,
                                                        std::span<const int> drafted,
                                                        const ExitPolicy& policy,
                                                        const GatePlan& gate) const {
  if (drafted.empty()) throw std::invalid_argument("verify_with_early_exit on empty draft");
  const int layers = model_->num_layers();
  const int count = static_cast<int>(drafted.size());

  VerifyOutcome out;
  out.base_len = req.prompt.size() + req.committed.size();
  out.submitted = count;

  // Per-position final/noise logits, computed on first use; position j is
  // conditioned on the committed prefix plus drafted[0..j).
  std::vector<std::vector<double>> zf(count), zn(count);
  std::vector<int> ctx = context_of(req);
  const std::size_t ctx_base = ctx.size();
  auto ensure_logits = [&](int j) {
    if (!zf[j].empty()) return;
    ctx.resize(ctx_base);
    for (int i = 0; i < j; ++i) ctx.push_back(drafted[i]);
    model_->final_and_noise(ctx, zf[j], zn[j]);
  };

  int active = count;  // tokens [0, active) are still being verified
  std::vector<int> prune_layer(count, layers);
  std::vector<double> z(model_->vocab_size());

  if (gate.active()) {
    const int last = std::min(gate.stop_layer, layers);  // pruning at depth L saves nothing
    for (int layer = std::max(gate.first_layer, 1); layer < last && active > 0; ++layer) {
      ++out.gate_layers;
      const int k = policy.k_at(layer, layers);
      const double w = static_cast<double>(layer) / layers;
      for (int j = 0; j < active; ++j) {
        const int abs_pos = static_cast<int>(req.committed.size()) + j;
        if (abs_pos == req.exempt_position) continue;  // one-round re-entry exemption
        ensure_logits(j);
        for (int v = 0; v < model_->vocab_size(); ++v)
          z[v] = w * zf[j][v] + (1.0 - w) * zn[j][v];
        if (token_exit_test(z, drafted[j], k)) {
          for (int jj = j; jj < active; ++jj) prune_layer[jj] = layer;
          active = j;
          out.pruned_at = {j, layer};
          out.prune_layers.push_back(layer);
          break;
        }
      }
    }
  }

  // Exact verification of the survivors.
  ctx.resize(ctx_base);
  bool mismatch = false;
  for (int j = 0; j < active; ++j) {
    ensure_logits(j);
    const int truth = argmax_lowest(zf[j]);
    if (drafted[j] == truth) {
      ++out.accepted_count;
      ctx.push_back(drafted[j]);
    } else {
      out.recovery_token = truth;
      mismatch = true;
      break;
    }
  }

  if (active == 0) {
    // Progress guarantee: the gate pruned everything before any position was
    // fully verified, so token 0 is force-verified at full depth.
    ensure_logits(0);
    const int truth = argmax_lowest(zf[0]);
    if (drafted[0] == truth) {
      out.accepted_count = 1;
    } else {
      out.recovery_token = truth;
      mismatch = true;
    }
    if (count > 1)
      out.pruned_at = {1, prune_layer[1]};
    else
      out.pruned_at.reset();
    active = 1;
  }

  for (int j = 0; j < count; ++j)
    out.full_layers_run += (j < active) ? layers : prune_layer[j];

  // A prune with a clean accepted prefix discarded a token the target may
  // have accepted; check it for the false-prune metric (bookkeeping only).
  if (out.pruned_at && !mismatch && out.accepted_count == out.pruned_at->first) {
    ctx.resize(ctx_base);
    for (int j = 0; j < out.accepted_count; ++j) ctx.push_back(drafted[j]);
    const int cut = out.pruned_at->first;
    if (cut < count) out.false_prune = (drafted[cut] == model_->target_next(ctx));
  }
  return out;
}

int SpeculativeEngine::commit(Request& req, const VerifyOutcome& outcome,
                              std::span<const int> drafted) const {
  if (outcome.base_len != req.prompt.size() + req.committed.size())
    throw std::logic_error("stale verify outcome: prefix changed since verification");
  if (req.done) throw std::logic_error("commit on a finished request");

  int committed = 0;
  auto push = [&](int tok) {
    req.committed.push_back(tok);
    ++committed;
    if (tok == model_->eos_token() || req.remaining() == 0) req.done = true;
  };
  for (int j = 0; j < outcome.accepted_count && !req.done; ++j) push(drafted[j]);
  if (outcome.recovery_token && !req.done) push(*outcome.recovery_token);
  return committed;
}

}  // namespace specsim
