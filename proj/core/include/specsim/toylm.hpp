#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace specsim {

/// Index of the largest element, ties broken toward the lowest index.
int argmax_lowest(std::span<const double> values);

struct Vocab {
  int size = 64;
};

/// Deterministic layered table model standing in for a draft/target pair.
///
/// The target's final logits for a prefix are a pure function of the last
/// `order` tokens (a seeded table, evaluated lazily by hashing). Layer `l`
/// exposes interpolated logits
///
///     z_l = (l/L) * z_final + (1 - l/L) * z_noise,
///
/// where z_noise is a per-prefix frozen pseudorandom vector drawn from
/// `noise_seed` with entries in [0, noise_scale). Shallow layers are therefore
/// noise-dominated and become faithful to the final logits as l -> L; layer L
/// returns z_final bit-exactly.
///
/// The draft model decodes greedily from a mixture of the target's next-token
/// distribution (weight 1-divergence) and the uniform distribution (weight
/// divergence). The mixture component is chosen by a seeded per-prefix draw:
/// the target component yields the target argmax, the uniform component
/// yields its own argmax, which is token 0 under the lowest-id tie rule. At
/// divergence 0 the draft is identical to the target; at 1 it always emits
/// token 0.
///
/// All outputs are bit-reproducible given (seed, vocab, layers, order,
/// divergence, noise_seed): every draw comes from the SplitMix64 finalizer in
/// rng.hpp, never from implementation-defined library distributions.
class LayeredToyLM {
 public:
  struct Params {
    std::uint64_t seed = 1;
    int vocab = 64;
    int layers = 32;
    int order = 2;
    double divergence = 0.0;  // uniform-mixture weight in [0,1]
    std::uint64_t noise_seed = 2;
    double logit_scale = 4.0;
    double noise_scale = 1.0;
  };

  explicit LayeredToyLM(Params params);

  int vocab_size() const { return params_.vocab; }
  int num_layers() const { return params_.layers; }
  int eos_token() const { return params_.vocab - 1; }
  double divergence() const { return params_.divergence; }
  const Params& params() const { return params_; }

  /// Intermediate logits at layer `layer` in [1, layers].
  std::vector<double> target_logits(std::span<const int> prefix, int layer) const;

  /// Greedy next token of the target model.
  int target_next(std::span<const int> prefix) const;

  /// Greedy next token of the divergence-controlled draft model.
  int draft_next(std::span<const int> prefix) const;

  /// Reference decode: repeatedly applies target_next until `max_out` tokens
  /// are emitted or EOS (the highest token id) is produced. This is the
  /// correctness oracle for every speculative configuration.
  std::vector<int> autoregressive_decode(std::span<const int> prompt, int max_out) const;

  /// Fills the final-logit and noise vectors for a prefix in one pass so
  /// verification loops can interpolate many layers cheaply.
  void final_and_noise(std::span<const int> prefix, std::vector<double>& z_final,
                       std::vector<double>& z_noise) const;

 private:
  std::uint64_t context_hash(std::span<const int> prefix) const;

  Params params_;
  std::uint64_t table_seed_;
  std::uint64_t noise_stream_seed_;
  std::uint64_t mix_stream_seed_;
};

}  // namespace specsim
