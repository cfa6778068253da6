#include "specsim/toylm.hpp"

#include <stdexcept>

#include "specsim/rng.hpp"

namespace specsim {

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

LayeredToyLM::LayeredToyLM(Params params) : params_(params) {
  if (params_.vocab < 2) throw std::invalid_argument("vocab must be >= 2");
  if (params_.layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (params_.order < 1) throw std::invalid_argument("order must be >= 1");
  if (params_.divergence < 0.0 || params_.divergence > 1.0)
    throw std::invalid_argument("divergence must lie in [0,1]");
  table_seed_ = substream(params_.seed, /*tag=*/0x7461626cull);        // "tabl"
  noise_stream_seed_ = substream(params_.noise_seed, 0x6e6f6973ull);   // "nois"
  mix_stream_seed_ = substream(params_.seed, 0x6d697875ull);           // "mixu"
}

std::uint64_t LayeredToyLM::context_hash(std::span<const int> prefix) const {
  // The table is keyed on exactly `order` slots; short prefixes are padded in
  // front with the out-of-vocabulary sentinel V so lengths cannot collide.
  std::uint64_t h = mix64(table_seed_);
  const int n = params_.order;
  const int len = static_cast<int>(prefix.size());
  for (int i = n; i >= 1; --i) {
    const int tok = (len >= i) ? prefix[len - i] : params_.vocab;
    h = hash_combine(h, static_cast<std::uint64_t>(tok) + 1);
  }
  return h;
}

void LayeredToyLM::final_and_noise(std::span<const int> prefix, std::vector<double>& z_final,
                                   std::vector<double>& z_noise) const {
  if (prefix.empty()) throw std::invalid_argument("prefix must be non-empty");
  const int v = params_.vocab;
  z_final.resize(v);
  z_noise.resize(v);
  const std::uint64_t ch = context_hash(prefix);
  const std::uint64_t nh = hash_tokens(noise_stream_seed_, prefix);
  for (int t = 0; t < v; ++t) {
    z_final[t] = to_unit(hash_combine(ch, static_cast<std::uint64_t>(t) + 1)) * params_.logit_scale;
    z_noise[t] = to_unit(hash_combine(nh, static_cast<std::uint64_t>(t) + 1)) * params_.noise_scale;
  }
}

std::vector<double> LayeredToyLM::target_logits(std::span<const int> prefix, int layer) const {
  if (prefix.empty()) throw std::invalid_argument("prefix must be non-empty");
  if (layer < 1 || layer > params_.layers)
    throw std::invalid_argument("layer out of range [1, layers]");
  std::vector<double> zf, zn;
  final_and_noise(prefix, zf, zn);
  if (layer == params_.layers) return zf;  // endpoint is exact by contract
  const double w = static_cast<double>(layer) / static_cast<double>(params_.layers);
  std::vector<double> z(params_.vocab);
  for (int t = 0; t < params_.vocab; ++t) z[t] = w * zf[t] + (1.0 - w) * zn[t];
  return z;
}

int LayeredToyLM::target_next(std::span<const int> prefix) const {
  if (prefix.empty()) throw std::invalid_argument("prefix must be non-empty");
  std::vector<double> zf, zn;
  final_and_noise(prefix, zf, zn);
  return argmax_lowest(zf);
}

int LayeredToyLM::draft_next(std::span<const int> prefix) const {
  if (prefix.empty()) throw std::invalid_argument("prefix must be non-empty");
  // Component draw: u < divergence picks the uniform component, whose greedy
  // token is 0 under the lowest-id tie rule; otherwise the target component.
  // Slips are nested across divergence values for a fixed prefix, so the
  // draft/target agreement rate is exactly non-increasing in the divergence.
  const double u = to_unit(hash_tokens(mix_stream_seed_, prefix));
  if (u < params_.divergence) return 0;
  return target_next(prefix);
}

std::vector<int> LayeredToyLM::autoregressive_decode(std::span<const int> prompt,
                                                     int max_out) const {
  if (max_out < 0) throw std::invalid_argument("max_out must be >= 0");
  if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");
  std::vector<int> seq(prompt.begin(), prompt.end());
  std::vector<int> out;
  out.reserve(max_out);
  while (static_cast<int>(out.size()) < max_out) {
    const int tok = target_next(seq);
    out.push_back(tok);
    seq.push_back(tok);
    if (tok == eos_token()) break;
  }
  return out;
}

}  // namespace specsim
