#include "specsim/drafter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double DrafterConfig::beta(int round) const {
  const int n = std::max(round, 1);
  return 2.0 * std::log(candidates.size() * static_cast<double>(n) * n * kPi * kPi / 6.0);
}

double objective(double t_hat_ms, int s, double a_hat, double epsilon) {
  if (!(t_hat_ms > 0.0)) throw std::invalid_argument("latency must be positive");
  if (s < 1) throw std::invalid_argument("speculative length must be >= 1");
  return t_hat_ms / (s * a_hat + epsilon);
}

ContextKey ContextKey::of(int batch, double r) {
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  ContextKey key;
  key.batch_log2 = static_cast<int>(std::lround(std::log2(static_cast<double>(batch))));
  const int decile = static_cast<int>(std::lround(r * 10.0));
  key.sm_decile = std::clamp(decile, 1, 10);
  return key;
}

void GpPosterior::observe(int s, double t_obs_ms, double a_obs, int round,
                          const DrafterConfig& cfg) {
  if (!(t_obs_ms > 0.0)) throw std::invalid_argument("observed latency must be positive");
  const auto it = std::find(cfg.candidates.begin(), cfg.candidates.end(), s);
  if (it == cfg.candidates.end())
    throw std::invalid_argument("observed length not in the candidate set");
  const int index = static_cast<int>(it - cfg.candidates.begin());
  window_.push_back({index, objective(t_obs_ms, s, a_obs, cfg.epsilon), round});
  std::erase_if(window_, [&](const Obs& o) { return o.round <= round - cfg.window_ctx; });
  recompute(cfg);
}

void GpPosterior::recompute(const DrafterConfig& cfg) {
  const int m = static_cast<int>(cfg.candidates.size());
  const int n = static_cast<int>(window_.size());
  mu_.assign(m, 0.0);
  sigma_.assign(m, std::sqrt(cfg.kernel_var));
  cached_ = true;
  if (n == 0) return;

  double mean = 0.0;
  for (const auto& o : window_) mean += o.cost;
  mean /= n;

  const double ls2 = 2.0 * cfg.kernel_len * cfg.kernel_len;
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = window_[i].cost - mean;
    for (int j = 0; j < n; ++j) {
      const double d = window_[i].index - window_[j].index;
      gram(i, j) = cfg.kernel_var * std::exp(-d * d / ls2) + (i == j ? cfg.noise_var : 0.0);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::VectorXd alpha = llt.solve(y);
  for (int c = 0; c < m; ++c) {
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) {
      const double d = c - window_[i].index;
      k(i) = cfg.kernel_var * std::exp(-d * d / ls2);
    }
    mu_[c] = mean + k.dot(alpha);
    const double var = cfg.kernel_var - k.dot(llt.solve(k));
    sigma_[c] = std::sqrt(std::max(var, 1e-12));
  }
}

int GpPosterior::select_length(int round, const DrafterConfig& cfg) const {
  const int m = static_cast<int>(cfg.candidates.size());
  const double root_beta = std::sqrt(cfg.beta(round));
  int best = 0;
  double best_lcb = std::numeric_limits<double>::infinity();
  for (int c = 0; c < m; ++c) {
    const double mu = cached_ ? mu_[c] : 0.0;
    const double sd = cached_ ? sigma_[c] : std::sqrt(cfg.kernel_var);
    const double lcb = mu - root_beta * sd;
    if (lcb < best_lcb) {
      best_lcb = lcb;
      best = c;
    }
  }
  return cfg.candidates[best];
}

double GpPosterior::mu(int s, const DrafterConfig& cfg) const {
  const auto it = std::find(cfg.candidates.begin(), cfg.candidates.end(), s);
  if (it == cfg.candidates.end()) throw std::invalid_argument("length not in candidate set");
  if (!cached_) return 0.0;
  return mu_[it - cfg.candidates.begin()];
}

double GpPosterior::sigma(int s, const DrafterConfig& cfg) const {
  const auto it = std::find(cfg.candidates.begin(), cfg.candidates.end(), s);
  if (it == cfg.candidates.end()) throw std::invalid_argument("length not in candidate set");
  if (!cached_) return std::sqrt(cfg.kernel_var);
  return sigma_[it - cfg.candidates.begin()];
}

int GpPosterior::count_at(int s, const DrafterConfig& cfg) const {
  const auto it = std::find(cfg.candidates.begin(), cfg.candidates.end(), s);
  if (it == cfg.candidates.end()) return 0;
  const int index = static_cast<int>(it - cfg.candidates.begin());
  int n = 0;
  for (const auto& o : window_)
    if (o.index == index) ++n;
  return n;
}

void AcceptanceBook::record(ContextKey key, int round, int s, double ratio) {
  auto& win = win_[key];
  win.emplace_back(round, s, ratio);
  while (!win.empty() && std::get<0>(win.front()) <= round - window_) win.pop_front();
}

double AcceptanceBook::context_rate(ContextKey key, int s) const {
  const auto it = win_.find(key);
  if (it == win_.end()) return -1.0;
  double acc = 0.0;
  int n = 0;
  for (const auto& [round, ss, ratio] : it->second) {
    if (ss == s) {
      acc += ratio;
      ++n;
    }
  }
  return n ? acc / n : -1.0;
}

double AcceptanceBook::context_overall(ContextKey key) const {
  const auto it = win_.find(key);
  if (it == win_.end() || it->second.empty()) return -1.0;
  double acc = 0.0;
  for (const auto& [round, ss, ratio] : it->second) acc += ratio;
  return acc / it->second.size();
}

double AcceptanceBook::estimate(const Request& req, ContextKey key, int s) const {
  double v = req.accept_window.rate_for(s);
  if (v >= 0.0) return v;
  v = context_rate(key, s);
  if (v >= 0.0) return v;
  v = context_overall(key);
  if (v >= 0.0) return v;
  v = req.accept_window.overall();
  if (v >= 0.0) return v;
  return cold_;
}

double AdaptiveDrafter::latency_estimate(const CtxState& ctx, int b, double r, int s) const {
  const auto it = ctx.latency.find(s);
  if (it != ctx.latency.end() && it->second.size() >= 3) {
    double acc = 0.0;
    for (const auto& [round, ms] : it->second) acc += ms;
    return acc / it->second.size();
  }
  // Too few direct observations: fall back to the fitted serial estimate.
  (void)r;
  return models_->serial_iteration_ms(b, s);
}

std::vector<int> AdaptiveDrafter::assign_lengths(std::span<const Request* const> batch, int b,
                                                 double r, const AcceptanceBook& book) {
  const ContextKey key = ContextKey::of(b, r);
  CtxState& ctx = ctx_[key];
  const int m = static_cast<int>(cfg_.candidates.size());
  std::vector<int> out(batch.size());

  if (ctx.rounds < m) {
    // Cold start: sweep the candidate set once so every arm has data.
    std::fill(out.begin(), out.end(), cfg_.candidates[ctx.rounds % m]);
    return out;
  }

  const int n = ctx.rounds + 1;
  const double root_beta = std::sqrt(cfg_.beta(n));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Request& req = *batch[i];
    int best = cfg_.candidates[0];
    double best_lcb = std::numeric_limits<double>::infinity();
    for (int s : cfg_.candidates) {
      const double a_hat = book.estimate(req, key, s);
      const double t_hat = latency_estimate(ctx, b, r, s);
      const double cost = objective(t_hat, s, a_hat, cfg_.epsilon);
      const double lcb = cost - root_beta * ctx.gp.sigma(s, cfg_);
      if (lcb < best_lcb) {
        best_lcb = lcb;
        best = s;
      }
    }
    out[i] = best;
  }
  return out;
}

void AdaptiveDrafter::observe_round(int b, double r, double t_obs_ms,
                                    std::span<const std::pair<int, double>> acceptance_by_s) {
  const ContextKey key = ContextKey::of(b, r);
  CtxState& ctx = ctx_[key];
  const int n = ++ctx.rounds;
  for (const auto& [s, ratio] : acceptance_by_s) {
    ctx.gp.observe(s, t_obs_ms, ratio, n, cfg_);
    auto& lane = ctx.latency[s];
    lane.emplace_back(n, t_obs_ms);
    while (!lane.empty() && lane.front().first <= n - cfg_.window_ctx) lane.pop_front();
  }
}

const GpPosterior* AdaptiveDrafter::find_posterior(ContextKey key) const {
  const auto it = ctx_.find(key);
  return it == ctx_.end() ? nullptr : &it->second.gp;
}

int AdaptiveDrafter::rounds_in(ContextKey key) const {
  const auto it = ctx_.find(key);
  return it == ctx_.end() ? 0 : it->second.rounds;
}

}  // namespace specsim
