#include "specsim/latmodel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "specsim/errors.hpp"
#include "specsim/rng.hpp"

namespace specsim {

const char* stage_name(StageKind kind) {
  switch (kind) {
    case StageKind::Draft: return "draft";
    case StageKind::Target: return "target";
    case StageKind::EarlyExitCheck: return "early_exit_check";
    case StageKind::Prune: return "prune";
  }
  return "?";
}

StageKind stage_from_name(const std::string& name) {
  if (name == "draft") return StageKind::Draft;
  if (name == "target") return StageKind::Target;
  if (name == "early_exit_check") return StageKind::EarlyExitCheck;
  if (name == "prune") return StageKind::Prune;
  throw ConfigError("unknown stage name: " + name);
}

double own_share(StageKind stage, double r) {
  switch (stage) {
    case StageKind::Draft:
    case StageKind::Prune:
      return r;
    case StageKind::Target:
    case StageKind::EarlyExitCheck:
      return 1.0 - r;
  }
  return r;
}

double piecewise_factor(const PiecewiseLatencyParams& p, double x) {
  if (!(x > 0.0) || x > 1.0) throw std::invalid_argument("SM share outside (0,1]");
  if (x <= p.knee) return p.a1 - p.gamma1 * x;
  return p.a2 - p.gamma2 * x;
}

double load_term(const PiecewiseLatencyParams& p, double b, double s) {
  switch (p.stage) {
    case StageKind::Draft: return p.c0 * b + p.c1 * s + p.c2;
    case StageKind::Target: return (p.c0 * b + p.c1) * s + p.c2;
    case StageKind::EarlyExitCheck:
    case StageKind::Prune: return p.c0 * b * s + p.c1;
  }
  return 0.0;
}

double eval_latency(const PiecewiseLatencyParams& p, double b, double s, double r) {
  return piecewise_factor(p, own_share(p.stage, r)) * load_term(p, b, s);
}

double eval_draft_latency(const PiecewiseLatencyParams& p, double b, double s, double r) {
  if (p.stage != StageKind::Draft) throw std::invalid_argument("params are not a draft model");
  return eval_latency(p, b, s, r);
}

double eval_target_latency(const PiecewiseLatencyParams& p, double b, double s, double r) {
  if (p.stage != StageKind::Target) throw std::invalid_argument("params are not a target model");
  return eval_latency(p, b, s, r);
}

double eval_overhead_latency(const PiecewiseLatencyParams& p, double b, double s, double r) {
  if (p.stage != StageKind::EarlyExitCheck && p.stage != StageKind::Prune)
    throw std::invalid_argument("params are not an overhead model");
  return eval_latency(p, b, s, r);
}

ProfileGrid ProfileGrid::standard() {
  ProfileGrid g;
  for (double b = 4; b <= 256; b *= 2) g.batch.push_back(b);
  for (double s = 2; s <= 10; s += 2) g.tokens.push_back(s);
  for (int i = 1; i <= 10; ++i) g.shares.push_back(i / 10.0);
  return g;
}

std::vector<ProfileSample> generate_synthetic_profile(const PiecewiseLatencyParams& truth,
                                                      const ProfileGrid& grid, double sigma,
                                                      std::uint64_t seed) {
  SplitMixStream stream(substream(seed, 0x70726f66ull));  // "prof"
  std::vector<ProfileSample> out;
  out.reserve(grid.batch.size() * grid.tokens.size() * grid.shares.size());
  for (double b : grid.batch) {
    for (double s : grid.tokens) {
      for (double r : grid.shares) {
        const double x = own_share(truth.stage, r);
        // Shares where the stage's own allocation would be zero are not
        // physically realizable; profile the complementary endpoint instead.
        const double r_eff = (x > 0.0 && x <= 1.0) ? r : (truth.stage == StageKind::Target ||
                                                          truth.stage == StageKind::EarlyExitCheck
                                                              ? 0.0
                                                              : 1.0);
        const double base = eval_latency(truth, b, s, r_eff);
        const double noise = std::exp(sigma * stream.next_normal());
        out.push_back({b, s, r_eff, base * noise});
      }
    }
  }
  return out;
}

std::pair<std::vector<ProfileSample>, std::vector<ProfileSample>> split_samples(
    std::span<const ProfileSample> samples, double holdout_frac, std::uint64_t seed) {
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMixStream stream(substream(seed, 0x73706c74ull));  // "splt"
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = stream.next_u64() % i;
    std::swap(idx[i - 1], idx[j]);
  }
  std::size_t n_hold = static_cast<std::size_t>(std::floor(holdout_frac * samples.size()));
  if (holdout_frac > 0.0 && n_hold == 0 && !samples.empty()) n_hold = 1;
  std::vector<ProfileSample> train, hold;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i < idx.size() - n_hold)
      train.push_back(samples[idx[i]]);
    else
      hold.push_back(samples[idx[i]]);
  }
  return {std::move(train), std::move(hold)};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int load_dim(StageKind stage) {
  return (stage == StageKind::EarlyExitCheck || stage == StageKind::Prune) ? 2 : 3;
}

VectorXd load_features(StageKind stage, double b, double s) {
  if (load_dim(stage) == 2) {
    VectorXd f(2);
    f << b * s, 1.0;
    return f;
  }
  VectorXd f(3);
  if (stage == StageKind::Target)
    f << b * s, s, 1.0;
  else
    f << b, s, 1.0;
  return f;
}

std::vector<std::string> load_feature_names(StageKind stage) {
  if (load_dim(stage) == 2) return {"b*s", "const"};
  if (stage == StageKind::Target) return {"b*s", "s", "const"};
  return {"b", "s", "const"};
}

struct KneeFit {
  PiecewiseLatencyParams params;
  double rss = std::numeric_limits<double>::infinity();
};

double residual_sum(StageKind stage, const PiecewiseLatencyParams& p,
                    std::span<const ProfileSample> samples) {
  double rss = 0.0;
  for (const auto& smp : samples) {
    const double pred = eval_latency(p, smp.b, smp.s, smp.r);
    const double d = pred - smp.latency_ms;
    rss += d * d;
  }
  return rss;
}

// Alternating least squares at a fixed knee. `w` carries the load
// coefficients in/out; factor coefficients are refit with the continuity
// constraint a1 - gamma1*R = a2 - gamma2*R eliminated analytically.
KneeFit refine_at_knee(StageKind stage, std::span<const ProfileSample> samples, double knee,
                       VectorXd w, double a1, double g1, double a2, double g2) {
  const int n = static_cast<int>(samples.size());
  const int k = load_dim(stage);
  MatrixXd phi(n, k);
  VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    phi.row(i) = load_features(stage, samples[i].b, samples[i].s).transpose();
    x(i) = own_share(stage, samples[i].r);
    y(i) = samples[i].latency_ms;
  }

  double prev_rss = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    // Factor step: unknowns (a1, g1, g2); a2 = a1 + (g2 - g1) * knee.
    VectorXd load_vals = phi * w;
    MatrixXd fa(n, 3);
    for (int i = 0; i < n; ++i) {
      const double l = load_vals(i);
      if (x(i) <= knee) {
        fa(i, 0) = l;
        fa(i, 1) = -x(i) * l;
        fa(i, 2) = 0.0;
      } else {
        fa(i, 0) = l;
        fa(i, 1) = -knee * l;
        fa(i, 2) = (knee - x(i)) * l;
      }
    }
    VectorXd fc = fa.colPivHouseholderQr().solve(y);
    a1 = fc(0);
    g1 = fc(1);
    g2 = fc(2);
    a2 = a1 - g1 * knee + g2 * knee;

    // Load step: rows scaled by the factor value.
    MatrixXd la(n, k);
    for (int i = 0; i < n; ++i) {
      const double f = (x(i) <= knee) ? (a1 - g1 * x(i)) : (a2 - g2 * x(i));
      la.row(i) = f * phi.row(i);
    }
    w = la.colPivHouseholderQr().solve(y);

    double rss = 0.0;
    VectorXd lv = phi * w;
    for (int i = 0; i < n; ++i) {
      const double f = (x(i) <= knee) ? (a1 - g1 * x(i)) : (a2 - g2 * x(i));
      const double d = f * lv(i) - y(i);
      rss += d * d;
    }
    if (std::abs(prev_rss - rss) <= 1e-13 * std::max(1.0, rss)) {
      prev_rss = rss;
      break;
    }
    prev_rss = rss;
  }

  KneeFit fit;
  fit.params.stage = stage;
  fit.params.knee = knee;
  fit.params.a1 = a1;
  fit.params.gamma1 = g1;
  fit.params.a2 = a2;
  fit.params.gamma2 = g2;
  fit.params.c0 = w(0);
  fit.params.c1 = w(1);
  fit.params.c2 = (k == 3) ? w(2) : 0.0;
  fit.rss = prev_rss;
  return fit;
}

// Rank-1 initialization: unconstrained expanded least squares per segment,
// then an SVD split of the stacked coefficient matrix into factor and load
// directions. Falls back to a flat factor when a segment is degenerate.
KneeFit fit_at_knee(StageKind stage, std::span<const ProfileSample> samples, double knee) {
  const int k = load_dim(stage);
  MatrixXd coeff(4, k);
  bool have_init = true;
  for (int seg = 0; seg < 2; ++seg) {
    std::vector<int> rows;
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
      const double x = own_share(stage, samples[i].r);
      if ((seg == 0) == (x <= knee)) rows.push_back(i);
    }
    MatrixXd a(rows.size(), 2 * k);
    VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& smp = samples[rows[i]];
      VectorXd f = load_features(stage, smp.b, smp.s);
      const double x = own_share(stage, smp.r);
      a.block(i, 0, 1, k) = f.transpose();
      a.block(i, k, 1, k) = -x * f.transpose();
      y(i) = smp.latency_ms;
    }
    auto qr = a.colPivHouseholderQr();
    if (qr.rank() < 2 * k) {
      have_init = false;
      break;
    }
    VectorXd theta = qr.solve(y);
    coeff.row(2 * seg) = theta.head(k).transpose();       // a_seg * w
    coeff.row(2 * seg + 1) = theta.tail(k).transpose();   // gamma_seg * w
  }

  VectorXd w = VectorXd::Zero(k);
  double a1 = 1.0, g1 = 0.0, a2 = 1.0, g2 = 0.0;
  if (have_init) {
    Eigen::JacobiSVD<MatrixXd> svd(coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd u = svd.matrixU().col(0) * svd.singularValues()(0);
    w = svd.matrixV().col(0);
    if (u(0) < 0) {
      u = -u;
      w = -w;
    }
    a1 = u(0);
    g1 = u(1);
    a2 = u(2);
    g2 = u(3);
  } else {
    // Plain linear fit as a last-resort starting point.
    MatrixXd phi(samples.size(), k);
    VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      phi.row(i) = load_features(stage, samples[i].b, samples[i].s).transpose();
      y(i) = samples[i].latency_ms;
    }
    w = phi.colPivHouseholderQr().solve(y);
  }
  return refine_at_knee(stage, samples, knee, w, a1, g1, a2, g2);
}

}  // namespace

PiecewiseLatencyParams fit_stage(StageKind stage, std::span<const ProfileSample> samples) {
  if (samples.size() < 8)
    throw FitError(std::string(stage_name(stage)) + ": insufficient samples (need >= 8, have " +
                   std::to_string(samples.size()) + ")");
  for (const auto& smp : samples) {
    if (smp.b < 1 || smp.s < 1 || !(smp.latency_ms > 0))
      throw FitError(std::string(stage_name(stage)) + ": invalid profile sample");
  }

  // The load design must have full column rank regardless of the knee.
  {
    const int k = load_dim(stage);
    MatrixXd phi(samples.size(), k);
    for (std::size_t i = 0; i < samples.size(); ++i)
      phi.row(i) = load_features(stage, samples[i].b, samples[i].s).transpose();
    auto qr = phi.colPivHouseholderQr();
    if (qr.rank() < k) {
      const auto names = load_feature_names(stage);
      std::string collinear;
      const auto& perm = qr.colsPermutation().indices();
      for (int j = qr.rank(); j < k; ++j) {
        if (!collinear.empty()) collinear += ", ";
        collinear += names[perm(j)];
      }
      throw FitError(std::string(stage_name(stage)) +
                     ": rank-deficient load design; collinear columns: " + collinear);
    }
  }

  std::vector<double> xs;
  for (const auto& smp : samples) xs.push_back(own_share(stage, smp.r));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           xs.end());

  std::vector<double> knees;
  for (std::size_t i = 1; i + 2 < xs.size(); ++i) knees.push_back(xs[i]);
  if (knees.empty())
    throw FitError(std::string(stage_name(stage)) +
                   ": need at least 2 distinct SM shares on each side of a knee");

  KneeFit best;
  for (double knee : knees) {
    KneeFit fit = fit_at_knee(stage, samples, knee);
    if (fit.rss < best.rss) best = fit;
  }

  // Normalize the factor/load scale split: factor(knee) = 1.
  PiecewiseLatencyParams p = best.params;
  const double scale = p.a1 - p.gamma1 * p.knee;
  if (!(scale > 0))
    throw FitError(std::string(stage_name(stage)) + ": fitted factor not positive at the knee");
  p.a1 /= scale;
  p.gamma1 /= scale;
  p.a2 /= scale;
  p.gamma2 /= scale;
  p.c0 *= scale;
  p.c1 *= scale;
  p.c2 *= scale;

  for (const auto& smp : samples) {
    if (!(eval_latency(p, smp.b, smp.s, smp.r) > 0))
      throw FitError(std::string(stage_name(stage)) +
                     ": fitted model predicts non-positive latency on the profiled grid");
  }
  (void)residual_sum;
  return p;
}

double mape(const PiecewiseLatencyParams& p, std::span<const ProfileSample> heldout) {
  if (heldout.empty()) throw std::invalid_argument("mape: empty held-out set");
  double acc = 0.0;
  for (const auto& smp : heldout) {
    if (smp.latency_ms == 0.0) throw std::invalid_argument("mape: zero observed latency");
    acc += std::abs(eval_latency(p, smp.b, smp.s, smp.r) - smp.latency_ms) /
           std::abs(smp.latency_ms);
  }
  return acc / static_cast<double>(heldout.size());
}

LatencyModel LatencyModel::default_ground_truth() {
  LatencyModel m;
  m.draft = {StageKind::Draft, 0.5, 1.6, 0.9, 1.275, 0.25, 0.003, 0.28, 0.5};
  m.target = {StageKind::Target, 0.5, 1.5, 0.8, 1.2, 0.2, 0.008, 0.18, 0.3};
  m.ee_check = {StageKind::EarlyExitCheck, 0.5, 1.6, 1.0, 1.3, 0.4, 2e-6, 0.002, 0.0};
  m.prune = {StageKind::Prune, 0.6, 1.5, 1.0, 1.2, 0.5, 2e-6, 0.003, 0.0};
  return m;
}

}  // namespace specsim
