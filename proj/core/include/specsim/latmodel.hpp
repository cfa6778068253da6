#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace specsim {

enum class StageKind { Draft, Target, EarlyExitCheck, Prune };

const char* stage_name(StageKind kind);
StageKind stage_from_name(const std::string& name);

/// Piecewise-linear latency model for one execution stage.
///
/// Latency factors into a resource term and a load term:
///
///     T(b, s, r) = factor(x) * load(b, s),    x = stage's own SM share
///
/// where the draft and prune stages run on share x = r and the target and
/// early-exit-check stages run on the complementary share x = 1 - r. The
/// factor is piecewise linear in x with a knee at R and is continuous there:
///
///     factor(x) = a1 - gamma1 * x   for 0 < x <= R
///                 a2 - gamma2 * x   for R < x <= 1
///
/// Load terms by stage (coefficients c0, c1, c2):
///     Draft:                 c0*b + c1*s + c2
///     Target:                (c0*b + c1)*s + c2
///     EarlyExitCheck, Prune: c0*b*s + c1
struct PiecewiseLatencyParams {
  StageKind stage = StageKind::Draft;
  double knee = 0.5;
  double a1 = 1.0, gamma1 = 0.0;
  double a2 = 1.0, gamma2 = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

/// The stage's own SM share for a given draft-side share r.
double own_share(StageKind stage, double r);

double piecewise_factor(const PiecewiseLatencyParams& p, double x);
double load_term(const PiecewiseLatencyParams& p, double b, double s);

/// Evaluates the stage latency; r is always the draft-side share. Throws
/// std::invalid_argument when the stage's own share falls outside (0, 1].
double eval_latency(const PiecewiseLatencyParams& p, double b, double s, double r);

double eval_draft_latency(const PiecewiseLatencyParams& p, double b, double s, double r);
double eval_target_latency(const PiecewiseLatencyParams& p, double b, double s, double r);
double eval_overhead_latency(const PiecewiseLatencyParams& p, double b, double s, double r);

struct ProfileSample {
  double b = 1;
  double s = 1;
  double r = 1.0;  // draft-side share
  double latency_ms = 0.0;
};

struct ProfileGrid {
  std::vector<double> batch;
  std::vector<double> tokens;
  std::vector<double> shares;
  /// b in {4,8,...,256} (doubling), s in {2,4,6,8,10}, r in {0.1,...,1.0}.
  static ProfileGrid standard();
};

/// Evaluates `truth` over the grid and applies multiplicative lognormal noise
/// exp(sigma * N(0,1)), seeded. sigma = 0 reproduces the ground truth exactly.
std::vector<ProfileSample> generate_synthetic_profile(const PiecewiseLatencyParams& truth,
                                                      const ProfileGrid& grid, double sigma,
                                                      std::uint64_t seed);

/// Deterministic shuffled split; the second part holds ~holdout_frac of the
/// samples (at least one when the input is non-empty and frac > 0).
std::pair<std::vector<ProfileSample>, std::vector<ProfileSample>> split_samples(
    std::span<const ProfileSample> samples, double holdout_frac, std::uint64_t seed);

/// Fits the stage model: exhaustive knee search over observed shares, then a
/// rank-1 (SVD) initialization refined by alternating least squares with the
/// knee-continuity constraint. The returned parameters are normalized so the
/// factor equals 1 at the knee; the factor/load split has an inherent scale
/// freedom, so predictions are unaffected. Throws FitError on insufficient or
/// rank-deficient data.
PiecewiseLatencyParams fit_stage(StageKind stage, std::span<const ProfileSample> samples);

/// Mean absolute percentage error of predictions on held-out samples.
double mape(const PiecewiseLatencyParams& p, std::span<const ProfileSample> heldout);

/// The four fitted (or ground-truth) stage models used by the controllers.
struct LatencyModel {
  PiecewiseLatencyParams draft;
  PiecewiseLatencyParams target;
  PiecewiseLatencyParams ee_check;
  PiecewiseLatencyParams prune;

  double draft_ms(double b, double s, double r) const { return eval_latency(draft, b, s, r); }
  double target_ms(double b, double s, double r) const { return eval_latency(target, b, s, r); }
  double ee_check_ms(double b, double s, double r) const { return eval_latency(ee_check, b, s, r); }
  double prune_ms(double b, double s, double r) const { return eval_latency(prune, b, s, r); }

  /// Serial execution estimate: each phase runs with the whole GPU.
  double serial_iteration_ms(double b, double s) const {
    return draft_ms(b, s, 1.0) + target_ms(b, s, 0.0);
  }

  /// Defaults calibrated so that the serial verify share grows from roughly
  /// half at b=16 to above three quarters at b=256, drafting stays nearly
  /// flat in b, and co-execution penalties are mild enough that chunked
  /// overlap pays off at small batches only.
  static LatencyModel default_ground_truth();
};

}  // namespace specsim
