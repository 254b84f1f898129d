#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spar/nnet.hpp"

namespace spar {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Shape transform: raw output -> xi in (-0.5, 0.1).
inline double xi_transform(double raw) { return -0.5 + 0.6 * logistic(raw); }

/// GP excess with survival probability u: sigma/xi (u^{-xi} - 1), with the
/// exponential-limit form -sigma log(u) for |xi| < 1e-6.
inline double gp_inverse_survival(double u, double sigma, double xi) {
  if (std::abs(xi) < 1e-6) return -sigma * std::log(u);
  return sigma / xi * (std::pow(u, -xi) - 1.0);
}

/// Angle-dependent radial threshold u(w) = exp(raw MLP output), the
/// conditional quantile of R | W = w at exceedance probability zeta.
struct ThresholdModel {
  MlpArchitecture arch;
  MlpParams mlp;
  double zeta = 0.0;
  bool calibration_ok = true;    // exceedance fraction inside the 99% band
  double exceed_fraction = 0.0;  // empirical fraction over the fitted data
  bool degraded = false;         // training exhausted its restarts
};

/// GP excess model with outputs (nu, xi): nu = exp(raw1) is the modified
/// scale nu = sigma (xi + 1), and xi = -0.5 + 0.6 logistic(raw2).
struct GpModel {
  MlpArchitecture arch;
  MlpParams mlp;
  bool degraded = false;
};

struct TiltedLossValue {
  double value = 0.0;
  double du = 0.0;  // d value / d u
};

/// Quantile (pinball) loss rho_{1-zeta}(r - u) with its u-gradient:
/// -(1-zeta) when r > u, zeta when r < u, 0 at the tie.
TiltedLossValue tilted_loss(double r, double u, double zeta);

struct GpNllValue {
  double value = 0.0;
  double dnu = 0.0;
  double dxi = 0.0;
};

/// Negative log GP density of an excess z >= 0 parameterized by
/// (nu, xi) with sigma = nu / (1 + xi). Uses the exponential-limit series
/// for |xi| < 1e-6 and returns +inf beyond a finite upper endpoint.
GpNllValue gp_nll(double z, double nu, double xi);

/// Threshold values at a batch of unit angles (rows).
Eigen::VectorXd threshold_at(const ThresholdModel& model, const Eigen::MatrixXd& angles);
double threshold_at(const ThresholdModel& model, const Eigen::VectorXd& w);

struct GpParamsBatch {
  Eigen::VectorXd nu, xi, sigma;
};

GpParamsBatch gp_params_at(const GpModel& model, const Eigen::MatrixXd& angles);

struct RadialParams {
  double u = 0.0;
  double sigma = 0.0;
  double xi = 0.0;
  double nu = 0.0;
};

/// (u, sigma, xi) and the modified scale at a single angle.
RadialParams predict_radial(const ThresholdModel& threshold, const GpModel& gp,
                            const Eigen::VectorXd& w);

/// Quantile-regression fit of the threshold network. The exceedance
/// fraction over the full sample is checked against the central 99%
/// binomial band around zeta; a miss sets calibration_ok = false.
ThresholdModel fit_threshold(const Eigen::MatrixXd& angles, const Eigen::VectorXd& radii,
                             double zeta, const MlpArchitecture& arch, const TrainConfig& config);

struct ExceedanceSet {
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd excesses;  // r_i - u(w_i) > 0
};

/// Strict exceedances r_i > u(w_i); rejects an empty result.
ExceedanceSet exceedance_set(const Eigen::MatrixXd& angles, const Eigen::VectorXd& radii,
                             const ThresholdModel& threshold);

/// GP-network initialization that guarantees a finite starting loss: the
/// final layer is zeroed, the xi bias gives xi(w) = 0.05 everywhere
/// (non-negative shape, so unbounded support), and the nu bias is
/// log(mean excess) (exponential moment matching).
MlpParams init_gp_nonneg_shape(const MlpArchitecture& arch, double mean_excess,
                               std::uint64_t seed);

/// Maximum-likelihood fit of the GP excess network on the exceedance set.
GpModel fit_gp(const Eigen::MatrixXd& exceed_angles, const Eigen::VectorXd& excesses,
               const MlpArchitecture& arch, const TrainConfig& config);

}  // namespace spar
