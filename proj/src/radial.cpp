#include "spar/radial.hpp"

#include <limits>
#include <stdexcept>

#include "spar/rng.hpp"
#include "spar/stats.hpp"

namespace spar {

namespace {

constexpr double kXiBranchSwitch = 1e-6;

ExampleLoss make_threshold_loss(double zeta) {
  return [zeta](const Eigen::VectorXd& raw, const Eigen::VectorXd& target,
                Eigen::VectorXd& grad) {
    const double u = std::exp(raw[0]);
    const TiltedLossValue tl = tilted_loss(target[0], u, zeta);
    grad[0] = tl.du * u;
    return tl.value;
  };
}

ExampleLoss make_gp_loss() {
  return [](const Eigen::VectorXd& raw, const Eigen::VectorXd& target, Eigen::VectorXd& grad) {
    const double nu = std::exp(raw[0]);
    const double s = logistic(raw[1]);
    const double xi = -0.5 + 0.6 * s;
    const GpNllValue g = gp_nll(target[0], nu, xi);
    if (std::isfinite(g.value)) {
      grad[0] = g.dnu * nu;
      grad[1] = g.dxi * 0.6 * s * (1.0 - s);
    } else {
      grad.setZero();
    }
    return g.value;
  };
}

}  // namespace

TiltedLossValue tilted_loss(double r, double u, double zeta) {
  const double alpha = 1.0 - zeta;
  const double t = r - u;
  TiltedLossValue out;
  if (t > 0.0) {
    out.value = t * alpha;
    out.du = -alpha;
  } else if (t < 0.0) {
    out.value = t * (alpha - 1.0);
    out.du = zeta;
  }
  return out;
}

GpNllValue gp_nll(double z, double nu, double xi) {
  if (z < 0.0) throw std::invalid_argument("gp_nll: excess must be >= 0");
  if (!(nu > 0.0)) throw std::invalid_argument("gp_nll: nu must be > 0");
  if (!(1.0 + xi > 0.0)) throw std::invalid_argument("gp_nll: xi must be > -1");

  const double sigma = nu / (1.0 + xi);
  const double a = z / sigma;
  GpNllValue out;
  double dl_dsigma;
  double dl_dxi_at_fixed_sigma;
  if (std::abs(xi) < kXiBranchSwitch) {
    // Exponential-limit branch, expanded to first order in xi so the two
    // branches agree to ~xi^2 at the switch point.
    out.value = std::log(sigma) + a + xi * a * (1.0 - 0.5 * a);
    dl_dsigma = (1.0 - a) / sigma + xi * (a * a - a) / sigma;
    dl_dxi_at_fixed_sigma = a - 0.5 * a * a;
  } else {
    const double t = 1.0 + xi * a;
    if (t <= 0.0) {
      out.value = std::numeric_limits<double>::infinity();
      return out;  // beyond the upper endpoint -sigma/xi
    }
    out.value = std::log(sigma) + (1.0 + 1.0 / xi) * std::log1p(xi * a);
    dl_dsigma = 1.0 / sigma - (1.0 + xi) * z / (sigma * sigma * t);
    dl_dxi_at_fixed_sigma =
        -std::log1p(xi * a) / (xi * xi) + (1.0 + 1.0 / xi) * a / t;
  }
  // sigma = nu / (1 + xi): dsigma/dnu = 1/(1+xi), dsigma/dxi = -sigma/(1+xi)
  out.dnu = dl_dsigma / (1.0 + xi);
  out.dxi = dl_dxi_at_fixed_sigma - dl_dsigma * sigma / (1.0 + xi);
  return out;
}

Eigen::VectorXd threshold_at(const ThresholdModel& model, const Eigen::MatrixXd& angles) {
  return forward_batch(model.mlp, angles).col(0).array().exp().matrix();
}

double threshold_at(const ThresholdModel& model, const Eigen::VectorXd& w) {
  return std::exp(forward(model.mlp, w)[0]);
}

GpParamsBatch gp_params_at(const GpModel& model, const Eigen::MatrixXd& angles) {
  const Eigen::MatrixXd raw = forward_batch(model.mlp, angles);
  GpParamsBatch out;
  out.nu = raw.col(0).array().exp().matrix();
  out.xi = (-0.5 + 0.6 / (1.0 + (-raw.col(1).array()).exp())).matrix();
  out.sigma = (out.nu.array() / (1.0 + out.xi.array())).matrix();
  return out;
}

RadialParams predict_radial(const ThresholdModel& threshold, const GpModel& gp,
                            const Eigen::VectorXd& w) {
  const Eigen::VectorXd raw = forward(gp.mlp, w);
  RadialParams out;
  out.u = threshold_at(threshold, w);
  out.nu = std::exp(raw[0]);
  out.xi = xi_transform(raw[1]);
  out.sigma = out.nu / (1.0 + out.xi);
  return out;
}

ThresholdModel fit_threshold(const Eigen::MatrixXd& angles, const Eigen::VectorXd& radii,
                             double zeta, const MlpArchitecture& arch, const TrainConfig& config) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("fit_threshold: zeta must be in (0,1)");
  const Eigen::Index n = radii.size();
  if (static_cast<double>(n) * zeta < 50.0) {
    throw std::invalid_argument("fit_threshold: too few expected exceedances (need n*zeta >= 50)");
  }
  if (arch.output_dim != 1) throw std::invalid_argument("fit_threshold: output_dim must be 1");

  // Warm start at the stationary quantile: zeroed final layer with bias at
  // the log empirical (1-zeta) quantile of the radii.
  MlpParams init = init_params(arch, Rng::derive_seed(config.seed, 101));
  const double q = empirical_quantile(
      std::vector<double>(radii.data(), radii.data() + n), 1.0 - zeta);
  if (!(q > 0.0)) throw std::invalid_argument("fit_threshold: nonpositive radial quantile");
  init.weights.back().setZero();
  init.biases.back()[0] = std::log(q);

  TrainResult fit = train(angles, radii, make_threshold_loss(zeta), arch, config, std::move(init));

  ThresholdModel model;
  model.arch = arch;
  model.mlp = std::move(fit.params);
  model.zeta = zeta;
  model.degraded = fit.degraded;
  const Eigen::VectorXd u = threshold_at(model, angles);
  const long exceed = (radii.array() > u.array()).count();
  model.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(n);
  const auto [k_lo, k_hi] = binomial_ci(static_cast<long>(n), zeta, 0.99);
  model.calibration_ok = exceed >= k_lo && exceed <= k_hi;
  return model;
}

ExceedanceSet exceedance_set(const Eigen::MatrixXd& angles, const Eigen::VectorXd& radii,
                             const ThresholdModel& threshold) {
  const Eigen::VectorXd u = threshold_at(threshold, angles);
  ExceedanceSet out;
  std::vector<double> excesses;
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    if (radii[i] > u[i]) {
      out.indices.push_back(i);
      excesses.push_back(radii[i] - u[i]);
    }
  }
  if (out.indices.empty()) throw std::runtime_error("exceedance_set: no radius exceeds the threshold");
  out.excesses = Eigen::Map<Eigen::VectorXd>(excesses.data(), static_cast<Eigen::Index>(excesses.size()));
  return out;
}

MlpParams init_gp_nonneg_shape(const MlpArchitecture& arch, double mean_excess,
                               std::uint64_t seed) {
  if (arch.output_dim != 2) throw std::invalid_argument("init_gp_nonneg_shape: output_dim must be 2");
  if (!(mean_excess > 0.0)) throw std::invalid_argument("init_gp_nonneg_shape: mean excess must be > 0");
  MlpParams params = init_params(arch, seed);
  params.weights.back().setZero();
  params.biases.back()[0] = std::log(mean_excess);        // nu = mean excess
  params.biases.back()[1] = std::log(11.0);               // xi = -0.5 + 0.6 * 11/12 = 0.05
  return params;
}

GpModel fit_gp(const Eigen::MatrixXd& exceed_angles, const Eigen::VectorXd& excesses,
               const MlpArchitecture& arch, const TrainConfig& config) {
  if (excesses.size() < 50) throw std::invalid_argument("fit_gp: need at least 50 exceedances");
  if (arch.output_dim != 2) throw std::invalid_argument("fit_gp: output_dim must be 2");
  MlpParams init =
      init_gp_nonneg_shape(arch, excesses.mean(), Rng::derive_seed(config.seed, 202));
  TrainResult fit = train(exceed_angles, excesses, make_gp_loss(), arch, config, std::move(init));
  GpModel model;
  model.arch = arch;
  model.mlp = std::move(fit.params);
  model.degraded = fit.degraded;
  return model;
}

}  // namespace spar
