#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "spar/rng.hpp"

namespace spar {

/// Kernel density estimate of the angular distribution: a power-spherical
/// kernel of bandwidth kappa centred at every stored angle row.
struct KdeModel {
  Eigen::MatrixXd angles;  // n x d kernel centres, unit rows
  double kappa = 0.0;
  int d = 0;
  double eta = 0.0;  // (d - 1) / 2

  KdeModel() = default;
  KdeModel(Eigen::MatrixXd centres, double bandwidth);

  Eigen::Index size() const { return angles.rows(); }
};

/// Log-density of the power-spherical distribution at dot product
/// t = w^T mu:
///   -eta log(4 pi) + kappa log z + lgamma(2 eta + kappa) - lgamma(eta + kappa),
/// z = (1 + t) / 2. Evaluated through lgamma only, so large kappa does not
/// overflow. Returns -inf at z = 0 when kappa > 0.
double ps_log_density_from_dot(double t, double kappa, int d);

/// Log-density of the power-spherical kernel at w for mean direction mu.
double ps_log_density(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, double kappa, int d);

/// Log of the mean kernel density over all non-excluded centres,
/// accumulated with a max-shift log-sum-exp. `exclude` holds centre
/// indices to leave out (may be empty); excluding every centre is an error.
double kde_log_density(const Eigen::VectorXd& w, const KdeModel& model,
                       std::span<const std::size_t> exclude = {});

struct BandwidthResult {
  double kappa_star = 0.0;
  std::vector<double> kappa_grid;
  std::vector<double> nll;
};

/// Cross-validated bandwidth selection. Draws m_pred evaluation indices
/// once (uniformly, without replacement, from `seed`) and reuses them for
/// every kappa so the NLL curve is internally comparable. For evaluation
/// index i the centres i-k_exclude..i+k_exclude are left out, clipped at
/// the sample boundaries, which removes serially correlated neighbours
/// from the predictive likelihood. Ties resolve to the smaller kappa.
BandwidthResult optimize_bandwidth(const Eigen::MatrixXd& angles,
                                   std::span<const double> kappa_grid,
                                   std::size_t m_pred, std::size_t k_exclude,
                                   std::uint64_t seed);

/// Default bandwidth search grid: `count` logarithmically spaced values in
/// [lo, hi] (50 points in [1e1, 1e4] unless overridden).
std::vector<double> default_kappa_grid(std::size_t count = 50, double lo = 1e1, double hi = 1e4);

/// One draw from the power-spherical distribution: T = 2 Z - 1 with
/// Z ~ Beta(kappa + (d-1)/2, (d-1)/2), V uniform on the tangent subsphere
/// from d-1 normalized normals, then the Householder rotation of
/// (T; sqrt(1-T^2) V) onto mu.
Eigen::VectorXd sample_ps_one(const Eigen::VectorXd& mu, double kappa, Rng& rng);

/// `count` independent power-spherical draws.
Eigen::MatrixXd sample_ps(const Eigen::VectorXd& mu, double kappa, std::size_t count,
                          std::uint64_t seed);

/// Samples the KDE mixture: a uniformly chosen centre, then one kernel draw.
Eigen::MatrixXd sample_kde(const KdeModel& model, std::size_t count, std::uint64_t seed);
Eigen::VectorXd sample_kde_one(const KdeModel& model, Rng& rng);

}  // namespace spar
