#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spar/angular.hpp"

namespace spar {

/// Test-corpus generator: angles uniform on the sphere (or drawn from a
/// KDE model), radii with a known conditional structure. With probability
/// 1 - zeta the radius is uniform on (0, u(w)); otherwise it is u(w) plus
/// a GP excess, so u(w) is the exact (1 - zeta) conditional quantile and
/// the excess law is GP(sigma(w), xi). The threshold and scale vary with
/// the first angle coordinate as u(w) = threshold + threshold_amplitude
/// w_1 and sigma(w) = sigma + sigma_amplitude w_1.
struct SyntheticOptions {
  int d = 5;
  std::size_t n = 50000;
  double zeta = 0.1;
  double threshold = 2.3;
  double threshold_amplitude = 0.0;
  double sigma = 2.0;
  double sigma_amplitude = 0.0;
  double xi = -0.1;
  std::uint64_t seed = 1;
  const KdeModel* angle_model = nullptr;  // nullptr: uniform angles
};

Eigen::MatrixXd synthetic_sample(const SyntheticOptions& options);

/// Uniform points on the unit sphere in R^d (normalized standard normals).
Eigen::MatrixXd uniform_sphere(std::size_t count, int d, std::uint64_t seed);

}  // namespace spar
