#include "spar/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "spar/radial.hpp"
#include "spar/rng.hpp"

namespace spar {

Eigen::MatrixXd uniform_sphere(std::size_t count, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < d; ++j) out(i, j) = rng.normal();
    out.row(i) /= out.row(i).norm();
  }
  return out;
}

Eigen::MatrixXd synthetic_sample(const SyntheticOptions& options) {
  if (!(options.zeta > 0.0 && options.zeta <= 1.0)) {
    throw std::invalid_argument("synthetic_sample: zeta must be in (0,1]");
  }
  if (!(options.sigma > 0.0)) throw std::invalid_argument("synthetic_sample: sigma must be > 0");
  Rng rng(options.seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(options.n), options.d);
  Eigen::VectorXd w(options.d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (options.angle_model != nullptr) {
      w = sample_kde_one(*options.angle_model, rng);
    } else {
      for (int j = 0; j < options.d; ++j) w[j] = rng.normal();
      w /= w.norm();
    }
    const double u = options.threshold + options.threshold_amplitude * w[0];
    const double sigma = options.sigma + options.sigma_amplitude * w[0];
    if (!(u > 0.0) || !(sigma > 0.0)) {
      throw std::invalid_argument("synthetic_sample: threshold/scale must stay positive");
    }
    double r;
    if (rng.uniform() < options.zeta) {
      r = u + gp_inverse_survival(rng.uniform_pos(), sigma, options.xi);
    } else {
      r = u * rng.uniform_pos();
    }
    out.row(i) = r * w.transpose();
  }
  return out;
}

}  // namespace spar
