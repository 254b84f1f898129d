#pragma once

// Shared test oracles: deliberately plain, loop-based implementations that
// stay independent of the library code paths they check.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "spar/nnet.hpp"
#include "spar/rng.hpp"

namespace spar::test {

constexpr double kPi = 3.14159265358979323846;

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

/// CDF of T = w' mu for a power-spherical sample: T = 2Z - 1 with
/// Z ~ Beta(kappa + (d-1)/2, (d-1)/2).
inline double ps_marginal_cdf(double t, double kappa, int d) {
  const double eta = (d - 1) / 2.0;
  const double z = std::clamp(0.5 * (1.0 + t), 0.0, 1.0);
  if (z == 0.0) return 0.0;
  if (z == 1.0) return 1.0;
  return boost::math::ibeta(kappa + eta, eta, z);
}

/// Uniform points on S^{d-1}, independent of spar::uniform_sphere.
inline Eigen::MatrixXd uniform_sphere_oracle(std::size_t n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < d; ++j) {
      out(i, j) = rng.normal();
      norm2 += out(i, j) * out(i, j);
    }
    out.row(i) /= std::sqrt(norm2);
  }
  return out;
}

/// Uniform points on S^2 with the polar coordinate t = w_1 jitter-stratified
/// into n bands (marginally uniform, sharply lower integration variance).
inline Eigen::MatrixXd stratified_sphere3(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
    const double t = 2.0 * u - 1.0;
    const double phi = 2.0 * kPi * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    out(static_cast<Eigen::Index>(i), 0) = t;
    out(static_cast<Eigen::Index>(i), 1) = s * std::cos(phi);
    out(static_cast<Eigen::Index>(i), 2) = s * std::sin(phi);
  }
  return out;
}

/// Central finite difference of a scalar function of MLP parameters.
inline MlpGrads fd_param_gradient(const MlpParams& params,
                                  const std::function<double(const MlpParams&)>& f, double step) {
  MlpGrads g;
  MlpParams p = params;
  for (auto& w : p.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (auto& b : p.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) {
      const double save = p.weights[l].data()[i];
      p.weights[l].data()[i] = save + step;
      const double up = f(p);
      p.weights[l].data()[i] = save - step;
      const double dn = f(p);
      p.weights[l].data()[i] = save;
      g.weights[l].data()[i] = (up - dn) / (2.0 * step);
    }
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) {
      const double save = p.biases[l][i];
      p.biases[l][i] = save + step;
      const double up = f(p);
      p.biases[l][i] = save - step;
      const double dn = f(p);
      p.biases[l][i] = save;
      g.biases[l][i] = (up - dn) / (2.0 * step);
    }
  }
  return g;
}

/// Largest relative disagreement between two gradient sets.
inline double max_rel_error(const MlpGrads& a, const MlpGrads& b, double floor = 1e-6) {
  double worst = 0.0;
  auto compare = [&](double x, double y) {
    worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor}));
  };
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < a.weights[l].size(); ++i) {
      compare(a.weights[l].data()[i], b.weights[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < a.biases[l].size(); ++i) {
      compare(a.biases[l][i], b.biases[l][i]);
    }
  }
  return worst;
}

/// Stationary two-parameter GP maximum likelihood by nested grid search;
/// deliberately brute force.
struct GpMleFit {
  double sigma = 0.0;
  double xi = 0.0;
};

inline GpMleFit stationary_gp_mle(const std::vector<double>& excesses) {
  auto nll = [&](double sigma, double xi) {
    double total = 0.0;
    for (double z : excesses) {
      if (std::abs(xi) < 1e-9) {
        total += std::log(sigma) + z / sigma;
      } else {
        const double t = 1.0 + xi * z / sigma;
        if (t <= 0.0) return std::numeric_limits<double>::infinity();
        total += std::log(sigma) + (1.0 + 1.0 / xi) * std::log(t);
      }
    }
    return total;
  };
  double mean = 0.0;
  for (double z : excesses) mean += z;
  mean /= static_cast<double>(excesses.size());

  double s_lo = mean / 10.0, s_hi = mean * 10.0;
  double x_lo = -0.49, x_hi = 0.5;
  GpMleFit best;
  for (int refine = 0; refine < 6; ++refine) {
    double best_nll = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 40; ++i) {
      const double sigma = s_lo + (s_hi - s_lo) * i / 40.0;
      for (int j = 0; j <= 40; ++j) {
        const double xi = x_lo + (x_hi - x_lo) * j / 40.0;
        const double v = nll(sigma, xi);
        if (v < best_nll) {
          best_nll = v;
          best = {sigma, xi};
        }
      }
    }
    const double ds = (s_hi - s_lo) / 10.0;
    const double dx = (x_hi - x_lo) / 10.0;
    s_lo = std::max(1e-8, best.sigma - ds);
    s_hi = best.sigma + ds;
    x_lo = std::max(-0.99, best.xi - dx);
    x_hi = best.xi + dx;
  }
  return best;
}

/// Nodes/weights of the n-point Gauss-Legendre rule on [a, b].
inline void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    nodes[static_cast<std::size_t>(i)] = xm - xl * x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = xm + xl * x;
    weights[static_cast<std::size_t>(i)] = 2.0 * xl / ((1.0 - x * x) * pp * pp);
    weights[static_cast<std::size_t>(n - 1 - i)] = weights[static_cast<std::size_t>(i)];
  }
}

/// Random orthogonal matrix from the QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

}  // namespace spar::test
