#include "spar/angular.hpp"

#include "spar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spar {

namespace {

constexpr double kLog4Pi = 2.5310242469692907929778915942694118;

double ps_log_norm_const(double kappa, double eta) {
  return -eta * kLog4Pi + std::lgamma(2.0 * eta + kappa) - std::lgamma(eta + kappa);
}

}  // namespace

KdeModel::KdeModel(Eigen::MatrixXd centres, double bandwidth)
    : angles(std::move(centres)), kappa(bandwidth) {
  if (angles.rows() < 1) throw std::invalid_argument("KdeModel: need at least one centre");
  if (kappa < 0.0) throw std::invalid_argument("KdeModel: kappa must be >= 0");
  d = static_cast<int>(angles.cols());
  eta = (d - 1) / 2.0;
  for (Eigen::Index i = 0; i < angles.rows(); ++i) {
    if (std::abs(angles.row(i).norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("KdeModel: centre rows must be unit vectors");
    }
  }
}

double ps_log_density_from_dot(double t, double kappa, int d) {
  if (kappa < 0.0) throw std::invalid_argument("ps_log_density: kappa must be >= 0");
  const double eta = (d - 1) / 2.0;
  const double c = ps_log_norm_const(kappa, eta);
  if (kappa == 0.0) return c;
  const double z = 0.5 * (1.0 + std::clamp(t, -1.0, 1.0));
  if (z <= 0.0) return -std::numeric_limits<double>::infinity();
  return c + kappa * std::log(z);
}

double ps_log_density(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, double kappa, int d) {
  return ps_log_density_from_dot(w.dot(mu), kappa, d);
}

double kde_log_density(const Eigen::VectorXd& w, const KdeModel& model,
                       std::span<const std::size_t> exclude) {
  const Eigen::Index n = model.size();
  Eigen::ArrayXd logz = ((model.angles * w).array() + 1.0) * 0.5;
  logz = logz.max(0.0).log();  // log z, -inf at the antipode

  Eigen::Index kept = n;
  Eigen::ArrayXd lk = model.kappa == 0.0 ? Eigen::ArrayXd::Zero(n) : (model.kappa * logz).eval();
  for (std::size_t idx : exclude) {
    if (idx < static_cast<std::size_t>(n)) {
      lk[static_cast<Eigen::Index>(idx)] = -std::numeric_limits<double>::infinity();
      --kept;
    }
  }
  if (kept <= 0) throw std::invalid_argument("kde_log_density: all centres excluded");

  const double m = lk.maxCoeff();
  if (!std::isfinite(m)) return -std::numeric_limits<double>::infinity();
  const double s = (lk - m).exp().sum();
  return ps_log_norm_const(model.kappa, model.eta) + m + std::log(s) -
         std::log(static_cast<double>(kept));
}

std::vector<double> default_kappa_grid(std::size_t count, double lo, double hi) {
  std::vector<double> grid(count);
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = std::pow(10.0, llo + f * (lhi - llo));
  }
  return grid;
}

BandwidthResult optimize_bandwidth(const Eigen::MatrixXd& angles,
                                   std::span<const double> kappa_grid,
                                   std::size_t m_pred, std::size_t k_exclude,
                                   std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(angles.rows());
  if (kappa_grid.empty()) throw std::invalid_argument("optimize_bandwidth: empty kappa grid");
  if (m_pred == 0) throw std::invalid_argument("optimize_bandwidth: m_pred must be >= 1");
  if (m_pred > n) throw std::invalid_argument("optimize_bandwidth: m_pred exceeds sample size");
  if (n <= 2 * k_exclude + 1) {
    throw std::invalid_argument("optimize_bandwidth: sample too small for the exclusion window");
  }
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] > 0.0) || (i > 0 && kappa_grid[i] <= kappa_grid[i - 1])) {
      throw std::invalid_argument("optimize_bandwidth: kappa grid must be ascending and positive");
    }
  }

  // Evaluation points: one draw, shared by every kappa.
  Rng rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m_pred; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(n - i)]);
  }
  pool.resize(m_pred);

  const std::size_t k_count = kappa_grid.size();
  std::vector<double> nll(k_count, 0.0);
  const double eta = (static_cast<double>(angles.cols()) - 1.0) / 2.0;
  Eigen::ArrayXd logz(static_cast<Eigen::Index>(n));
  for (std::size_t ei = 0; ei < m_pred; ++ei) {
    const std::size_t i = pool[ei];
    logz = (((angles * angles.row(static_cast<Eigen::Index>(i)).transpose()).array() + 1.0) * 0.5)
               .max(0.0)
               .log();
    const std::size_t lo = i >= k_exclude ? i - k_exclude : 0;
    const std::size_t hi = std::min(n - 1, i + k_exclude);
    for (std::size_t j = lo; j <= hi; ++j) {
      logz[static_cast<Eigen::Index>(j)] = -std::numeric_limits<double>::infinity();
    }
    const std::size_t kept = n - (hi - lo + 1);
    const double max_logz = logz.maxCoeff();
    for (std::size_t ki = 0; ki < k_count; ++ki) {
      const double kappa = kappa_grid[ki];
      // max over kept centres of kappa*logz is kappa*max_logz since kappa > 0
      const double s = ((logz - max_logz) * kappa).exp().sum();
      const double log_mean = kappa * max_logz + std::log(s) - std::log(static_cast<double>(kept));
      nll[ki] -= ps_log_norm_const(kappa, eta) + log_mean;
    }
  }

  std::size_t best = 0;
  for (std::size_t ki = 1; ki < k_count; ++ki) {
    if (nll[ki] < nll[best]) best = ki;
  }
  BandwidthResult result;
  result.kappa_star = kappa_grid[best];
  result.kappa_grid.assign(kappa_grid.begin(), kappa_grid.end());
  result.nll = std::move(nll);
  return result;
}

Eigen::VectorXd sample_ps_one(const Eigen::VectorXd& mu, double kappa, Rng& rng) {
  const int d = static_cast<int>(mu.size());
  const double eta = (d - 1) / 2.0;
  const double z = rng.beta(kappa + eta, eta);
  const double t = 2.0 * z - 1.0;
  Eigen::VectorXd v(d - 1);
  for (int j = 0; j < d - 1; ++j) v[j] = rng.normal();
  v /= v.norm();
  Eigen::VectorXd y(d);
  y[0] = t;
  y.tail(d - 1) = std::sqrt(std::max(0.0, 1.0 - t * t)) * v;
  return householder_apply(mu, y);
}

Eigen::MatrixXd sample_ps(const Eigen::VectorXd& mu, double kappa, std::size_t count,
                          std::uint64_t seed) {
  if (kappa < 0.0) throw std::invalid_argument("sample_ps: kappa must be >= 0");
  if (std::abs(mu.norm() - 1.0) > 1e-9) throw std::invalid_argument("sample_ps: mu must be unit");
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), mu.size());
  for (std::size_t i = 0; i < count; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = sample_ps_one(mu, kappa, rng);
  }
  return out;
}

Eigen::VectorXd sample_kde_one(const KdeModel& model, Rng& rng) {
  const std::size_t c = rng.uniform_index(static_cast<std::size_t>(model.size()));
  return sample_ps_one(model.angles.row(static_cast<Eigen::Index>(c)), model.kappa, rng);
}

Eigen::MatrixXd sample_kde(const KdeModel& model, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_kde: count must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), model.d);
  for (std::size_t i = 0; i < count; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = sample_kde_one(model, rng);
  }
  return out;
}

}  // namespace spar
