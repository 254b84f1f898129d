#include "spar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <string>

namespace spar {

namespace {

void require_unit(const Eigen::VectorXd& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": vector is not unit-norm");
  }
}

// Enumerates integer points (i_1,...,i_d) with sum |i_j| = m, each exactly
// once: nonzero magnitudes are chosen as a composition of m, then every
// sign pattern of the nonzero entries is emitted.
void enumerate_l1_lattice(int d, int m, std::vector<int>& point, int pos, int remaining,
                          std::vector<std::vector<int>>& out) {
  if (pos == d) {
    if (remaining == 0) out.push_back(point);
    return;
  }
  const int dims_left = d - pos - 1;
  for (int mag = -remaining; mag <= remaining; ++mag) {
    if (dims_left == 0 && std::abs(mag) != remaining) continue;
    point[pos] = mag;
    enumerate_l1_lattice(d, m, point, pos + 1, remaining - std::abs(mag), out);
  }
  point[pos] = 0;
}

std::uint64_t binomial_coeff(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  return r;
}

}  // namespace

PolarSample to_polar(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  PolarSample p;
  p.radii.resize(n);
  p.angles.resize(n, x.cols());
  p.source_index.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = x.row(i).norm();
    if (r == 0.0) {
      throw std::invalid_argument("to_polar: zero row at index " + std::to_string(i) +
                                  " has undefined angle");
    }
    p.radii[i] = r;
    p.angles.row(i) = x.row(i) / r;
    p.source_index[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  }
  return p;
}

Eigen::MatrixXd from_polar(const PolarSample& p) {
  return p.angles.array().colwise() * p.radii.array();
}

std::size_t sphere_grid_count(int d, int m) {
  std::size_t total = 0;
  for (int k = 1; k <= std::min(d, m); ++k) {
    total += (std::size_t{1} << k) * binomial_coeff(d, k) * binomial_coeff(m - 1, k - 1);
  }
  return total;
}

SphereGrid sphere_grid(int d, int m) {
  if (d < 2) throw std::invalid_argument("sphere_grid: d must be >= 2");
  if (m < 1) throw std::invalid_argument("sphere_grid: m must be >= 1");
  std::vector<std::vector<int>> lattice;
  std::vector<int> point(static_cast<std::size_t>(d), 0);
  enumerate_l1_lattice(d, m, point, 0, m, lattice);

  SphereGrid grid;
  grid.d = d;
  grid.m = m;
  grid.directions.resize(static_cast<Eigen::Index>(lattice.size()), d);
  Eigen::Index row = 0;
  for (const auto& pt : lattice) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = static_cast<double>(pt[static_cast<std::size_t>(j)]) / m;
    grid.directions.row(row++) = v / v.norm();
  }

  // Distinct lattice points cannot share a direction, but the rows are
  // checked for exact duplicates after normalization so the contract is
  // enforced rather than assumed.
  std::set<std::string> seen;
  for (Eigen::Index i = 0; i < grid.directions.rows(); ++i) {
    std::string key(static_cast<std::size_t>(d) * sizeof(double), '\0');
    std::memcpy(key.data(), grid.directions.row(i).eval().data(), key.size());
    if (!seen.insert(std::move(key)).second) {
      throw std::logic_error("sphere_grid: duplicate direction after normalization");
    }
  }
  return grid;
}

Eigen::MatrixXd householder_to(const Eigen::VectorXd& mu) {
  require_unit(mu, "householder_to");
  const Eigen::Index d = mu.size();
  Eigen::VectorXd u = -mu;
  u[0] += 1.0;  // e1 - mu
  const double norm = u.norm();
  if (norm < 1e-12) return Eigen::MatrixXd::Identity(d, d);
  u /= norm;
  return Eigen::MatrixXd::Identity(d, d) - 2.0 * (u * u.transpose());
}

Eigen::VectorXd householder_apply(const Eigen::VectorXd& mu, const Eigen::VectorXd& y) {
  Eigen::VectorXd u = -mu;
  u[0] += 1.0;
  const double norm = u.norm();
  if (norm < 1e-12) return y;
  u /= norm;
  return y - 2.0 * u.dot(y) * u;
}

Eigen::VectorXd tangent_normal_compose(double t, const Eigen::VectorXd& v, const Eigen::VectorXd& mu) {
  if (std::abs(t) > 1.0) throw std::invalid_argument("tangent_normal_compose: |t| must be <= 1");
  require_unit(mu, "tangent_normal_compose");
  require_unit(v, "tangent_normal_compose");
  if (std::abs(v.dot(mu)) >= 1e-10) {
    throw std::invalid_argument("tangent_normal_compose: v is not orthogonal to mu");
  }
  return t * mu + std::sqrt(1.0 - t * t) * v;
}

double angular_distance(const Eigen::VectorXd& w, const Eigen::VectorXd& u) {
  return std::acos(std::clamp(w.dot(u), -1.0, 1.0));
}

}  // namespace spar
