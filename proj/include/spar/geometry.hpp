#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace spar {

/// Angular-radial form of an n x d sample: radii r_i = ||x_i||_2 and unit
/// direction rows w_i = x_i / r_i, with a map back to the source rows.
struct PolarSample {
  Eigen::VectorXd radii;
  Eigen::MatrixXd angles;  // n x d, unit rows
  std::vector<std::size_t> source_index;

  Eigen::Index size() const { return radii.size(); }
  Eigen::Index dim() const { return angles.cols(); }
};

/// Pseudo-regular set of direction vectors: the integer lattice points of
/// the L1 sphere of radius m, projected onto the L2 sphere.
struct SphereGrid {
  Eigen::MatrixXd directions;  // p x d, unit rows
  int m = 0;
  int d = 0;

  Eigen::Index size() const { return directions.rows(); }
};

/// Splits x into (r, w). Rejects zero rows, whose angle is undefined.
PolarSample to_polar(const Eigen::MatrixXd& x);

/// Reassembles x_i = r_i * w_i.
Eigen::MatrixXd from_polar(const PolarSample& p);

/// Direction grid for dimension d >= 2 and resolution m >= 1. The row
/// count is sum_k 2^k C(d,k) C(m-1,k-1) over k = 1..min(d,m).
SphereGrid sphere_grid(int d, int m);

/// Closed-form row count of sphere_grid(d, m).
std::size_t sphere_grid_count(int d, int m);

/// Householder reflection P = I - 2 u u^T with u along (e1 - mu),
/// so that P e1 = mu; returns the identity when mu is within 1e-12 of e1.
/// P is symmetric and orthogonal (an involution).
Eigen::MatrixXd householder_to(const Eigen::VectorXd& mu);

/// Applies the same reflection without forming the matrix.
Eigen::VectorXd householder_apply(const Eigen::VectorXd& mu, const Eigen::VectorXd& y);

/// t * mu + sqrt(1 - t^2) * v for unit mu and unit v orthogonal to mu;
/// the result is a unit vector with dot product t against mu.
Eigen::VectorXd tangent_normal_compose(double t, const Eigen::VectorXd& v, const Eigen::VectorXd& mu);

/// Great-circle distance arccos(w^T u), dot product clamped to [-1, 1].
double angular_distance(const Eigen::VectorXd& w, const Eigen::VectorXd& u);

}  // namespace spar
