#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "spar/angular.hpp"
#include "spar/geometry.hpp"
#include "spar/preprocess.hpp"
#include "spar/radial.hpp"

namespace spar {

/// Density evaluation at a point below the threshold surface, where the
/// model does not describe the distribution.
struct BelowThresholdError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The assembled SPAR fit: angular KDE, threshold and GP networks, the
/// sub-threshold observations kept for body resampling, and the
/// preprocessing needed to map simulated output back to raw units.
/// zeta = 1 is admitted for synthetic all-tail models, in which case the
/// body pool may be empty; fitted models always have zeta in (0,1).
struct SparModel {
  double zeta = 0.1;
  KdeModel kde;
  ThresholdModel threshold;
  GpModel gp;
  Eigen::MatrixXd body_pool;
  PreprocessSpec preprocess;

  int dim() const { return kde.d; }
};

/// Log joint density log f(x) for a point with r = ||x|| above the
/// threshold surface:
///   log zeta + (1 - d) log r + log f_W(x/r) + log f_GP(r - u; xi, sigma).
/// Throws BelowThresholdError when r <= u(w); returns -inf beyond a finite
/// GP endpoint.
double log_joint_density(const SparModel& model, const Eigen::VectorXd& x);

/// Radius of the total-exceedance-probability contour at angle w for
/// beta in (0, zeta]:
///   u(w) + sigma/xi ((beta/zeta)^{-xi} - 1),
/// with the log form u(w) + sigma log(zeta/beta) for |xi| < 1e-6.
double contour_radius(const SparModel& model, const Eigen::VectorXd& w, double beta);

struct ContourCloud {
  Eigen::MatrixXd points;           // p x d rows r_beta(w) w
  Eigen::VectorXd angular_density;  // f_W(w) per row, for masking low-density angles
};

ContourCloud contour_cloud(const SparModel& model, const SphereGrid& grid, double beta);

/// N draws in normalized units: round(zeta N) tail points (KDE angle, GP
/// inversion radius) followed by body points resampled with replacement
/// from the sub-threshold pool. Deterministic for a given seed.
Eigen::MatrixXd simulate(const SparModel& model, std::size_t n, std::uint64_t seed);

struct FitOptions {
  double zeta = 0.1;
  std::vector<double> kappa_grid = default_kappa_grid();
  std::size_t m_pred = 1000;    // clipped to the sample size
  std::size_t k_exclude = 48;   // serial-correlation exclusion half-window
  std::vector<int> hidden_widths = {16, 16, 16};
  TrainConfig train;
  std::uint64_t seed = 1;
};

struct FitReport {
  BandwidthResult bandwidth;
  std::size_t n_exceed = 0;
  double exceed_fraction = 0.0;
  bool threshold_calibration_ok = true;
  bool threshold_degraded = false;
  bool gp_degraded = false;
};

/// Full pipeline on preprocessed data with nonzero rows: polar transform,
/// bandwidth optimization, KDE, threshold regression, exceedance set, GP
/// fit, body pool assembly.
SparModel fit_spar(const Eigen::MatrixXd& data, const FitOptions& options,
                   const PreprocessSpec& preprocess = {}, FitReport* report = nullptr);

/// Versioned model container: text header (structure only) followed by all
/// floating-point payload as little-endian float64 arrays; the layout is
/// documented in the README. Round trips are bit-exact.
void save(const SparModel& model, const std::filesystem::path& path);
SparModel load(const std::filesystem::path& path);

}  // namespace spar
