#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spar/geometry.hpp"
#include "spar/nnet.hpp"
#include "spar/stats.hpp"

namespace spar {

/// Number of observed angles within angular distance theta_max of each
/// grid direction. Caps may overlap, so counts can sum to more than n.
std::vector<long> cell_counts(const Eigen::MatrixXd& angles, const SphereGrid& grid,
                              double theta_max);

/// Voronoi cell per observation: the grid direction with maximal dot
/// product (minimal angular distance), ties to the lowest index.
std::vector<Eigen::Index> voronoi_assign(const Eigen::MatrixXd& angles, const SphereGrid& grid);

/// Observed-vs-expected table over a Voronoi partition. Cell probabilities
/// come from the simulated sample's Voronoi fractions; the confidence
/// interval is the central binomial interval on the observed count. Cells
/// with neither observations nor simulated mass are dropped.
struct CellTable {
  struct Row {
    Eigen::Index direction = 0;
    long observed = 0;
    double probability = 0.0;
    double expected = 0.0;
    long ci_lo = 0;
    long ci_hi = 0;
  };
  std::vector<Row> rows;
  long n_obs = 0;
  double level = 0.95;
};

CellTable observed_vs_expected(const Eigen::MatrixXd& obs_angles,
                               const Eigen::MatrixXd& sim_angles, const SphereGrid& grid,
                               double level = 0.95);

/// Indices 0, stride, 2 stride, ... below n.
std::vector<std::size_t> downsample(std::size_t n, std::size_t stride);

/// Per-direction QQ data for threshold exceedances in angular cap bins.
/// The bin threshold is the empirical (1-zeta) quantile of the simulated
/// radii in the bin; simulated exceedances are interpolated to the
/// observed Hazen probability levels. The aggregated curve averages both
/// axes over bins at a fixed level grid.
struct QqBin {
  Eigen::Index direction = 0;
  std::vector<double> level;
  std::vector<double> observed;
  std::vector<double> simulated;
};

struct QqResult {
  std::vector<QqBin> bins;
  std::vector<double> agg_level;
  std::vector<double> agg_observed;
  std::vector<double> agg_simulated;
};

QqResult qq_bins(const PolarSample& obs, const PolarSample& sim, const SphereGrid& grid,
                 double theta_max, std::size_t min_count, double zeta);

/// Empirical exceedance / non-exceedance log10 probabilities for matched
/// variables on a shared value grid spanning both samples. Entries whose
/// empirical probability is zero carry -inf and are omitted on output.
struct MarginalTailCurve {
  std::string variable;
  std::vector<double> grid;
  std::vector<double> obs_log10_exceed, obs_log10_nonexceed;
  std::vector<double> sim_log10_exceed, sim_log10_nonexceed;
};

std::vector<MarginalTailCurve> marginal_tail_curves(const Eigen::MatrixXd& obs,
                                                    const Eigen::MatrixXd& sim,
                                                    const std::vector<std::string>& names,
                                                    std::size_t grid_points = 401);

/// Distribution summaries (2.5%, 25%, 50%, 75%, 97.5% quantiles over all
/// observed angles) of the fitted GP shape and of the conditional radial
/// quantile at total exceedance level q_level, for each zeta in the sweep.
struct StabilityRow {
  double zeta = 0.0;
  bool ok = false;  // false marks a failed fit (missing row)
  std::array<double, 5> xi_summary{};
  std::array<double, 5> radial_quantile_summary{};
};

struct StabilityTable {
  double q_level = 1e-6;
  std::vector<StabilityRow> rows;
};

StabilityTable threshold_stability(const Eigen::MatrixXd& data, std::span<const double> zeta_grid,
                                   const std::vector<int>& hidden_widths,
                                   const TrainConfig& config, double q_level, std::uint64_t seed);

/// Default zeta sweep: 0.0125 to 0.25 in steps of 0.0125.
std::vector<double> default_zeta_grid();

/// Moving-block bootstrap index vectors: ceil(n/block_len) blocks of
/// consecutive indices with uniform non-wrapping starts, concatenated and
/// truncated to length n.
std::vector<std::vector<std::size_t>> block_bootstrap(std::size_t n, std::size_t block_len,
                                                      std::size_t n_boot, std::uint64_t seed);

/// Pointwise empirical quantile envelopes at (1 -/+ level)/2 across
/// replicate curves of equal length.
struct Envelope {
  std::vector<double> lower;
  std::vector<double> upper;
};

Envelope bootstrap_ci(const std::vector<std::vector<double>>& curves, double level);

}  // namespace spar
