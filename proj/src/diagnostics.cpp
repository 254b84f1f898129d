#include "spar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spar/radial.hpp"
#include "spar/rng.hpp"

namespace spar {

namespace {

constexpr double kXiBranchSwitch = 1e-6;

Eigen::Index block_rows_for(Eigen::Index p) {
  // keep the dot-product block around 8 MB
  const Eigen::Index rows = static_cast<Eigen::Index>((8u << 20) / (sizeof(double) * static_cast<std::size_t>(p)));
  return std::max<Eigen::Index>(rows, 1);
}

std::array<double, 5> summary_quantiles(std::vector<double> values) {
  static constexpr std::array<double, 5> kProbs = {0.025, 0.25, 0.5, 0.75, 0.975};
  std::array<double, 5> out{};
  std::sort(values.begin(), values.end());
  for (std::size_t i = 0; i < kProbs.size(); ++i) {
    const double h = (static_cast<double>(values.size()) - 1.0) * kProbs[i];
    const std::size_t lo = static_cast<std::size_t>(h);
    const double f = h - static_cast<double>(lo);
    out[i] = lo + 1 < values.size() ? values[lo] + f * (values[lo + 1] - values[lo]) : values.back();
  }
  return out;
}

double log10_or_neg_inf(long count, long n) {
  if (count <= 0) return -std::numeric_limits<double>::infinity();
  return std::log10(static_cast<double>(count) / static_cast<double>(n));
}

}  // namespace

std::vector<long> cell_counts(const Eigen::MatrixXd& angles, const SphereGrid& grid,
                              double theta_max) {
  if (!(theta_max > 0.0)) throw std::invalid_argument("cell_counts: theta_max must be > 0");
  const double cos_t = std::cos(theta_max);
  const Eigen::Index n = angles.rows();
  const Eigen::Index p = grid.size();
  std::vector<long> counts(static_cast<std::size_t>(p), 0);
  const Eigen::Index block = block_rows_for(p);
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index rows = std::min(block, n - start);
    const Eigen::MatrixXd dots =
        angles.middleRows(start, rows) * grid.directions.transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
      counts[static_cast<std::size_t>(j)] += (dots.col(j).array() > cos_t).count();
    }
  }
  return counts;
}

std::vector<Eigen::Index> voronoi_assign(const Eigen::MatrixXd& angles, const SphereGrid& grid) {
  const Eigen::Index n = angles.rows();
  const Eigen::Index p = grid.size();
  if (p == 0) throw std::invalid_argument("voronoi_assign: empty grid");
  std::vector<Eigen::Index> cell(static_cast<std::size_t>(n), 0);
  const Eigen::Index block = block_rows_for(p);
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index rows = std::min(block, n - start);
    const Eigen::MatrixXd dots =
        (angles.middleRows(start, rows) * grid.directions.transpose()).transpose();
    // columns of `dots` are now contiguous per observation
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double* col = dots.col(i).data();
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < p; ++j) {
        if (col[j] > col[best]) best = j;  // strict: ties keep the lowest index
      }
      cell[static_cast<std::size_t>(start + i)] = best;
    }
  }
  return cell;
}

CellTable observed_vs_expected(const Eigen::MatrixXd& obs_angles,
                               const Eigen::MatrixXd& sim_angles, const SphereGrid& grid,
                               double level) {
  const auto obs_cells = voronoi_assign(obs_angles, grid);
  const auto sim_cells = voronoi_assign(sim_angles, grid);
  const std::size_t p = static_cast<std::size_t>(grid.size());
  std::vector<long> obs_count(p, 0), sim_count(p, 0);
  for (Eigen::Index c : obs_cells) ++obs_count[static_cast<std::size_t>(c)];
  for (Eigen::Index c : sim_cells) ++sim_count[static_cast<std::size_t>(c)];

  CellTable table;
  table.n_obs = static_cast<long>(obs_cells.size());
  table.level = level;
  const double sim_n = static_cast<double>(sim_cells.size());
  for (std::size_t j = 0; j < p; ++j) {
    if (obs_count[j] == 0 && sim_count[j] == 0) continue;
    CellTable::Row row;
    row.direction = static_cast<Eigen::Index>(j);
    row.observed = obs_count[j];
    row.probability = static_cast<double>(sim_count[j]) / sim_n;
    row.expected = row.probability * static_cast<double>(table.n_obs);
    const auto [lo, hi] = binomial_ci(table.n_obs, row.probability, level);
    row.ci_lo = lo;
    row.ci_hi = hi;
    table.rows.push_back(row);
  }
  return table;
}

std::vector<std::size_t> downsample(std::size_t n, std::size_t stride) {
  if (stride < 1) throw std::invalid_argument("downsample: stride must be >= 1");
  std::vector<std::size_t> idx;
  idx.reserve(n / stride + 1);
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  return idx;
}

QqResult qq_bins(const PolarSample& obs, const PolarSample& sim, const SphereGrid& grid,
                 double theta_max, std::size_t min_count, double zeta) {
  if (min_count < 1) throw std::invalid_argument("qq_bins: min_count must be >= 1");
  const double cos_t = std::cos(theta_max);
  QqResult result;

  // Fixed probability levels for the aggregated curve.
  for (int k = 1; k <= 99; ++k) result.agg_level.push_back(k / 100.0);
  std::vector<double> agg_obs(result.agg_level.size(), 0.0);
  std::vector<double> agg_sim(result.agg_level.size(), 0.0);
  std::size_t agg_bins = 0;

  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const Eigen::VectorXd dir = grid.directions.row(j);
    std::vector<double> obs_r, sim_r;
    const Eigen::ArrayXd obs_dots = (obs.angles * dir).array();
    for (Eigen::Index i = 0; i < obs.size(); ++i) {
      if (obs_dots[i] > cos_t) obs_r.push_back(obs.radii[i]);
    }
    if (obs_r.size() < min_count) continue;
    const Eigen::ArrayXd sim_dots = (sim.angles * dir).array();
    for (Eigen::Index i = 0; i < sim.size(); ++i) {
      if (sim_dots[i] > cos_t) sim_r.push_back(sim.radii[i]);
    }
    if (sim_r.empty()) continue;

    std::sort(obs_r.begin(), obs_r.end());
    std::sort(sim_r.begin(), sim_r.end());
    const double threshold = sorted_quantile_hazen(sim_r, 1.0 - zeta);

    std::vector<double> obs_exc(std::upper_bound(obs_r.begin(), obs_r.end(), threshold), obs_r.end());
    std::vector<double> sim_exc(std::upper_bound(sim_r.begin(), sim_r.end(), threshold), sim_r.end());
    if (obs_exc.empty() || sim_exc.empty()) continue;

    QqBin bin;
    bin.direction = j;
    const std::size_t m = obs_exc.size();
    for (std::size_t k = 0; k < m; ++k) {
      const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
      bin.level.push_back(p);
      bin.observed.push_back(obs_exc[k]);
      bin.simulated.push_back(sorted_quantile_hazen(sim_exc, p));
    }
    for (std::size_t k = 0; k < result.agg_level.size(); ++k) {
      agg_obs[k] += sorted_quantile_hazen(obs_exc, result.agg_level[k]);
      agg_sim[k] += sorted_quantile_hazen(sim_exc, result.agg_level[k]);
    }
    ++agg_bins;
    result.bins.push_back(std::move(bin));
  }

  if (agg_bins > 0) {
    for (std::size_t k = 0; k < result.agg_level.size(); ++k) {
      result.agg_observed.push_back(agg_obs[k] / static_cast<double>(agg_bins));
      result.agg_simulated.push_back(agg_sim[k] / static_cast<double>(agg_bins));
    }
  } else {
    result.agg_level.clear();
  }
  return result;
}

std::vector<MarginalTailCurve> marginal_tail_curves(const Eigen::MatrixXd& obs,
                                                    const Eigen::MatrixXd& sim,
                                                    const std::vector<std::string>& names,
                                                    std::size_t grid_points) {
  if (obs.cols() != sim.cols() || static_cast<std::size_t>(obs.cols()) != names.size()) {
    throw std::invalid_argument("marginal_tail_curves: variable sets must match");
  }
  if (grid_points < 2) throw std::invalid_argument("marginal_tail_curves: need >= 2 grid points");

  std::vector<MarginalTailCurve> curves;
  for (Eigen::Index v = 0; v < obs.cols(); ++v) {
    std::vector<double> o(obs.col(v).data(), obs.col(v).data() + obs.rows());
    std::vector<double> s(sim.col(v).data(), sim.col(v).data() + sim.rows());
    std::sort(o.begin(), o.end());
    std::sort(s.begin(), s.end());
    const double lo = std::min(o.front(), s.front());
    const double hi = std::max(o.back(), s.back());

    MarginalTailCurve curve;
    curve.variable = names[static_cast<std::size_t>(v)];
    for (std::size_t g = 0; g < grid_points; ++g) {
      const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
      curve.grid.push_back(x);
      const long o_le = std::upper_bound(o.begin(), o.end(), x) - o.begin();
      const long s_le = std::upper_bound(s.begin(), s.end(), x) - s.begin();
      const long o_n = static_cast<long>(o.size());
      const long s_n = static_cast<long>(s.size());
      curve.obs_log10_exceed.push_back(log10_or_neg_inf(o_n - o_le, o_n));
      curve.obs_log10_nonexceed.push_back(log10_or_neg_inf(o_le, o_n));
      curve.sim_log10_exceed.push_back(log10_or_neg_inf(s_n - s_le, s_n));
      curve.sim_log10_nonexceed.push_back(log10_or_neg_inf(s_le, s_n));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<double> default_zeta_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.0125 * i);
  return grid;
}

StabilityTable threshold_stability(const Eigen::MatrixXd& data, std::span<const double> zeta_grid,
                                   const std::vector<int>& hidden_widths,
                                   const TrainConfig& config, double q_level, std::uint64_t seed) {
  for (double z : zeta_grid) {
    if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("threshold_stability: zeta must be in (0,1)");
  }
  const PolarSample polar = to_polar(data);
  const int d = static_cast<int>(data.cols());

  StabilityTable table;
  table.q_level = q_level;
  std::uint64_t stream = 0;
  for (double zeta : zeta_grid) {
    StabilityRow row;
    row.zeta = zeta;
    try {
      TrainConfig tc = config;
      tc.seed = Rng::derive_seed(seed, stream++);
      const MlpArchitecture u_arch{d, hidden_widths, 1};
      const MlpArchitecture gp_arch{d, hidden_widths, 2};
      const ThresholdModel threshold = fit_threshold(polar.angles, polar.radii, zeta, u_arch, tc);
      const ExceedanceSet exceed = exceedance_set(polar.angles, polar.radii, threshold);
      Eigen::MatrixXd exceed_angles(static_cast<Eigen::Index>(exceed.indices.size()), d);
      for (std::size_t i = 0; i < exceed.indices.size(); ++i) {
        exceed_angles.row(static_cast<Eigen::Index>(i)) = polar.angles.row(exceed.indices[i]);
      }
      tc.seed = Rng::derive_seed(seed, stream++);
      const GpModel gp = fit_gp(exceed_angles, exceed.excesses, gp_arch, tc);

      const Eigen::VectorXd u = threshold_at(threshold, polar.angles);
      const GpParamsBatch params = gp_params_at(gp, polar.angles);
      std::vector<double> xis, quantiles;
      xis.reserve(static_cast<std::size_t>(polar.size()));
      quantiles.reserve(static_cast<std::size_t>(polar.size()));
      for (Eigen::Index i = 0; i < polar.size(); ++i) {
        const double xi = params.xi[i];
        const double sigma = params.sigma[i];
        xis.push_back(xi);
        // conditional radial quantile at total exceedance level q_level
        const double q = std::abs(xi) < kXiBranchSwitch
                             ? u[i] + sigma * std::log(zeta / q_level)
                             : u[i] + sigma / xi * (std::pow(q_level / zeta, -xi) - 1.0);
        quantiles.push_back(q);
      }
      row.xi_summary = summary_quantiles(std::move(xis));
      row.radial_quantile_summary = summary_quantiles(std::move(quantiles));
      row.ok = true;
    } catch (const std::exception&) {
      row.ok = false;  // missing row: fit failed for this zeta
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<std::vector<std::size_t>> block_bootstrap(std::size_t n, std::size_t block_len,
                                                      std::size_t n_boot, std::uint64_t seed) {
  if (block_len < 1 || block_len > n) {
    throw std::invalid_argument("block_bootstrap: need 1 <= block_len <= n");
  }
  Rng rng(seed);
  const std::size_t n_starts = n - block_len + 1;
  std::vector<std::vector<std::size_t>> replicates(n_boot);
  for (auto& rep : replicates) {
    rep.reserve(n);
    while (rep.size() < n) {
      const std::size_t start = rng.uniform_index(n_starts);
      for (std::size_t k = 0; k < block_len && rep.size() < n; ++k) rep.push_back(start + k);
    }
  }
  return replicates;
}

Envelope bootstrap_ci(const std::vector<std::vector<double>>& curves, double level) {
  if (curves.size() < 2) throw std::invalid_argument("bootstrap_ci: need at least two replicates");
  const std::size_t len = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != len) throw std::invalid_argument("bootstrap_ci: replicate length mismatch");
  }
  Envelope env;
  env.lower.resize(len);
  env.upper.resize(len);
  std::vector<double> column(curves.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r][i];
    env.lower[i] = empirical_quantile(column, (1.0 - level) / 2.0);
    env.upper[i] = empirical_quantile(column, (1.0 + level) / 2.0);
  }
  return env;
}

}  // namespace spar
