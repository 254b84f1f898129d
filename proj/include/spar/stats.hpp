#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spar {

/// log(sum(exp(x))) with a max shift; -inf entries drop out.
inline double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

namespace detail {

/// Walks the binomial pmf terms j = 0..n in order, calling
/// visit(j, cdf_so_far); visit returns false to stop early. Terms follow
/// the ratio recurrence T_{j+1} = T_j (n-j)/(j+1) p/q, run directly when
/// the first term q^n is representable and in log space otherwise.
template <typename Visit>
void binomial_cdf_scan(long n, double p, Visit visit) {
  const double q = 1.0 - p;
  if (p == 0.0) {
    visit(0, 1.0);
    return;
  }
  if (p == 1.0) {
    for (long j = 0; j < n; ++j) {
      if (!visit(j, 0.0)) return;
    }
    visit(n, 1.0);
    return;
  }
  const double log_t0 = static_cast<double>(n) * std::log1p(-p);
  if (log_t0 > -690.0) {
    double term = std::pow(q, static_cast<double>(n));
    double cdf = term;
    for (long j = 0;; ++j) {
      if (!visit(j, std::min(cdf, 1.0)) || j >= n) return;
      term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * (p / q);
      cdf += term;
    }
  }
  const double log_ratio = std::log(p) - std::log1p(-p);
  double log_term = log_t0;
  double max_log = log_term;
  double scaled_sum = 1.0;  // sum of exp(log_term_j - max_log)
  for (long j = 0;; ++j) {
    const double cdf = std::exp(max_log + std::log(scaled_sum));
    if (!visit(j, std::min(cdf, 1.0)) || j >= n) return;
    log_term += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_ratio;
    if (log_term > max_log) {
      scaled_sum = scaled_sum * std::exp(max_log - log_term) + 1.0;
      max_log = log_term;
    } else {
      scaled_sum += std::exp(log_term - max_log);
    }
  }
}

}  // namespace detail

/// Binomial CDF P(N <= k) for N ~ Bin(n, p): exact term summation, direct
/// while the leading term q^n is representable and max-scaled in log space
/// beyond that.
inline double binomial_cdf(long k, long n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial_cdf: need n >= 0 and p in [0,1]");
  }
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double out = p == 0.0 ? 1.0 : 0.0;
  detail::binomial_cdf_scan(n, p, [&](long j, double cdf) {
    out = cdf;
    return j < k;
  });
  return out;
}

/// Central binomial interval: smallest k_lo with CDF(k_lo) >= (1-level)/2
/// and smallest k_hi with CDF(k_hi) >= (1+level)/2, so that
/// P(k_lo <= N <= k_hi) >= level. Single pass over the pmf terms.
inline std::pair<long, long> binomial_ci(long n, double p, double level) {
  if (level < 0.0 || level >= 1.0) throw std::invalid_argument("binomial_ci: level must be in [0,1)");
  const double lo_target = (1.0 - level) / 2.0;
  const double hi_target = (1.0 + level) / 2.0;
  long k_lo = n;
  long k_hi = n;
  detail::binomial_cdf_scan(n, p, [&](long j, double cdf) {
    if (k_lo == n && cdf >= lo_target) k_lo = j;
    if (cdf >= hi_target) {
      k_hi = j;
      return false;
    }
    return true;
  });
  if (k_lo > k_hi) k_lo = k_hi;
  return {k_lo, k_hi};
}

/// Empirical quantile with linear interpolation between order statistics
/// (the h = (m-1)q rule). Input need not be sorted.
inline double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= values.size()) return values.back();
  const double f = h - static_cast<double>(i);
  return values[i] + f * (values[i + 1] - values[i]);
}

/// Quantile of an already sorted sample at a Hazen plotting position:
/// level p maps to rank h = p*m - 0.5, linearly interpolated, clamped to
/// the sample range.
inline double sorted_quantile_hazen(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("sorted_quantile_hazen: empty sample");
  const double m = static_cast<double>(sorted.size());
  const double h = p * m - 0.5;
  if (h <= 0.0) return sorted.front();
  if (h >= m - 1.0) return sorted.back();
  const std::size_t i = static_cast<std::size_t>(h);
  const double f = h - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

}  // namespace spar
