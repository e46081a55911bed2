#include "rqwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqwalk/errors.hpp"
#include "rqwalk/rng.hpp"

namespace rqwalk {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit input lengths differ");
  if (x.size() < 2) throw ConfigError("fit needs at least 2 points");
  std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0)) throw ConfigError("fit abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n = static_cast<int>(n);
  // All-equal ordinates fit exactly; guard the 0/0.
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) throw ConfigError("wilson interval needs trials > 0");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Interval bootstrap_slope_ci(const std::vector<double>& x,
                            const std::vector<std::vector<double>>& rows,
                            int resamples, std::uint64_t seed, double alpha,
                            bool log_of_mean) {
  if (rows.empty()) throw ConfigError("bootstrap needs at least one row");
  for (const auto& r : rows) {
    if (r.size() != x.size()) throw ConfigError("bootstrap row length mismatch");
  }
  std::size_t nrow = rows.size(), ncol = x.size();
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(resamples));
  auto eng = make_engine(seed, 0xb00757ull);
  std::vector<double> mean(ncol);
  std::vector<double> yfit(ncol);
  for (int b = 0; b < resamples; ++b) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t i = 0; i < nrow; ++i) {
      const auto& r = rows[eng() % nrow];
      for (std::size_t c = 0; c < ncol; ++c) mean[c] += r[c];
    }
    bool usable = true;
    for (std::size_t c = 0; c < ncol; ++c) {
      double m = mean[c] / static_cast<double>(nrow);
      if (log_of_mean) {
        if (!(m > 0)) {
          usable = false;
          break;
        }
        yfit[c] = std::log(m);
      } else {
        yfit[c] = m;
      }
    }
    if (!usable) continue;
    slopes.push_back(fit_line(x, yfit).slope);
  }
  if (slopes.size() < 16) throw SolverError("too few usable bootstrap resamples");
  std::sort(slopes.begin(), slopes.end());
  auto pick = [&](double q) {
    double pos = q * static_cast<double>(slopes.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i);
    if (i + 1 >= slopes.size()) return slopes.back();
    return slopes[i] * (1 - frac) + slopes[i + 1] * frac;
  };
  return {pick(alpha / 2), pick(1 - alpha / 2)};
}

double trimmed_mean(std::vector<double> v, double frac) {
  if (v.empty()) throw ConfigError("trimmed mean of empty sample");
  if (frac < 0 || frac >= 0.5) throw ConfigError("trim fraction must be in [0, 0.5)");
  std::sort(v.begin(), v.end());
  std::size_t cut = static_cast<std::size_t>(frac * static_cast<double>(v.size()));
  double acc = 0;
  std::size_t n = 0;
  for (std::size_t i = cut; i < v.size() - cut; ++i) {
    acc += v[i];
    ++n;
  }
  return acc / static_cast<double>(n);
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of empty sample");
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double ks_uniform_distance(std::vector<double> sample) {
  if (sample.empty()) throw ConfigError("KS distance of empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double u = sample[i];
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - u));
    d = std::max(d, std::abs(u - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace rqwalk
