#pragma once

#include <cstdint>
#include <vector>

namespace rqwalk {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  int n = 0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion at confidence z (1.96 ~ 95%).
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.96);

// Percentile bootstrap CI for the slope of fit_line applied to resampled rows
// of (x, rows-of-y): each resample draws rows with replacement, averages them
// columnwise, and refits.  Used when rows are per-realization decay profiles.
Interval bootstrap_slope_ci(const std::vector<double>& x,
                            const std::vector<std::vector<double>>& rows,
                            int resamples, std::uint64_t seed, double alpha = 0.05,
                            bool log_of_mean = true);

// Mean of the central (1 - 2*frac) quantile span.
double trimmed_mean(std::vector<double> v, double frac);
double median(std::vector<double> v);

// Kolmogorov-Smirnov distance of a sample against the uniform [0,1) CDF.
double ks_uniform_distance(std::vector<double> sample);

}  // namespace rqwalk
