#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include <boost/math/distributions/normal.hpp>

#include "ffitts/errors.hpp"

namespace ffitts::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample variance with (n - 1) denominator; two-pass for stability.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw DegenerateError("variance needs at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double sample_sd(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

// y = intercept + slope * x by least squares, computed on centred data.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
  double tss = 0.0;
  double r2 = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("x and y differ in length");
  if (x.size() < 3) throw SingularFitError("regression needs at least 3 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    tss += (y[i] - my) * (y[i] - my);
  }
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (!(sxx > 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(x.size()))) {
    throw SingularFitError("regressor is constant; slope is not identifiable");
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r;
  }
  f.tss = tss;
  f.r2 = tss > 0.0 ? 1.0 - f.rss / tss : 1.0;
  return f;
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_upper_tail(double z, double mu, double sd) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(mu, sd), z));
}

}  // namespace ffitts::stats
