#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"
#include "ffitts/stats.hpp"

namespace ffitts {

struct Deviation2D {
  double x = 0.0;
  double y = 0.0;
};

// SD of signed calibration deviations. The method tag only labels the result:
// "rapid and accurate" and "accuracy only" instructions are computed alike.
inline SigmaEstimate sigma_from_calibration(std::span<const double> deviations_mm, SigmaMethod method,
                                            std::string source = {}) {
  if (deviations_mm.size() < 2) throw DegenerateError("calibration needs at least 2 deviations");
  const double sd = stats::sample_sd(deviations_mm);
  if (!(sd > 0.0)) throw DegenerateError("calibration deviations have zero variance");
  return {sd, method, std::move(source)};
}

// Bivariate SD, sqrt((var_x + var_y) / 2).
inline SigmaEstimate sigma_from_calibration(std::span<const Deviation2D> deviations_mm, SigmaMethod method,
                                            std::string source = {}) {
  if (deviations_mm.size() < 2) throw DegenerateError("calibration needs at least 2 deviations");
  std::vector<double> xs, ys;
  xs.reserve(deviations_mm.size());
  ys.reserve(deviations_mm.size());
  for (const auto& d : deviations_mm) {
    xs.push_back(d.x);
    ys.push_back(d.y);
  }
  const double sd = std::sqrt(0.5 * (stats::sample_variance(xs) + stats::sample_variance(ys)));
  if (!(sd > 0.0)) throw DegenerateError("calibration deviations have zero variance");
  return {sd, method, std::move(source)};
}

// OLS of sigma_obs^2 on W^2. One point per summary passed in: per (A, W) for a
// Fitts task, per W for a random-amplitude task.
struct InterceptFit {
  double slope = 0.0;          // alpha
  double intercept_mm2 = 0.0;  // sigma_a^2
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;  // (W^2, sigma_obs^2)

  double sigma_a_mm() const {
    if (!(intercept_mm2 > 0.0)) {
      throw NonPhysicalInterceptError(
          fmt::format("intercept {} mm^2 is not positive; sigma_a is undefined", intercept_mm2));
    }
    return std::sqrt(intercept_mm2);
  }
};

inline InterceptFit sigma_from_intercept(std::span<const ConditionSummary> summaries) {
  std::set<double> widths;
  for (const auto& s : summaries) widths.insert(s.condition.width_mm);
  if (widths.size() < 3) throw DegenerateError("intercept method needs at least 3 distinct widths");

  InterceptFit fit;
  std::vector<double> x, y;
  for (const auto& s : summaries) {
    const double w2 = s.condition.width_mm * s.condition.width_mm;
    const double v = s.sigma_obs_mm * s.sigma_obs_mm;
    fit.points.emplace_back(w2, v);
    x.push_back(w2);
    y.push_back(v);
  }
  const auto lf = stats::linear_fit(x, y);
  fit.slope = lf.slope;
  fit.intercept_mm2 = lf.intercept;
  fit.r2 = lf.r2;
  if (!std::isfinite(fit.slope) || !std::isfinite(fit.intercept_mm2)) throw SingularFitError("non-finite regression");
  return fit;
}

inline SigmaEstimate estimate_sigma_by_intercept(std::span<const ConditionSummary> summaries, SigmaMethod method,
                                                 std::string source = {}) {
  return {sigma_from_intercept(summaries).sigma_a_mm(), method, std::move(source)};
}

struct NormalityResult {
  double statistic = 1.0;  // Shapiro-Wilk W
  double p_value = 1.0;
  bool pass = true;
};

namespace detail {

// c[0] + c[1] x + ... + c[N-1] x^(N-1)
template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

}  // namespace detail

// Shapiro-Wilk test with Royston's (1992, 1995) coefficient and p-value
// approximations; valid for 3 <= n <= 5000.
inline NormalityResult normality_check(std::span<const double> sample, double alpha = 0.05) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) throw UnsupportedSizeError(fmt::format("Shapiro-Wilk needs 3..5000 values, got {}", n));
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (!(x.back() - x.front() > 0.0)) throw DegenerateError("Shapiro-Wilk: sample has zero variance");

  const std::size_t half = n / 2;
  const double dn = static_cast<double>(n);
  // a[i] weights the i-th largest minus the i-th smallest observation.
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    static constexpr std::array<double, 6> c1 = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr std::array<double, 6> c2 = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = -stats::normal_quantile((static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(dn);
    const double a1 = detail::poly(c1, rsn) + m[0] / ssumm2;
    std::size_t first_scaled = 1;
    double fac = 0.0;
    if (n > 5) {
      const double a2 = m[1] / ssumm2 + detail::poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
      first_scaled = 2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_scaled; i < half; ++i) a[i] = m[i] / fac;
  }

  double numerator = 0.0;
  for (std::size_t i = 0; i < half; ++i) numerator += a[i] * (x[n - 1 - i] - x[i]);
  const double mean = stats::mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double w = numerator * numerator / ss;
  w = std::min(w, 1.0);

  NormalityResult r;
  r.statistic = w;
  if (n == 3) {
    constexpr double six_over_pi = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    r.p_value = std::max(0.0, six_over_pi * (std::asin(std::sqrt(w)) - stqr));
  } else {
    const double w1 = 1.0 - w;
    if (!(w1 > 0.0)) {
      r.p_value = 1.0;
    } else {
      double y = std::log(w1);
      double mu = 0.0, sigma = 1.0;
      if (n <= 11) {
        static constexpr std::array<double, 2> g = {-2.273, 0.459};
        static constexpr std::array<double, 4> c3 = {0.544, -0.39978, 0.025054, -6.714e-4};
        static constexpr std::array<double, 4> c4 = {1.3822, -0.77857, 0.062767, -0.0020322};
        const double gamma = detail::poly(g, dn);
        if (y >= gamma) {
          r.p_value = 1e-99;
          r.pass = r.p_value > alpha;
          return r;
        }
        y = -std::log(gamma - y);
        mu = detail::poly(c3, dn);
        sigma = std::exp(detail::poly(c4, dn));
      } else {
        static constexpr std::array<double, 4> c5 = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static constexpr std::array<double, 3> c6 = {-0.4803, -0.082676, 0.0030302};
        const double ln = std::log(dn);
        mu = detail::poly(c5, ln);
        sigma = std::exp(detail::poly(c6, ln));
      }
      r.p_value = stats::normal_upper_tail(y, mu, sigma);
    }
  }
  r.pass = r.p_value > alpha;
  return r;
}

// Per-participant calibration summary as reported for the calibration tasks:
// each participant's SD (univariate y for 1D, bivariate for 2D), then the mean
// over participants is the tremor estimate.
struct CalibrationReport {
  struct Participant {
    std::string id;
    int n = 0;
    double sd_mm = 0.0;
    std::optional<NormalityResult> normality;  // absent when n is outside 3..5000
  };
  std::vector<Participant> participants;
  SigmaEstimate estimate;
  int outliers_removed = 0;
};

inline CalibrationReport sigma_from_calibration_trials(std::span<const TrialRecord> taps, Dimensionality dim,
                                                       SigmaMethod method, std::string source = {},
                                                       double outlier_radius_mm = kDefaultOutlierRadiusMm,
                                                       double alpha = 0.05) {
  std::map<std::string, std::vector<Deviation2D>> by_participant;
  CalibrationReport report;
  for (const auto& t : taps) {
    if (t.is_practice || t.tap_index != 1) continue;
    if (t.distance_to_target() > outlier_radius_mm) {
      ++report.outliers_removed;
      continue;
    }
    by_participant[t.participant_id].push_back({t.dx(), t.dy()});
  }
  if (by_participant.empty()) throw DegenerateError("no calibration taps");

  double total = 0.0;
  for (const auto& [id, devs] : by_participant) {
    CalibrationReport::Participant p;
    p.id = id;
    p.n = static_cast<int>(devs.size());
    std::vector<double> ys;
    for (const auto& d : devs) ys.push_back(d.y);
    if (dim == Dimensionality::OneD) {
      p.sd_mm = sigma_from_calibration(std::span<const double>(ys), method).sigma_a_mm;
    } else {
      p.sd_mm = sigma_from_calibration(std::span<const Deviation2D>(devs), method).sigma_a_mm;
    }
    if (ys.size() >= 3 && ys.size() <= 5000) {
      try {
        p.normality = normality_check(ys, alpha);
      } catch (const DegenerateError&) {
      }
    }
    total += p.sd_mm;
    report.participants.push_back(std::move(p));
  }
  report.estimate = {total / static_cast<double>(report.participants.size()), method, std::move(source)};
  return report;
}

}  // namespace ffitts
