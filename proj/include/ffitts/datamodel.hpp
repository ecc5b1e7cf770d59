#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ffitts/errors.hpp"
#include "ffitts/stats.hpp"

namespace ffitts {

inline std::string format_mm(double v) {
  // shortest round-trippable-enough text for messages; not used for reports
  std::string s = std::to_string(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// One (A, W) cell of a pointing design. Ordered by amplitude, then width.
struct Condition {
  double amplitude_mm = 0.0;
  double width_mm = 0.0;

  auto operator<=>(const Condition&) const = default;

  void validate() const {
    if (!(amplitude_mm > 0.0) || !(width_mm > 0.0)) {
      throw ValidationError("condition (A=" + format_mm(amplitude_mm) + ", W=" + format_mm(width_mm) +
                            ") must have positive amplitude and width");
    }
  }

  std::string label() const { return "(A=" + format_mm(amplitude_mm) + ", W=" + format_mm(width_mm) + ")"; }
};

enum class Dimensionality { OneD, TwoD };

enum class AxisMode { XAxis, YAxis, Bivariate };

inline std::string_view to_string(Dimensionality d) { return d == Dimensionality::OneD ? "1d" : "2d"; }

inline std::string_view to_string(AxisMode m) {
  switch (m) {
    case AxisMode::XAxis: return "x";
    case AxisMode::YAxis: return "y";
    case AxisMode::Bivariate: return "bivariate";
  }
  return "?";
}

// A single tap. Taps of one trial share (participant, block, trial, condition);
// tap_index 1 is the first tap, higher indices are re-aims after a miss.
struct TrialRecord {
  std::string participant_id;
  int block = 0;
  int trial = 0;
  Condition condition;
  double target_x_mm = 0.0;
  double target_y_mm = 0.0;
  double touch_x_mm = 0.0;
  double touch_y_mm = 0.0;
  double mt_ms = 0.0;
  int tap_index = 1;
  bool is_practice = false;

  double dx() const { return touch_x_mm - target_x_mm; }
  double dy() const { return touch_y_mm - target_y_mm; }
  double distance_to_target() const { return std::hypot(dx(), dy()); }

  bool operator==(const TrialRecord&) const = default;
};

struct ConditionSummary {
  Condition condition;
  double mt_ms = 0.0;
  double sigma_obs_mm = 0.0;
  int n_trials = 2;
  double error_rate = 0.0;

  bool operator==(const ConditionSummary&) const = default;

  void validate() const {
    condition.validate();
    if (!(mt_ms > 0.0)) throw ValidationError(condition.label() + ": mean MT must be positive");
    if (!(sigma_obs_mm > 0.0)) throw ValidationError(condition.label() + ": sigma_obs must be positive");
    if (n_trials < 2) throw ValidationError(condition.label() + ": need at least 2 trials");
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
      throw ValidationError(condition.label() + ": error rate outside [0, 1]");
    }
  }
};

enum class SigmaMethod { CalibRapidAccurate, CalibAccuracyOnly, InterceptFitts, InterceptRandomA, UserGiven };

inline constexpr SigmaMethod kCatalogMethods[] = {SigmaMethod::CalibRapidAccurate, SigmaMethod::CalibAccuracyOnly,
                                                  SigmaMethod::InterceptFitts, SigmaMethod::InterceptRandomA};

// CLI spelling of each method.
inline std::string_view to_string(SigmaMethod m) {
  switch (m) {
    case SigmaMethod::CalibRapidAccurate: return "calib-ra";
    case SigmaMethod::CalibAccuracyOnly: return "calib-acc";
    case SigmaMethod::InterceptFitts: return "intercept-fitts";
    case SigmaMethod::InterceptRandomA: return "intercept-random";
    case SigmaMethod::UserGiven: return "user";
  }
  return "?";
}

// Row labels used in the W_f tables.
inline std::string_view display_name(SigmaMethod m) {
  switch (m) {
    case SigmaMethod::CalibRapidAccurate: return "Calib (R&A)";
    case SigmaMethod::CalibAccuracyOnly: return "Calib (Acc)";
    case SigmaMethod::InterceptFitts: return "Fitts";
    case SigmaMethod::InterceptRandomA: return "Random A";
    case SigmaMethod::UserGiven: return "Given";
  }
  return "?";
}

inline std::optional<SigmaMethod> parse_sigma_method(std::string_view s) {
  for (SigmaMethod m : {SigmaMethod::CalibRapidAccurate, SigmaMethod::CalibAccuracyOnly, SigmaMethod::InterceptFitts,
                        SigmaMethod::InterceptRandomA, SigmaMethod::UserGiven}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

struct SigmaEstimate {
  double sigma_a_mm = 0.0;
  SigmaMethod method = SigmaMethod::UserGiven;
  std::string source_dataset;

  bool operator==(const SigmaEstimate&) const = default;
};

struct Dataset {
  std::string name;
  Dimensionality dimensionality = Dimensionality::OneD;
  std::vector<ConditionSummary> summaries;
  std::vector<SigmaEstimate> sigma_a_catalog;

  bool operator==(const Dataset&) const = default;

  void validate() const {
    if (summaries.empty()) throw ValidationError("dataset '" + name + "' has no conditions");
    std::set<Condition> seen;
    for (const auto& s : summaries) {
      s.validate();
      if (!seen.insert(s.condition).second) {
        throw DuplicateConditionError("dataset '" + name + "' repeats condition " + s.condition.label());
      }
    }
    for (const auto& e : sigma_a_catalog) {
      if (!(e.sigma_a_mm > 0.0)) throw ValidationError("sigma_a catalog entries must be positive");
    }
  }

  std::optional<SigmaEstimate> catalog_entry(SigmaMethod m) const {
    for (const auto& e : sigma_a_catalog) {
      if (e.method == m) return e;
    }
    return std::nullopt;
  }
};

inline constexpr double kDefaultOutlierRadiusMm = 15.0;

// Signed-deviation spread of a group of first taps along the chosen axis.
// Bivariate: sqrt((var_x + var_y) / 2).
inline double endpoint_sd(std::span<const double> dx, std::span<const double> dy, AxisMode axis) {
  switch (axis) {
    case AxisMode::XAxis: return stats::sample_sd(dx);
    case AxisMode::YAxis: return stats::sample_sd(dy);
    case AxisMode::Bivariate: return std::sqrt(0.5 * (stats::sample_variance(dx) + stats::sample_variance(dy)));
  }
  return 0.0;
}

// Collapses tap-level records to one summary per condition, ordered by (A, W).
//
// A trial is the set of taps sharing participant, block, trial and condition.
// Practice trials are skipped. Trials whose first tap lies farther than
// outlier_radius_mm from the target centre are removed along with their re-taps.
// MT is the first tap's time; the error rate is the share of retained trials
// that needed a second tap.
inline std::vector<ConditionSummary> aggregate(std::span<const TrialRecord> taps, AxisMode axis,
                                               double outlier_radius_mm = kDefaultOutlierRadiusMm) {
  if (taps.empty()) throw DegenerateError("no trials to aggregate");
  if (!(outlier_radius_mm > 0.0)) throw ValidationError("outlier radius must be positive");

  using TrialKey = std::tuple<Condition, std::string, int, int>;
  struct TrialAcc {
    const TrialRecord* first = nullptr;
    int max_tap = 0;
  };
  std::map<TrialKey, TrialAcc> trials;
  for (const auto& t : taps) {
    if (t.is_practice) continue;
    t.condition.validate();
    if (t.tap_index < 1) throw ValidationError("tap_index must be >= 1");
    if (t.mt_ms < 0.0) throw ValidationError("mt_ms must be >= 0");
    auto& acc = trials[{t.condition, t.participant_id, t.block, t.trial}];
    acc.max_tap = std::max(acc.max_tap, t.tap_index);
    // Keep the lowest-index tap seen; ties resolved by content so the result
    // does not depend on input order.
    if (t.tap_index == 1 && (acc.first == nullptr || std::tie(t.mt_ms, t.touch_x_mm, t.touch_y_mm) <
                                                         std::tie(acc.first->mt_ms, acc.first->touch_x_mm,
                                                                  acc.first->touch_y_mm))) {
      acc.first = &t;
    }
  }

  struct Group {
    std::vector<double> mt, dx, dy;
    int missed = 0;
  };
  std::map<Condition, Group> groups;
  for (const auto& [key, acc] : trials) {
    const Condition& c = std::get<0>(key);
    auto& g = groups[c];  // keeps conditions whose trials are all outliers visible
    if (acc.first == nullptr) continue;  // re-taps without a first tap carry no MT
    if (acc.first->distance_to_target() > outlier_radius_mm) continue;
    g.mt.push_back(acc.first->mt_ms);
    g.dx.push_back(acc.first->dx());
    g.dy.push_back(acc.first->dy());
    if (acc.max_tap >= 2) ++g.missed;
  }

  std::vector<ConditionSummary> out;
  out.reserve(groups.size());
  for (auto& [c, g] : groups) {
    if (g.mt.size() < 2) {
      throw DegenerateError("degenerate condition " + c.label() + ": fewer than 2 retained trials");
    }
    // Sort so the floating-point sums do not depend on input order.
    std::sort(g.mt.begin(), g.mt.end());
    ConditionSummary s;
    s.condition = c;
    s.n_trials = static_cast<int>(g.mt.size());
    s.mt_ms = stats::mean(g.mt);
    std::vector<std::pair<double, double>> dev(g.dx.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = {g.dx[i], g.dy[i]};
    std::sort(dev.begin(), dev.end());
    for (std::size_t i = 0; i < dev.size(); ++i) std::tie(g.dx[i], g.dy[i]) = dev[i];
    s.sigma_obs_mm = endpoint_sd(g.dx, g.dy, axis);
    if (!(s.sigma_obs_mm > 0.0)) {
      throw DegenerateError("degenerate condition " + c.label() + ": zero endpoint spread");
    }
    s.error_rate = static_cast<double>(g.missed) / static_cast<double>(s.n_trials);
    out.push_back(s);
  }
  return out;
}

}  // namespace ffitts
