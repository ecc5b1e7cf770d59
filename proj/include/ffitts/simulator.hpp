#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"
#include "ffitts/random.hpp"

namespace ffitts {

struct MtModel {
  double a_ms = 100.0;
  double b_ms_per_bit = 90.0;
  double noise_sd_ms = 5.0;
};

// Dual-Gaussian endpoint generator: per axis, deviation = X_r + X_a with
// X_r ~ N(0, alpha W^2) and X_a ~ N(0, sigma_a^2). Both means are zero.
struct SimulatorConfig {
  double alpha = 0.0108;
  double sigma_a_mm = 1.153;
  std::vector<double> amplitudes_mm = {20, 30, 45, 60};
  std::vector<double> widths_mm = {2, 4, 6, 8, 10};
  int trials_per_condition = 16;
  std::uint64_t seed = 1;
  MtModel mt_model;
  Dimensionality dimensionality = Dimensionality::OneD;
  std::string participant_id = "sim";

  static constexpr double mu_r_mm = 0.0;
  static constexpr double mu_a_mm = 0.0;

  void validate() const {
    if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
    if (!(sigma_a_mm >= 0.0)) throw ValidationError("sigma_a must be >= 0");
    if (trials_per_condition < 2) throw ValidationError("need at least 2 trials per condition");
    if (amplitudes_mm.empty() || widths_mm.empty()) throw ValidationError("need at least one amplitude and width");
    for (double a : amplitudes_mm) {
      if (!(a > 0.0)) throw ValidationError("amplitudes must be positive");
    }
    for (double w : widths_mm) {
      if (!(w > 0.0)) throw ValidationError("widths must be positive");
    }
    if (!(mt_model.noise_sd_ms >= 0.0)) throw ValidationError("MT noise SD must be >= 0");
  }

  // sigma_r for a width.
  double relative_sd(double width_mm) const { return std::sqrt(alpha) * width_mm; }
  double expected_variance(double width_mm) const { return alpha * width_mm * width_mm + sigma_a_mm * sigma_a_mm; }
};

// Header lines for generated CSV files (without the leading '#').
inline std::vector<std::string> simulation_metadata(const SimulatorConfig& c) {
  std::vector<std::string> m;
  m.push_back("generator=ffitts-simulate");
  m.push_back(fmt::format("normal_algorithm={}", kNormalAlgorithm));
  m.push_back(fmt::format("seed={}", c.seed));
  m.push_back(fmt::format("alpha={}", c.alpha));
  m.push_back(fmt::format("sigma_a_mm={}", c.sigma_a_mm));
  m.push_back(fmt::format("trials_per_condition={}", c.trials_per_condition));
  m.push_back(fmt::format("dimensionality={}", to_string(c.dimensionality)));
  m.push_back(fmt::format("mt_model=a:{},b:{},noise_sd:{}", c.mt_model.a_ms, c.mt_model.b_ms_per_bit,
                          c.mt_model.noise_sd_ms));
  return m;
}

// Tap records in canonical order: sorted by (A, W), then trial index. Each
// condition draws from its own stream seeded from (seed, condition index), so
// output is identical for identical configs. A first tap landing outside the
// target is followed by one re-aim tap (tap_index 2) at the same target.
inline std::vector<TrialRecord> generate(const SimulatorConfig& config) {
  config.validate();
  std::vector<Condition> conditions;
  for (double a : config.amplitudes_mm) {
    for (double w : config.widths_mm) conditions.push_back({a, w});
  }
  std::sort(conditions.begin(), conditions.end());
  conditions.erase(std::unique(conditions.begin(), conditions.end()), conditions.end());

  const bool two_d = config.dimensionality == Dimensionality::TwoD;
  std::vector<TrialRecord> out;
  out.reserve(conditions.size() * static_cast<std::size_t>(config.trials_per_condition) * 11 / 10);
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    const Condition& c = conditions[ci];
    NormalGenerator gen(mix_seed(config.seed, ci));
    const double sr = config.relative_sd(c.width_mm);
    const double base_mt = config.mt_model.a_ms +
                           config.mt_model.b_ms_per_bit * std::log2(c.amplitude_mm / c.width_mm + 1.0);
    for (int t = 1; t <= config.trials_per_condition; ++t) {
      auto deviation = [&] { return sr * gen() + config.sigma_a_mm * gen(); };
      const double dy = deviation();
      const double dx = two_d ? deviation() : 0.0;
      const double mt = std::max(0.0, base_mt + config.mt_model.noise_sd_ms * gen());

      TrialRecord tap;
      tap.participant_id = config.participant_id;
      tap.block = 1;
      tap.trial = t;
      tap.condition = c;
      tap.target_x_mm = 0.0;
      tap.target_y_mm = c.amplitude_mm;
      tap.touch_x_mm = dx;
      tap.touch_y_mm = c.amplitude_mm + dy;
      tap.mt_ms = mt;
      tap.tap_index = 1;
      out.push_back(tap);

      const bool hit = two_d ? std::hypot(dx, dy) <= 0.5 * c.width_mm : std::abs(dy) <= 0.5 * c.width_mm;
      if (!hit) {
        TrialRecord retap = tap;
        retap.tap_index = 2;
        retap.touch_x_mm = two_d ? config.sigma_a_mm * gen() : 0.0;
        retap.touch_y_mm = c.amplitude_mm + config.sigma_a_mm * gen();
        retap.mt_ms = mt + config.mt_model.a_ms;
        out.push_back(retap);
      }
    }
  }
  return out;
}

}  // namespace ffitts
