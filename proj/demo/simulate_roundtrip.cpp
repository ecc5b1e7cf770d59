// Simulates a dual-Gaussian pointing experiment, then recovers sigma_a with
// the intercept method.

#include <fmt/format.h>

#include "ffitts/ffitts.hpp"

int main() {
  ffitts::SimulatorConfig cfg;
  cfg.trials_per_condition = 400;
  cfg.seed = 7;
  const auto taps = ffitts::generate(cfg);
  const auto summaries = ffitts::aggregate(taps, ffitts::AxisMode::YAxis);
  const auto fit = ffitts::sigma_from_intercept(summaries);
  fmt::print("true alpha {:.4f}, sigma_a {:.3f} mm\n", cfg.alpha, cfg.sigma_a_mm);
  fmt::print("fit  alpha {:.4f}, sigma_a {:.3f} mm (R2 {:.3f})\n", fit.slope, fit.sigma_a_mm(), fit.r2);
}
