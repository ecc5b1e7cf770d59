// Fits all seven models to the embedded 2D dataset and prints the ranking.

#include <iostream>

#include <fmt/format.h>

#include "ffitts/ffitts.hpp"

int main() {
  const auto ds = ffitts::embedded("paper-2d");
  const auto sigma = ds.catalog_entry(ffitts::SigmaMethod::CalibAccuracyOnly);
  std::vector<ffitts::ModelSpec> models;
  for (auto id : ffitts::kAllModels) models.push_back({id});

  const auto sel = ffitts::compare(ds, models, sigma->sigma_a_mm);
  for (std::size_t i = 0; i < sel.results.size(); ++i) {
    const auto& r = sel.results[i];
    if (!r.usable()) {
      fmt::print("{}  unusable: {}\n", r.spec.key(), r.unusable_reason);
      continue;
    }
    fmt::print("{}  R2 {:.4f}  AIC {:7.1f}  dAIC {:5.1f}{}\n", r.spec.key(), *r.r2, *r.aic, *sel.delta_aic[i],
               sel.rejected[i] ? "  rejected" : "");
  }
  fmt::print("best by AIC: {}\n", ffitts::ModelSpec{sel.best_by.at("aic")}.key());
}
