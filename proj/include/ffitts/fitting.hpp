#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"
#include "ffitts/id_models.hpp"
#include "ffitts/stats.hpp"

namespace ffitts {

struct IdMtPoint {
  double id_bits = 0.0;
  double mt_ms = 0.0;
};

struct OlsFit {
  double a = 0.0;  // intercept, ms
  double b = 0.0;  // slope, ms/bit
  double rss = 0.0;
  double r2 = 0.0;
};

inline OlsFit ols_fit(std::span<const IdMtPoint> points) {
  std::vector<double> x, y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(p.id_bits);
    y.push_back(p.mt_ms);
  }
  const auto f = stats::linear_fit(x, y);
  return {f.intercept, f.slope, f.rss, f.r2};
}

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  bool perfect_fit = false;  // rss == 0; both criteria are -inf
};

// Gaussian maximum-likelihood form for least squares,
//   AIC = n ln(2 pi RSS / n) + n + 2k,   BIC = n ln(2 pi RSS / n) + n + k ln n,
// with k the number of regression coefficients (2, or 3 with c). The error
// variance is not counted in k; this is the convention under which the
// published BIC - AIC gaps equal k (ln n - 2).
inline InformationCriteria information_criteria(double rss, int n, int k) {
  if (n <= k) throw ValidationError(fmt::format("information criteria need n > k (n={}, k={})", n, k));
  if (rss < 0.0 || !std::isfinite(rss)) throw ValidationError("rss must be finite and non-negative");
  if (rss == 0.0) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    return {ninf, ninf, true};
  }
  const double dn = static_cast<double>(n);
  const double base = dn * std::log(2.0 * std::numbers::pi * rss / dn) + dn;
  return {base + 2.0 * k, base + k * std::log(dn), false};
}

inline double adjusted_r2(double r2, int n, int k) {
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - k);
}

struct ConditionFit {
  Condition condition;
  double width_mm = 0.0;  // W, W_e or W_f before the c adjustment
  double id_bits = 0.0;
  double mt_ms = 0.0;
  double predicted_mt_ms = 0.0;
  double residual_ms = 0.0;
};

inline std::string math_error_note(std::size_t n) {
  return fmt::format("mathematical error in {} condition{}", n, n == 1 ? "" : "s");
}

struct FitResult {
  ModelSpec spec;
  std::optional<double> a_ms;
  std::optional<double> b_ms_per_bit;
  std::optional<double> c_mm;        // set for c models only
  std::optional<double> sigma_a_mm;  // set for the given-sigma_a model
  std::optional<double> rss;
  std::optional<double> r2;
  std::optional<double> adj_r2;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> cv_rmse_ms;
  std::string cv_note;  // why cv_rmse_ms is absent, if it is
  int n = 0;
  int k = 2;
  std::vector<ConditionFit> per_condition;
  std::vector<MathError> math_errors;
  std::string unusable_reason;

  bool usable() const { return unusable_reason.empty(); }
};

struct CSearchOptions {
  int grid_points = 2000;
  double boundary_guard_mm = 1e-6;
  double tolerance_mm = 1e-6;
};

namespace detail {

struct Design {
  std::vector<Condition> conditions;
  std::vector<double> widths;
  std::vector<double> mts;
};

inline double r2_at(const ModelSpec& spec, const Design& d, double c) {
  std::vector<IdMtPoint> pts(d.conditions.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto id = compute_id(spec, d.conditions[i], d.widths[i], c);
    if (!id) return -std::numeric_limits<double>::infinity();
    pts[i] = {id.value(), d.mts[i]};
  }
  try {
    return ols_fit(pts).r2;
  } catch (const SingularFitError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// argmax_c R^2(c) over [0, min width - guard]: coarse grid, then golden-section
// refinement of the bracket around the best grid point. Ties go to smaller c.
inline double search_c(const ModelSpec& spec, const Design& d, const CSearchOptions& opt) {
  const double c_max = *std::min_element(d.widths.begin(), d.widths.end());
  const double upper = c_max - opt.boundary_guard_mm;
  if (!(upper > 0.0)) return 0.0;

  const int n = std::max(opt.grid_points, 3);
  auto grid = [&](int j) { return upper * static_cast<double>(j) / static_cast<double>(n - 1); };
  int best_j = 0;
  double best_r2 = r2_at(spec, d, 0.0);
  for (int j = 1; j < n; ++j) {
    const double r = r2_at(spec, d, grid(j));
    if (r > best_r2) {
      best_r2 = r;
      best_j = j;
    }
  }

  double lo = grid(std::max(best_j - 1, 0));
  double hi = grid(std::min(best_j + 1, n - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = r2_at(spec, d, x1);
  double f2 = r2_at(spec, d, x2);
  while (hi - lo > opt.tolerance_mm) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = r2_at(spec, d, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = r2_at(spec, d, x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double grid_best = grid(best_j);
  if (r2_at(spec, d, refined) > best_r2) return refined;
  return grid_best;
}

}  // namespace detail

struct FitOptions {
  std::optional<double> sigma_a_mm;  // required by the given-sigma_a model
  std::optional<double> fixed_c_mm;  // evaluate a c model at this c without optimizing (k stays 2)
  bool cross_validate = true;
  CSearchOptions search;
};

struct CvResult {
  std::optional<double> rmse_ms;
  std::vector<double> residuals_ms;  // one per held-out condition, input order
  std::string undefined_reason;
};

namespace detail {

inline FitResult fit_design(const ModelSpec& spec, const Design& d, const FitOptions& opt) {
  FitResult r;
  r.spec = spec;
  r.n = static_cast<int>(d.conditions.size());
  double c = 0.0;
  if (spec.optimizes_c()) {
    if (opt.fixed_c_mm) {
      c = *opt.fixed_c_mm;
    } else {
      c = search_c(spec, d, opt.search);
      r.k = 3;
    }
    r.c_mm = c;
  }
  std::vector<IdMtPoint> pts(d.conditions.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto id = compute_id(spec, d.conditions[i], d.widths[i], c);
    if (!id) {
      r.math_errors.push_back(id.error());
      continue;
    }
    pts[i] = {id.value(), d.mts[i]};
  }
  if (!r.math_errors.empty()) {
    r.unusable_reason = math_error_note(r.math_errors.size());
    return r;
  }
  const OlsFit f = ols_fit(pts);
  r.a_ms = f.a;
  r.b_ms_per_bit = f.b;
  r.rss = f.rss;
  r.r2 = f.r2;
  if (r.n > r.k) {
    r.adj_r2 = adjusted_r2(f.r2, r.n, r.k);
    const auto ic = information_criteria(f.rss, r.n, r.k);
    r.aic = ic.aic;
    r.bic = ic.bic;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double pred = f.a + f.b * pts[i].id_bits;
    r.per_condition.push_back({d.conditions[i], d.widths[i], pts[i].id_bits, d.mts[i], pred, d.mts[i] - pred});
  }
  return r;
}

// Builds the regression design for a model; MathErrors for W_f are collected.
inline Design make_design(const ModelSpec& spec, std::span<const ConditionSummary> summaries,
                          std::optional<double> sigma_a, std::vector<MathError>& errors) {
  Design d;
  for (const auto& s : summaries) {
    auto w = model_width(spec, s, sigma_a);
    if (!w) {
      errors.push_back(w.error());
      continue;
    }
    d.conditions.push_back(s.condition);
    d.widths.push_back(w.value().value_mm);
    d.mts.push_back(s.mt_ms);
  }
  return d;
}

}  // namespace detail

// Leave-one-condition-out cross-validation. Each fold refits a and b (and
// re-optimizes c for c models) on the remaining conditions, then predicts the
// held-out MT. A held-out width outside the fold's c domain is predicted with
// the guarded ID, so the large residual stays in the score.
inline CvResult loocv_rmse(std::span<const ConditionSummary> summaries, const ModelSpec& spec,
                           const FitOptions& opt = {}) {
  if (summaries.size() < 4) throw ValidationError("cross-validation needs at least 4 conditions");
  CvResult cv;
  if (spec.tremor() == TremorTreatment::GivenSigmaA && !opt.sigma_a_mm) {
    cv.undefined_reason = "no sigma_a given";
    return cv;
  }
  std::vector<MathError> errors;
  const auto full = detail::make_design(spec, summaries, opt.sigma_a_mm, errors);
  if (!errors.empty()) {
    cv.undefined_reason = math_error_note(errors.size());
    return cv;
  }
  const std::size_t n = full.conditions.size();
  double ss = 0.0;
  for (std::size_t hold = 0; hold < n; ++hold) {
    detail::Design train;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == hold) continue;
      train.conditions.push_back(full.conditions[i]);
      train.widths.push_back(full.widths[i]);
      train.mts.push_back(full.mts[i]);
    }
    double c = 0.0;
    if (spec.optimizes_c()) c = opt.fixed_c_mm ? *opt.fixed_c_mm : detail::search_c(spec, train, opt.search);
    std::vector<IdMtPoint> pts(train.conditions.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto id = compute_id(spec, train.conditions[i], train.widths[i], c);
      if (!id) {
        cv.undefined_reason = fmt::format("fold {}: {}", hold + 1, id.error().reason);
        cv.residuals_ms.clear();
        return cv;
      }
      pts[i] = {id.value(), train.mts[i]};
    }
    const OlsFit f = ols_fit(pts);
    const double id = compute_id_guarded(spec, full.conditions[hold], full.widths[hold], c, opt.search.boundary_guard_mm);
    const double resid = full.mts[hold] - (f.a + f.b * id);
    cv.residuals_ms.push_back(resid);
    ss += resid * resid;
  }
  cv.rmse_ms = std::sqrt(ss / static_cast<double>(n));
  return cv;
}

// Fits one model to a set of condition summaries.
inline FitResult fit_model(std::span<const ConditionSummary> summaries, const ModelSpec& spec,
                           const FitOptions& opt = {}) {
  if (summaries.size() < 3) throw ValidationError("fitting needs at least 3 conditions");
  FitResult r;
  r.spec = spec;
  r.n = static_cast<int>(summaries.size());
  if (spec.tremor() == TremorTreatment::GivenSigmaA) {
    if (!opt.sigma_a_mm) {
      r.unusable_reason = "no sigma_a given";
      r.cv_note = r.unusable_reason;
      return r;
    }
    if (!(*opt.sigma_a_mm > 0.0)) throw ValidationError("sigma_a must be positive");
  }
  if (opt.fixed_c_mm && !(*opt.fixed_c_mm >= 0.0)) throw ValidationError("c must be non-negative");

  std::vector<MathError> errors;
  const auto design = detail::make_design(spec, summaries, opt.sigma_a_mm, errors);
  if (!errors.empty()) {
    r.math_errors = std::move(errors);
    r.sigma_a_mm = opt.sigma_a_mm;
    r.unusable_reason = math_error_note(r.math_errors.size());
    r.cv_note = r.unusable_reason;
    return r;
  }
  r = detail::fit_design(spec, design, opt);
  if (spec.tremor() == TremorTreatment::GivenSigmaA) r.sigma_a_mm = opt.sigma_a_mm;
  if (!r.usable()) {
    r.cv_note = r.unusable_reason;
    return r;
  }
  if (opt.cross_validate) {
    if (summaries.size() >= 4) {
      auto cv = loocv_rmse(summaries, spec, opt);
      r.cv_rmse_ms = cv.rmse_ms;
      r.cv_note = cv.undefined_reason;
    } else {
      r.cv_note = "fewer than 4 conditions";
    }
  }
  return r;
}

struct OptimizedC {
  double c_star_mm = 0.0;
  FitResult fit;
};

// R^2-maximizing tremor parameter for a c model (M3-M6). c = 0 is always feasible.
inline OptimizedC optimize_c(std::span<const ConditionSummary> summaries, const ModelSpec& spec,
                             const CSearchOptions& search = {}) {
  if (!spec.optimizes_c()) throw ValidationError(spec.key() + " has no free tremor parameter");
  FitOptions opt;
  opt.cross_validate = false;
  opt.search = search;
  auto fit = fit_model(summaries, spec, opt);
  return {fit.c_mm.value_or(0.0), std::move(fit)};
}

inline constexpr double kRejectDelta = 10.0;

struct SelectionReport {
  std::vector<FitResult> results;                // ordered by model id
  std::map<std::string, ModelId> best_by;        // criterion -> best model among usable ones
  std::vector<std::optional<double>> delta_aic;  // aligned with results
  std::vector<std::optional<double>> delta_bic;
  std::vector<bool> rejected;  // delta AIC or delta BIC >= 10, or unusable

  bool is_rejected(ModelId id) const {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].spec.id == id) return rejected[i];
    }
    return true;
  }

  const FitResult* find(ModelId id) const {
    for (const auto& r : results) {
      if (r.spec.id == id) return &r;
    }
    return nullptr;
  }
};

inline constexpr const char* kCriteria[] = {"r2", "adj_r2", "aic", "bic", "cv_rmse"};

namespace detail {

inline std::optional<double> delta(std::optional<double> v, double best) {
  if (!v) return std::nullopt;
  if (std::isinf(best)) return std::isinf(*v) ? 0.0 : std::numeric_limits<double>::infinity();
  return *v - best;
}

}  // namespace detail

// Fits every requested model and ranks them. Models are fitted concurrently;
// results come back in model-id order regardless of completion order.
inline SelectionReport compare(const Dataset& dataset, std::span<const ModelSpec> models,
                               std::optional<double> sigma_a_mm, bool cross_validate = true) {
  dataset.validate();
  std::vector<ModelSpec> order(models.begin(), models.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  FitOptions opt;
  opt.sigma_a_mm = sigma_a_mm;
  opt.cross_validate = cross_validate;
  std::vector<std::future<FitResult>> jobs;
  for (const auto& spec : order) {
    jobs.push_back(std::async(std::launch::async,
                              [&dataset, spec, opt] { return fit_model(dataset.summaries, spec, opt); }));
  }
  SelectionReport rep;
  for (auto& j : jobs) rep.results.push_back(j.get());

  auto pick = [&](const char* name, auto get, bool lower_is_better) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rep.results.size(); ++i) {
      const auto v = get(rep.results[i]);
      if (!v) continue;
      if (!best || (lower_is_better ? *v < *get(rep.results[*best]) : *v > *get(rep.results[*best]))) best = i;
    }
    if (best) rep.best_by[name] = rep.results[*best].spec.id;
  };
  pick("r2", [](const FitResult& r) { return r.r2; }, false);
  pick("adj_r2", [](const FitResult& r) { return r.adj_r2; }, false);
  pick("aic", [](const FitResult& r) { return r.aic; }, true);
  pick("bic", [](const FitResult& r) { return r.bic; }, true);
  pick("cv_rmse", [](const FitResult& r) { return r.cv_rmse_ms; }, true);

  double min_aic = std::numeric_limits<double>::infinity();
  double min_bic = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.results) {
    if (r.aic) min_aic = std::min(min_aic, *r.aic);
    if (r.bic) min_bic = std::min(min_bic, *r.bic);
  }
  for (const auto& r : rep.results) {
    const auto da = detail::delta(r.aic, min_aic);
    const auto db = detail::delta(r.bic, min_bic);
    rep.delta_aic.push_back(da);
    rep.delta_bic.push_back(db);
    rep.rejected.push_back(!r.usable() || !da || !db || *da >= kRejectDelta || *db >= kRejectDelta);
  }
  return rep;
}

}  // namespace ffitts
