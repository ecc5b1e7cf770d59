#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ffitts/datamodel.hpp"
#include "ffitts/fitting.hpp"
#include "ffitts/id_models.hpp"
#include "ffitts/sigma_estimation.hpp"

namespace ffitts::report {

using nlohmann::json;

inline constexpr const char* kErrCell = "!err";

struct Style {
  bool color = false;

  std::string warn(const std::string& s) const { return color ? "\x1b[33m" + s + "\x1b[0m" : s; }
  std::string strong(const std::string& s) const { return color ? "\x1b[1m" + s + "\x1b[0m" : s; }
};

inline std::string opt_fixed(const std::optional<double>& v, int decimals) {
  if (!v) return "---";
  if (std::isinf(*v)) return *v < 0 ? "-inf" : "inf";
  return fmt::format("{:.{}f}", *v, decimals);
}

inline std::string sig3(double v) { return fmt::format("{:#.3g}", v); }

inline std::string opt_sig4(const std::optional<double>& v) {
  if (!v) return "---";
  return fmt::format("{:.4g}", *v);
}

// W_f for every condition under one sigma_a; a cell holds the width or the
// MathError that replaces it.
struct WfRow {
  SigmaEstimate sigma;
  std::vector<MathResult<DerivedWidth>> cells;

  int error_count() const {
    int n = 0;
    for (const auto& c : cells) n += c.ok() ? 0 : 1;
    return n;
  }
};

inline WfRow wf_row(const Dataset& ds, const SigmaEstimate& sigma) {
  WfRow row{sigma, {}};
  for (const auto& s : ds.summaries) row.cells.push_back(finger_width(s.sigma_obs_mm, sigma.sigma_a_mm, s.condition));
  return row;
}

struct FitReport {
  Dataset dataset;
  std::optional<SigmaEstimate> sigma;  // the value used by the given-sigma_a model
  SelectionReport selection;
  std::vector<WfRow> wf;
  std::optional<InterceptFit> intercept;
};

// ---- comparison table ------------------------------------------------------

inline std::vector<std::string> comparison_header() {
  return {"Description", "ID formulation", "R2", "adj. R2", "AIC", "BIC", "RMSE", "a", "b", "c"};
}

inline std::vector<std::string> comparison_cells(const FitResult& r) {
  std::string desc = fmt::format("#{} {}", r.spec.number(), r.spec.description());
  if (r.sigma_a_mm && r.spec.tremor() == TremorTreatment::GivenSigmaA) {
    desc += fmt::format(" (sigma_a = {:.4g} mm)", *r.sigma_a_mm);
  }
  return {desc,
          std::string(r.spec.formula()),
          opt_fixed(r.r2, 4),
          opt_fixed(r.adj_r2, 4),
          opt_fixed(r.aic, 1),
          opt_fixed(r.bic, 1),
          opt_fixed(r.cv_rmse_ms, 2),
          opt_fixed(r.a_ms, 1),
          opt_fixed(r.b_ms_per_bit, 2),
          r.spec.optimizes_c() ? opt_sig4(r.c_mm) : "---"};
}

inline std::string unusable_note(const FitResult& r) { return "unusable: " + r.unusable_reason; }

inline void write_comparison_markdown(std::ostream& out, const SelectionReport& rep, const Style& st = {}) {
  const auto header = comparison_header();
  out << "|";
  for (const auto& h : header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i < 2 ? " --- |" : " ---: |");
  out << '\n';
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    const auto& r = rep.results[i];
    auto cells = comparison_cells(r);
    if (!r.usable()) cells[2] = st.warn(unusable_note(r));
    out << "|";
    for (const auto& c : cells) out << ' ' << c << " |";
    out << '\n';
  }
  out << '\n';
  for (const char* crit : kCriteria) {
    auto it = rep.best_by.find(crit);
    if (it != rep.best_by.end()) out << "- best by " << crit << ": #" << ModelSpec{it->second}.number() << '\n';
  }
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    const auto& r = rep.results[i];
    if (!r.usable()) {
      out << "- #" << r.spec.number() << ' ' << st.warn(unusable_note(r)) << '\n';
    } else if (rep.rejected[i]) {
      out << fmt::format("- #{} rejected (dAIC = {}, dBIC = {})\n", r.spec.number(), opt_fixed(rep.delta_aic[i], 1),
                         opt_fixed(rep.delta_bic[i], 1));
    } else {
      out << fmt::format("- #{} candidate (dAIC = {}, dBIC = {})\n", r.spec.number(), opt_fixed(rep.delta_aic[i], 1),
                         opt_fixed(rep.delta_bic[i], 1));
    }
    if (r.usable() && !r.cv_rmse_ms && !r.cv_note.empty()) {
      out << "  - cross-validation undefined: " << r.cv_note << '\n';
    }
  }
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline void write_comparison_csv(std::ostream& out, const SelectionReport& rep) {
  out << "model,description,id_formulation,r2,adj_r2,aic,bic,cv_rmse_ms,a_ms,b_ms_per_bit,c_mm,delta_aic,delta_bic,"
         "rejected,status\n";
  auto num = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    const auto& r = rep.results[i];
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.spec.key(),
                       csv_quote(std::string(r.spec.description())), csv_quote(std::string(r.spec.formula())),
                       num(r.r2), num(r.adj_r2), num(r.aic), num(r.bic), num(r.cv_rmse_ms), num(r.a_ms),
                       num(r.b_ms_per_bit), num(r.c_mm), num(rep.delta_aic[i]), num(rep.delta_bic[i]),
                       rep.rejected[i] ? 1 : 0, csv_quote(r.usable() ? "ok" : unusable_note(r)));
  }
}

// ---- JSON ------------------------------------------------------------------

namespace detail {

inline json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v < 0 ? "-inf" : "inf";
  return *v;
}

inline std::optional<double> opt_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    return s == "-inf" ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace detail

inline json condition_json(const Condition& c) { return {{"A_mm", c.amplitude_mm}, {"W_mm", c.width_mm}}; }

inline Condition condition_from_json(const json& j) { return {j.at("A_mm").get<double>(), j.at("W_mm").get<double>()}; }

inline json to_json(const FitResult& r) {
  json pc = json::array();
  for (const auto& c : r.per_condition) {
    pc.push_back({{"condition", condition_json(c.condition)},
                  {"width_mm", c.width_mm},
                  {"id_bits", c.id_bits},
                  {"mt_ms", c.mt_ms},
                  {"predicted_mt_ms", c.predicted_mt_ms},
                  {"residual_ms", c.residual_ms}});
  }
  json errs = json::array();
  for (const auto& e : r.math_errors) {
    errs.push_back({{"condition", condition_json(e.condition)}, {"c_mm", e.c_mm}, {"reason", e.reason}});
  }
  return {{"model", r.spec.key()},
          {"description", r.spec.description()},
          {"id_formulation", r.spec.formula()},
          {"a_ms", detail::opt_json(r.a_ms)},
          {"b_ms_per_bit", detail::opt_json(r.b_ms_per_bit)},
          {"c_mm", detail::opt_json(r.c_mm)},
          {"sigma_a_mm", detail::opt_json(r.sigma_a_mm)},
          {"rss", detail::opt_json(r.rss)},
          {"r2", detail::opt_json(r.r2)},
          {"adj_r2", detail::opt_json(r.adj_r2)},
          {"aic", detail::opt_json(r.aic)},
          {"bic", detail::opt_json(r.bic)},
          {"cv_rmse_ms", detail::opt_json(r.cv_rmse_ms)},
          {"cv_note", r.cv_note},
          {"n", r.n},
          {"k", r.k},
          {"per_condition", pc},
          {"math_errors", errs},
          {"unusable_reason", r.unusable_reason}};
}

inline FitResult fit_result_from_json(const json& j) {
  FitResult r;
  const auto spec = parse_model(j.at("model").get<std::string>());
  if (!spec) throw ValidationError("unknown model key in JSON");
  r.spec = *spec;
  r.a_ms = detail::opt_from_json(j.at("a_ms"));
  r.b_ms_per_bit = detail::opt_from_json(j.at("b_ms_per_bit"));
  r.c_mm = detail::opt_from_json(j.at("c_mm"));
  r.sigma_a_mm = detail::opt_from_json(j.at("sigma_a_mm"));
  r.rss = detail::opt_from_json(j.at("rss"));
  r.r2 = detail::opt_from_json(j.at("r2"));
  r.adj_r2 = detail::opt_from_json(j.at("adj_r2"));
  r.aic = detail::opt_from_json(j.at("aic"));
  r.bic = detail::opt_from_json(j.at("bic"));
  r.cv_rmse_ms = detail::opt_from_json(j.at("cv_rmse_ms"));
  r.cv_note = j.at("cv_note").get<std::string>();
  r.n = j.at("n").get<int>();
  r.k = j.at("k").get<int>();
  for (const auto& c : j.at("per_condition")) {
    r.per_condition.push_back({condition_from_json(c.at("condition")), c.at("width_mm").get<double>(),
                               c.at("id_bits").get<double>(), c.at("mt_ms").get<double>(),
                               c.at("predicted_mt_ms").get<double>(), c.at("residual_ms").get<double>()});
  }
  for (const auto& e : j.at("math_errors")) {
    r.math_errors.push_back(
        {condition_from_json(e.at("condition")), e.at("c_mm").get<double>(), e.at("reason").get<std::string>()});
  }
  r.unusable_reason = j.at("unusable_reason").get<std::string>();
  return r;
}

inline json wf_json(const WfRow& row, const Dataset& ds) {
  json cells = json::array();
  for (std::size_t i = 0; i < row.cells.size(); ++i) {
    json cell = {{"condition", condition_json(ds.summaries[i].condition)}};
    if (row.cells[i].ok()) {
      cell["w_f_mm"] = row.cells[i].value().value_mm;
    } else {
      cell["w_f_mm"] = nullptr;
      cell["error"] = row.cells[i].error().reason;
    }
    cells.push_back(cell);
  }
  return {{"method", to_string(row.sigma.method)},
          {"sigma_a_mm", row.sigma.sigma_a_mm},
          {"errors", row.error_count()},
          {"cells", cells}};
}

inline json to_json(const FitReport& rep) {
  json models = json::array();
  for (std::size_t i = 0; i < rep.selection.results.size(); ++i) {
    auto m = to_json(rep.selection.results[i]);
    m["delta_aic"] = detail::opt_json(rep.selection.delta_aic[i]);
    m["delta_bic"] = detail::opt_json(rep.selection.delta_bic[i]);
    m["rejected"] = static_cast<bool>(rep.selection.rejected[i]);
    models.push_back(std::move(m));
  }
  json best = json::object();
  for (const auto& [crit, id] : rep.selection.best_by) best[crit] = ModelSpec{id}.key();
  json wf = json::array();
  for (const auto& row : rep.wf) wf.push_back(wf_json(row, rep.dataset));
  json j = {{"dataset", rep.dataset.name},
            {"dimensionality", to_string(rep.dataset.dimensionality)},
            {"models", models},
            {"best_by", best},
            {"w_f", wf}};
  j["sigma_a"] = rep.sigma ? json{{"method", to_string(rep.sigma->method)}, {"sigma_a_mm", rep.sigma->sigma_a_mm}}
                           : json(nullptr);
  if (rep.intercept) {
    j["intercept_regression"] = {{"slope", rep.intercept->slope},
                                 {"intercept_mm2", rep.intercept->intercept_mm2},
                                 {"r2", rep.intercept->r2}};
  }
  return j;
}

// ---- W_f matrix ------------------------------------------------------------

inline void write_wf_markdown(std::ostream& out, const Dataset& ds, const std::vector<WfRow>& rows,
                              const Style& st = {}) {
  auto line = [&](const std::string& a, const std::string& b, const std::string& label, auto cell) {
    out << "| " << a << " | " << b << " | " << label << " |";
    for (std::size_t i = 0; i < ds.summaries.size(); ++i) out << ' ' << cell(i) << " |";
    out << '\n';
  };
  line("", "", "A", [&](std::size_t i) { return fmt::format("{}", ds.summaries[i].condition.amplitude_mm); });
  out << "| --- | ---: | --- |";
  for (std::size_t i = 0; i < ds.summaries.size(); ++i) out << " ---: |";
  out << '\n';
  line("", "", "W", [&](std::size_t i) { return fmt::format("{}", ds.summaries[i].condition.width_mm); });
  line("", "", "MT", [&](std::size_t i) { return fmt::format("{}", ds.summaries[i].mt_ms); });
  line("", "sigma_a", "sigma_obs", [&](std::size_t i) { return fmt::format("{}", ds.summaries[i].sigma_obs_mm); });
  for (const auto& row : rows) {
    line(std::string(display_name(row.sigma.method)), sig3(row.sigma.sigma_a_mm), "W_f", [&](std::size_t i) {
      return row.cells[i].ok() ? sig3(row.cells[i].value().value_mm) : st.warn(kErrCell);
    });
  }
}

inline void write_wf_csv(std::ostream& out, const Dataset& ds, const std::vector<WfRow>& rows) {
  out << "method,sigma_a_mm";
  for (const auto& s : ds.summaries) out << fmt::format(",A{}_W{}", s.condition.amplitude_mm, s.condition.width_mm);
  out << '\n';
  for (const auto& row : rows) {
    out << to_string(row.sigma.method) << ',' << fmt::format("{}", row.sigma.sigma_a_mm);
    for (const auto& c : row.cells) out << ',' << (c.ok() ? sig3(c.value().value_mm) : std::string(kErrCell));
    out << '\n';
  }
}

// ---- plot data -------------------------------------------------------------

// (ID, MT, predicted MT) per model and condition.
inline void write_fit_points_csv(std::ostream& out, const SelectionReport& rep) {
  out << "model,A_mm,W_mm,width_mm,id_bits,mt_ms,predicted_mt_ms\n";
  for (const auto& r : rep.results) {
    for (const auto& c : r.per_condition) {
      out << fmt::format("{},{},{},{},{},{},{}\n", r.spec.key(), c.condition.amplitude_mm, c.condition.width_mm,
                         c.width_mm, c.id_bits, c.mt_ms, c.predicted_mt_ms);
    }
  }
}

// (W^2, sigma_obs^2) points plus the two endpoints of the fitted line.
inline void write_intercept_points_csv(std::ostream& out, const InterceptFit& fit) {
  out << "kind,w2_mm2,sigma_obs2_mm2\n";
  double lo = 0.0, hi = 0.0;
  for (const auto& [x, y] : fit.points) {
    out << fmt::format("point,{},{}\n", x, y);
    hi = std::max(hi, x);
  }
  out << fmt::format("line,{},{}\n", lo, fit.intercept_mm2 + fit.slope * lo);
  out << fmt::format("line,{},{}\n", hi, fit.intercept_mm2 + fit.slope * hi);
}

inline void write_fit_report_markdown(std::ostream& out, const FitReport& rep, const Style& st = {}) {
  out << "# Model comparison: " << st.strong(rep.dataset.name) << " (" << to_string(rep.dataset.dimensionality)
      << ", n = " << rep.dataset.summaries.size() << " conditions)\n\n";
  if (rep.sigma) {
    out << fmt::format("sigma_a for the given-sigma_a model: {:.4g} mm ({})\n\n", rep.sigma->sigma_a_mm,
                       to_string(rep.sigma->method));
  }
  write_comparison_markdown(out, rep.selection, st);
  out << "\n## W_f per sigma_a method\n\n";
  write_wf_markdown(out, rep.dataset, rep.wf, st);
  for (const auto& row : rep.wf) {
    if (row.error_count() > 0) {
      out << fmt::format("\n- {} ({}): {}", display_name(row.sigma.method), sig3(row.sigma.sigma_a_mm),
                         math_error_note(static_cast<std::size_t>(row.error_count())));
    }
  }
  out << '\n';
  if (rep.intercept) {
    out << fmt::format(
        "\n## sigma_obs^2 vs W^2 regression\n\nsigma_obs^2 = {:.4f} W^2 + {:.4f} (R2 = {:.4f}); sigma_a = {}\n",
        rep.intercept->slope, rep.intercept->intercept_mm2, rep.intercept->r2,
        rep.intercept->intercept_mm2 > 0 ? fmt::format("{:.4f} mm", std::sqrt(rep.intercept->intercept_mm2))
                                         : std::string("undefined (non-positive intercept)"));
  }
}

}  // namespace ffitts::report
