#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/fitting.hpp"
#include "ffitts/id_models.hpp"
#include "ffitts/ingestion.hpp"
#include "ffitts/report.hpp"
#include "ffitts/sigma_estimation.hpp"
#include "ffitts/simulator.hpp"

namespace ffitts::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Command { Fit, Sigma, Simulate, Datasets };
enum class OutputFormat { Markdown, Csv, Json };

struct RunConfig {
  Command command = Command::Fit;
  std::optional<std::string> dataset;     // embedded name
  std::optional<std::string> input;       // CSV path, "-" for stdin
  std::optional<std::string> calibration; // calibration-task trial CSV (sigma)
  Dimensionality dim = Dimensionality::OneD;
  std::vector<std::string> models = {"all"};
  std::optional<std::string> sigma_a;  // method name or literal mm
  std::string sigma_method = "all";    // sigma: which estimates to report
  AxisMode axis = AxisMode::YAxis;
  double outlier_mm = kDefaultOutlierRadiusMm;
  bool cv = true;
  OutputFormat format = OutputFormat::Markdown;
  std::optional<std::string> out;
  bool color = false;

  SimulatorConfig sim;
  bool seed_given = false;

  void validate() const {
    if (command == Command::Fit || command == Command::Sigma) {
      const int sources = (dataset ? 1 : 0) + (input ? 1 : 0) + (calibration && command == Command::Sigma ? 1 : 0);
      if (command == Command::Fit && (dataset ? 1 : 0) + (input ? 1 : 0) != 1) {
        throw UsageError("exactly one of --dataset or --input is required");
      }
      if (command == Command::Sigma && sources == 0) throw UsageError("no input: give --dataset, --input or --calibration");
      if (dataset && input) throw UsageError("--dataset and --input are mutually exclusive");
    }
    if (!(outlier_mm > 0.0)) throw UsageError("--outlier-mm must be positive");
  }
};

inline std::optional<OutputFormat> parse_format(std::string_view s) {
  if (s == "md" || s == "markdown") return OutputFormat::Markdown;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  return std::nullopt;
}

inline std::optional<AxisMode> parse_axis(std::string_view s) {
  if (s == "x") return AxisMode::XAxis;
  if (s == "y") return AxisMode::YAxis;
  if (s == "bivariate") return AxisMode::Bivariate;
  return std::nullopt;
}

inline std::vector<ModelSpec> parse_models(const std::vector<std::string>& keys, bool have_sigma) {
  std::vector<ModelSpec> out;
  for (const auto& k : keys) {
    if (k == "all") {
      for (ModelId id : kAllModels) {
        // Without a sigma_a source the given-sigma_a model has nothing to fit.
        if (id == ModelId::M7_GivenSigmaA && !have_sigma) continue;
        out.push_back({id});
      }
      continue;
    }
    auto spec = parse_model(k);
    if (!spec) throw UsageError(fmt::format("unknown model '{}' (expected m1..m7 or all)", k));
    if (spec->id == ModelId::M7_GivenSigmaA && !have_sigma) throw UsageError("m7 requires --sigma-a");
    out.push_back(*spec);
  }
  if (out.empty()) throw UsageError("no models selected");
  return out;
}

// Loads the dataset named by --dataset or --input. Trial CSVs are aggregated.
inline Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.dataset) {
    try {
      return embedded(*cfg.dataset);
    } catch (const UnknownDatasetError& e) {
      throw UsageError(e.what());
    }
  }
  std::string text;
  std::string name;
  if (*cfg.input == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
    name = "stdin";
  } else {
    std::ifstream in(*cfg.input);
    if (!in) throw UsageError("cannot open " + *cfg.input);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    name = std::filesystem::path(*cfg.input).stem().string();
  }
  std::istringstream sniff(text);
  const auto kind = detect_csv_kind(sniff);
  if (kind == CsvKind::Unknown) throw UsageError("empty input or unrecognised CSV header in " + *cfg.input);
  std::istringstream in(text);
  std::vector<TrialRecord> trials;
  try {
    if (kind == CsvKind::Aggregate) return parse_aggregate_csv(in, name, cfg.dim);
    trials = parse_trials_csv(in);
  } catch (const DegenerateError& e) {
    throw UsageError(e.what());
  }
  Dataset ds;
  ds.name = name;
  ds.dimensionality = cfg.dim;
  ds.summaries = aggregate(trials, cfg.axis, cfg.outlier_mm);
  ds.validate();
  return ds;
}

// --sigma-a: a positive literal in mm, or a method resolved against the
// dataset's catalog. intercept-fitts falls back to regressing the dataset itself.
inline SigmaEstimate resolve_sigma(const Dataset& ds, const std::string& text) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && p == text.data() + text.size()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("--sigma-a literal must be > 0");
    return {v, SigmaMethod::UserGiven, "command line"};
  }
  const auto method = parse_sigma_method(text);
  if (!method || *method == SigmaMethod::UserGiven) {
    throw UsageError(fmt::format(
        "unknown --sigma-a '{}' (expected calib-ra, calib-acc, intercept-fitts, intercept-random or a value in mm)",
        text));
  }
  if (auto e = ds.catalog_entry(*method)) return *e;
  if (*method == SigmaMethod::InterceptFitts) {
    return estimate_sigma_by_intercept(ds.summaries, SigmaMethod::InterceptFitts, ds.name);
  }
  throw UsageError(fmt::format("dataset '{}' has no {} estimate", ds.name, text));
}

inline std::filesystem::path sibling(const std::filesystem::path& out, const std::string& suffix) {
  auto p = out;
  p.replace_filename(out.stem().string() + suffix);
  return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

inline void emit(const RunConfig& cfg, std::ostream& stdout_stream, const std::string& text) {
  if (cfg.out) {
    write_text(*cfg.out, text);
  } else {
    stdout_stream << text;
  }
}

inline report::FitReport build_fit_report(const RunConfig& cfg) {
  report::FitReport rep;
  rep.dataset = load_dataset(cfg);
  if (cfg.sigma_a) rep.sigma = resolve_sigma(rep.dataset, *cfg.sigma_a);
  const auto models = parse_models(cfg.models, rep.sigma.has_value());
  std::optional<double> sigma_value;
  if (rep.sigma) sigma_value = rep.sigma->sigma_a_mm;
  rep.selection = compare(rep.dataset, models, sigma_value, cfg.cv);

  try {
    rep.intercept = sigma_from_intercept(rep.dataset.summaries);
  } catch (const Error&) {
    // fewer than 3 widths: no regression to show
  }
  std::vector<SigmaEstimate> rows = rep.dataset.sigma_a_catalog;
  if (!rep.dataset.catalog_entry(SigmaMethod::InterceptFitts) && rep.intercept && rep.intercept->intercept_mm2 > 0.0) {
    rows.push_back({rep.intercept->sigma_a_mm(), SigmaMethod::InterceptFitts, rep.dataset.name});
  }
  if (rep.sigma && rep.sigma->method == SigmaMethod::UserGiven) rows.push_back(*rep.sigma);
  for (const auto& s : rows) rep.wf.push_back(report::wf_row(rep.dataset, s));
  return rep;
}

inline int run_fit(const RunConfig& cfg, std::ostream& out) {
  const auto rep = build_fit_report(cfg);
  const report::Style style{cfg.color && !cfg.out};
  std::ostringstream main;
  switch (cfg.format) {
    case OutputFormat::Markdown: report::write_fit_report_markdown(main, rep, style); break;
    case OutputFormat::Csv: report::write_comparison_csv(main, rep.selection); break;
    case OutputFormat::Json: main << report::to_json(rep).dump(2) << '\n'; break;
  }
  emit(cfg, out, main.str());

  if (cfg.out) {
    const std::filesystem::path base(*cfg.out);
    std::ostringstream wf, pts;
    report::write_wf_csv(wf, rep.dataset, rep.wf);
    write_text(sibling(base, "_wf.csv"), wf.str());
    report::write_fit_points_csv(pts, rep.selection);
    write_text(sibling(base, "_fit_points.csv"), pts.str());
    if (rep.intercept) {
      std::ostringstream ip;
      report::write_intercept_points_csv(ip, *rep.intercept);
      write_text(sibling(base, "_intercept_points.csv"), ip.str());
    }
  }
  return kExitOk;
}

struct SigmaRow {
  SigmaEstimate estimate;
  std::string basis;
  std::optional<NormalityResult> normality;
  std::string warning;
};

inline bool wants(const RunConfig& cfg, std::string_view method) {
  return cfg.sigma_method == "all" || cfg.sigma_method == method ||
         (cfg.sigma_method == "intercept" && method == "intercept-fitts");
}

inline int run_sigma(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> known = {"all", "intercept", "intercept-fitts", "intercept-random",
                                                 "calib-ra", "calib-acc"};
  if (std::find(known.begin(), known.end(), cfg.sigma_method) == known.end()) {
    throw UsageError("unknown --method '" + cfg.sigma_method + "'");
  }
  std::vector<SigmaRow> rows;
  std::vector<std::string> notes;

  if (cfg.dataset || cfg.input) {
    const Dataset ds = load_dataset(cfg);
    for (const auto& e : ds.sigma_a_catalog) {
      if (wants(cfg, to_string(e.method))) rows.push_back({e, "published", std::nullopt, ""});
    }
    if (wants(cfg, "intercept-fitts")) {
      SigmaRow r;
      r.basis = fmt::format("sigma_obs^2 vs W^2 over {} conditions", ds.summaries.size());
      r.estimate.method = SigmaMethod::InterceptFitts;
      r.estimate.source_dataset = ds.name;
      try {
        const auto fit = sigma_from_intercept(ds.summaries);
        r.basis += fmt::format(" (slope {:.4f}, intercept {:.4f}, R2 {:.4f})", fit.slope, fit.intercept_mm2, fit.r2);
        r.estimate.sigma_a_mm = fit.sigma_a_mm();
      } catch (const Error& e) {
        r.warning = e.what();
      }
      rows.push_back(r);
    }
    // Per-condition normality on first-tap deviations when raw trials are given.
    if (cfg.input && *cfg.input != "-") {
      std::ifstream sniff_in(*cfg.input);
      if (detect_csv_kind(sniff_in) == CsvKind::Trials) {
        const auto trials = load_trials_csv(*cfg.input);
        std::map<Condition, std::vector<double>> devs;
        for (const auto& t : trials) {
          if (t.is_practice || t.tap_index != 1 || t.distance_to_target() > cfg.outlier_mm) continue;
          devs[t.condition].push_back(cfg.axis == AxisMode::XAxis ? t.dx() : t.dy());
        }
        int pass = 0, tested = 0;
        for (const auto& [c, d] : devs) {
          if (d.size() < 3 || d.size() > 5000) continue;
          try {
            pass += normality_check(d).pass ? 1 : 0;
            ++tested;
          } catch (const DegenerateError&) {
          }
        }
        notes.push_back(fmt::format("normality (Shapiro-Wilk, alpha 0.05): {} of {} conditions pass", pass, tested));
      }
    }
  }

  if (cfg.calibration) {
    std::vector<TrialRecord> taps;
    try {
      taps = load_trials_csv(*cfg.calibration);
    } catch (const std::exception& e) {
      throw UsageError(std::string("calibration input: ") + e.what());
    }
    std::vector<SigmaMethod> methods;
    if (cfg.sigma_method == "calib-acc") {
      methods.push_back(SigmaMethod::CalibAccuracyOnly);
    } else {
      methods.push_back(SigmaMethod::CalibRapidAccurate);
    }
    for (SigmaMethod m : methods) {
      SigmaRow r;
      r.estimate.method = m;
      try {
        const auto cal = sigma_from_calibration_trials(taps, cfg.dim, m,
                                                       std::filesystem::path(*cfg.calibration).stem().string(),
                                                       cfg.outlier_mm);
        r.estimate = cal.estimate;
        int pass = 0, tested = 0;
        for (const auto& p : cal.participants) {
          if (p.normality) {
            ++tested;
            pass += p.normality->pass ? 1 : 0;
          }
        }
        r.basis = fmt::format("mean of {} participant SDs ({} outliers removed); normality: {} of {} pass",
                              cal.participants.size(), cal.outliers_removed, pass, tested);
      } catch (const Error& e) {
        r.warning = e.what();
      }
      rows.push_back(r);
    }
  }

  if (rows.empty()) throw UsageError("no sigma_a estimate could be produced for the given input and --method");
  for (const auto& r : rows) {
    if (!r.warning.empty()) err << "warning: " << to_string(r.estimate.method) << ": " << r.warning << '\n';
  }

  std::ostringstream text;
  switch (cfg.format) {
    case OutputFormat::Markdown:
      text << "| Method | sigma_a (mm) | Source | Basis |\n| --- | ---: | --- | --- |\n";
      for (const auto& r : rows) {
        text << fmt::format("| {} | {} | {} | {} |\n", display_name(r.estimate.method),
                            r.warning.empty() ? report::sig3(r.estimate.sigma_a_mm) : std::string("---"),
                            r.estimate.source_dataset, r.warning.empty() ? r.basis : "warning: " + r.warning);
      }
      for (const auto& n : notes) text << "\n- " << n;
      if (!notes.empty()) text << '\n';
      break;
    case OutputFormat::Csv:
      text << "method,sigma_a_mm,source,basis\n";
      for (const auto& r : rows) {
        text << fmt::format("{},{},{},{}\n", to_string(r.estimate.method),
                            r.warning.empty() ? fmt::format("{}", r.estimate.sigma_a_mm) : std::string(),
                            report::csv_quote(r.estimate.source_dataset),
                            report::csv_quote(r.warning.empty() ? r.basis : "warning: " + r.warning));
      }
      break;
    case OutputFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        arr.push_back({{"method", to_string(r.estimate.method)},
                       {"sigma_a_mm", r.warning.empty() ? nlohmann::json(r.estimate.sigma_a_mm) : nlohmann::json()},
                       {"source", r.estimate.source_dataset},
                       {"basis", r.basis},
                       {"warning", r.warning}});
      }
      text << nlohmann::json{{"estimates", arr}, {"notes", notes}}.dump(2) << '\n';
      break;
    }
  }
  emit(cfg, out, text.str());
  return kExitOk;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out) {
  std::ostringstream text;
  auto meta = simulation_metadata(cfg.sim);
  if (!cfg.seed_given) meta.push_back("seed_source=default");
  for (const auto& m : meta) text << "# " << m << '\n';
  const auto trials = generate(cfg.sim);
  write_trials_csv(text, trials);
  emit(cfg, out, text.str());
  return kExitOk;
}

inline int run_datasets(const RunConfig& cfg, std::ostream& out) {
  const DatasetRegistry registry;
  std::ostringstream text;
  if (cfg.format == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : registry.names()) {
      const auto& ds = registry.get(n);
      nlohmann::json cat = nlohmann::json::object();
      for (const auto& e : ds.sigma_a_catalog) cat[std::string(to_string(e.method))] = e.sigma_a_mm;
      arr.push_back({{"name", n},
                     {"dimensionality", to_string(ds.dimensionality)},
                     {"conditions", ds.summaries.size()},
                     {"sigma_a_catalog", cat}});
    }
    text << arr.dump(2) << '\n';
  } else if (cfg.dataset) {
    // Exports one embedded dataset in the aggregate schema.
    try {
      write_aggregate_csv(text, registry.get(*cfg.dataset));
    } catch (const UnknownDatasetError& e) {
      throw UsageError(e.what());
    }
  } else {
    text << "| Name | Dim | Conditions | sigma_a catalog (mm) |\n| --- | --- | ---: | --- |\n";
    for (const auto& n : registry.names()) {
      const auto& ds = registry.get(n);
      std::string cat;
      for (const auto& e : ds.sigma_a_catalog) {
        cat += fmt::format("{}{} {}", cat.empty() ? "" : ", ", to_string(e.method), report::sig3(e.sigma_a_mm));
      }
      text << fmt::format("| {} | {} | {} | {} |\n", n, to_string(ds.dimensionality), ds.summaries.size(), cat);
    }
  }
  emit(cfg, out, text.str());
  return kExitOk;
}

// Dispatches a parsed configuration and maps failures to exit codes.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    cfg.validate();
    switch (cfg.command) {
      case Command::Fit: return run_fit(cfg, out);
      case Command::Sigma: return run_sigma(cfg, out, err);
      case Command::Simulate: return run_simulate(cfg, out);
      case Command::Datasets: return run_datasets(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ffitts::cli
