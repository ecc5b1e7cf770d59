#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"

namespace ffitts {

inline constexpr std::array<std::string_view, 12> kTrialColumns = {
    "participant", "block",      "trial", "A_mm",  "W_mm",      "target_x_mm",
    "target_y_mm", "touch_x_mm", "touch_y_mm", "mt_ms", "tap_index", "is_practice"};

inline constexpr std::array<std::string_view, 4> kAggregateColumns = {"A_mm", "W_mm", "mt_ms", "sigma_obs_mm"};

namespace csv {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(std::string_view field, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [p, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ParseError(row, fmt::format("column {}: '{}' is not a number", column, field));
  }
  return v;
}

inline int to_int(std::string_view field, std::size_t row, std::string_view column) {
  int v = 0;
  const auto* end = field.data() + field.size();
  auto [p, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || p != end) {
    throw ParseError(row, fmt::format("column {}: '{}' is not an integer", column, field));
  }
  return v;
}

inline bool to_bool(std::string_view field, std::size_t row, std::string_view column) {
  if (field == "1" || field == "true" || field == "TRUE" || field == "True") return true;
  if (field == "0" || field == "false" || field == "FALSE" || field == "False") return false;
  throw ParseError(row, fmt::format("column {}: '{}' is not a boolean", column, field));
}

// Physical line reader skipping blank lines and '#' metadata lines.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      return true;
    }
    return false;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace csv

// Parses the trial schema. Rows are numbered by physical line (header = 1).
inline std::vector<TrialRecord> parse_trials_csv(std::istream& in) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(1, "missing header");
  const auto header = csv::split(line);
  if (header.size() != kTrialColumns.size()) {
    throw ParseError(reader.line_no(), fmt::format("expected {} columns in header, found {}", kTrialColumns.size(),
                                                   header.size()));
  }
  for (std::size_t i = 0; i < kTrialColumns.size(); ++i) {
    if (header[i] != kTrialColumns[i]) {
      throw ParseError(reader.line_no(),
                       fmt::format("missing column {} (found '{}' at position {})", kTrialColumns[i], header[i], i + 1));
    }
  }

  std::vector<TrialRecord> out;
  while (reader.next(line)) {
    const std::size_t row = reader.line_no();
    const auto f = csv::split(line);
    if (f.size() != kTrialColumns.size()) {
      throw ParseError(row, fmt::format("expected {} fields, found {}", kTrialColumns.size(), f.size()));
    }
    TrialRecord t;
    t.participant_id = std::string(f[0]);
    t.block = csv::to_int(f[1], row, kTrialColumns[1]);
    t.trial = csv::to_int(f[2], row, kTrialColumns[2]);
    t.condition.amplitude_mm = csv::to_double(f[3], row, kTrialColumns[3]);
    t.condition.width_mm = csv::to_double(f[4], row, kTrialColumns[4]);
    t.target_x_mm = csv::to_double(f[5], row, kTrialColumns[5]);
    t.target_y_mm = csv::to_double(f[6], row, kTrialColumns[6]);
    t.touch_x_mm = csv::to_double(f[7], row, kTrialColumns[7]);
    t.touch_y_mm = csv::to_double(f[8], row, kTrialColumns[8]);
    t.mt_ms = csv::to_double(f[9], row, kTrialColumns[9]);
    t.tap_index = csv::to_int(f[10], row, kTrialColumns[10]);
    t.is_practice = csv::to_bool(f[11], row, kTrialColumns[11]);
    if (t.mt_ms < 0.0) throw ParseError(row, "negative mt_ms");
    if (t.tap_index < 1) throw ParseError(row, "tap_index must be >= 1");
    if (!(t.condition.amplitude_mm > 0.0) || !(t.condition.width_mm > 0.0)) {
      throw ParseError(row, "A_mm and W_mm must be positive");
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) throw DegenerateError("empty dataset: no trial rows after the header");
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

inline std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_trials_csv(in);
}

inline void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  for (std::size_t i = 0; i < kTrialColumns.size(); ++i) out << (i ? "," : "") << kTrialColumns[i];
  out << '\n';
  for (const auto& t : trials) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", t.participant_id, t.block, t.trial,
                       t.condition.amplitude_mm, t.condition.width_mm, t.target_x_mm, t.target_y_mm, t.touch_x_mm,
                       t.touch_y_mm, t.mt_ms, t.tap_index, t.is_practice ? 1 : 0);
  }
}

// Aggregate schema. The four required columns may be followed by the optional
// n_trials and error_rate columns; absent ones default to 2 and 0.
inline Dataset parse_aggregate_csv(std::istream& in, std::string name,
                                   Dimensionality dim = Dimensionality::OneD) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(1, "missing header");
  const auto header = csv::split(line);
  const std::size_t width = header.size();
  std::map<std::string, std::size_t, std::less<>> col;  // owns names: `line` is reused below
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
  for (auto required : kAggregateColumns) {
    if (!col.contains(required)) throw ParseError(reader.line_no(), fmt::format("missing column {}", required));
  }
  const bool has_n = col.contains("n_trials");
  const bool has_err = col.contains("error_rate");

  Dataset ds;
  ds.name = std::move(name);
  ds.dimensionality = dim;
  while (reader.next(line)) {
    const std::size_t row = reader.line_no();
    const auto f = csv::split(line);
    if (f.size() != width) throw ParseError(row, fmt::format("expected {} fields, found {}", width, f.size()));
    ConditionSummary s;
    s.condition.amplitude_mm = csv::to_double(f[col.find("A_mm")->second], row, "A_mm");
    s.condition.width_mm = csv::to_double(f[col.find("W_mm")->second], row, "W_mm");
    s.mt_ms = csv::to_double(f[col.find("mt_ms")->second], row, "mt_ms");
    s.sigma_obs_mm = csv::to_double(f[col.find("sigma_obs_mm")->second], row, "sigma_obs_mm");
    if (has_n) s.n_trials = csv::to_int(f[col.find("n_trials")->second], row, "n_trials");
    if (has_err) s.error_rate = csv::to_double(f[col.find("error_rate")->second], row, "error_rate");
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("row {}: {}", row, e.what()));
    }
    ds.summaries.push_back(s);
  }
  if (ds.summaries.empty()) throw DegenerateError("empty dataset: no condition rows after the header");
  ds.validate();
  return ds;
}

inline Dataset load_aggregate_csv(const std::filesystem::path& path, Dimensionality dim = Dimensionality::OneD) {
  auto in = open_input(path);
  return parse_aggregate_csv(in, path.stem().string(), dim);
}

inline void write_aggregate_csv(std::ostream& out, const Dataset& ds) {
  out << "A_mm,W_mm,mt_ms,sigma_obs_mm,n_trials,error_rate\n";
  for (const auto& s : ds.summaries) {
    out << fmt::format("{},{},{},{},{},{}\n", s.condition.amplitude_mm, s.condition.width_mm, s.mt_ms, s.sigma_obs_mm,
                       s.n_trials, s.error_rate);
  }
}

enum class CsvKind { Trials, Aggregate, Unknown };

// Sniffs the first non-comment line.
inline CsvKind detect_csv_kind(std::istream& in) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) return CsvKind::Unknown;
  const auto header = csv::split(line);
  if (!header.empty() && header[0] == kTrialColumns[0]) return CsvKind::Trials;
  for (auto h : header) {
    if (h == "sigma_obs_mm") return CsvKind::Aggregate;
  }
  return CsvKind::Unknown;
}

namespace detail {

inline Dataset make_embedded(std::string name, Dimensionality dim, const std::array<double, 20>& mt,
                             const std::array<double, 20>& sigma_obs, const std::array<double, 4>& sigma_a) {
  constexpr std::array<double, 4> amplitudes = {20, 30, 45, 60};
  constexpr std::array<double, 5> widths = {2, 4, 6, 8, 10};
  Dataset ds;
  ds.name = name;
  ds.dimensionality = dim;
  for (std::size_t ai = 0; ai < amplitudes.size(); ++ai) {
    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
      const std::size_t i = ai * widths.size() + wi;
      // 12 participants x 16 repetitions; per-condition outlier counts and
      // error rates are not published, so n_trials is nominal and errors 0.
      ds.summaries.push_back({{amplitudes[ai], widths[wi]}, mt[i], sigma_obs[i], 192, 0.0});
    }
  }
  for (std::size_t m = 0; m < sigma_a.size(); ++m) {
    ds.sigma_a_catalog.push_back({sigma_a[m], kCatalogMethods[m], name});
  }
  return ds;
}

}  // namespace detail

// Published 1D/2D touch-pointing measurements (MT in ms, sigma_obs in mm at
// printed precision). The tremor catalog keeps the unrounded values behind
// the printed ones (0.8837 is shown as 0.884, sqrt(1.7593) as 1.33, ...);
// the rounded figures do not reproduce the published W_f cells.
inline Dataset embedded_paper_1d() {
  return detail::make_embedded(
      "paper-1d", Dimensionality::OneD,
      {444, 364, 328, 305, 298, 489, 400, 353, 327, 315, 529, 459, 400, 369, 347, 602, 511, 436, 407, 393},
      {0.69, 1.29, 2.16, 2.66, 2.24, 0.899, 1.28, 1.31, 2.36, 2.33, 0.757, 1.16, 1.56, 2.39, 2.83, 0.942, 1.34, 2.13,
       2.44, 3.16},
      {0.8837, 0.7362, std::sqrt(0.9543), std::sqrt(1.0123)});
}

inline Dataset embedded_paper_2d() {
  return detail::make_embedded(
      "paper-2d", Dimensionality::TwoD,
      {440, 373, 322, 294, 278, 506, 410, 361, 345, 314, 560, 476, 413, 368, 354, 622, 517, 446, 407, 385},
      {1.31, 1.51, 1.71, 1.88, 1.99, 1.25, 1.33, 1.73, 2.03, 1.88, 1.34, 1.51, 1.68, 2.01, 2.25, 1.32, 1.49, 1.82,
       2.12, 2.31},
      {1.372, 1.163, std::sqrt(1.7593), std::sqrt(1.6155)});
}

class DatasetRegistry {
 public:
  DatasetRegistry() {
    add(embedded_paper_1d());
    add(embedded_paper_2d());
  }

  void add(Dataset ds) {
    ds.validate();
    auto name = ds.name;
    entries_.insert_or_assign(std::move(name), std::move(ds));
  }

  const Dataset& get(std::string_view name) const {
    auto it = entries_.find(std::string(name));
    if (it == entries_.end()) {
      std::string known;
      for (const auto& [n, _] : entries_) known += (known.empty() ? "" : ", ") + n;
      throw UnknownDatasetError(fmt::format("unknown dataset '{}' (available: {})", name, known));
    }
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : entries_) out.push_back(n);
    return out;
  }

 private:
  std::map<std::string, Dataset> entries_;
};

inline Dataset embedded(std::string_view name) {
  static const DatasetRegistry registry;
  return registry.get(name);
}

}  // namespace ffitts
