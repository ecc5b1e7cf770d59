#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include <fmt/format.h>

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"

namespace ffitts {

// sqrt(2*pi*e): ratio of effective width to endpoint SD (~4.133).
inline const double kEffectiveWidthFactor = std::sqrt(2.0 * std::numbers::pi * std::numbers::e);

// Undefined width or ID for one condition. Carried as a value so a batch over
// all conditions can report every failure instead of stopping at the first.
struct MathError {
  Condition condition;
  double c_mm = 0.0;
  std::string reason;

  bool operator==(const MathError&) const = default;
};

template <typename T>
class MathResult {
 public:
  MathResult(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  MathResult(MathError error) : v_(std::move(error)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    if (!ok()) throw Error("math error at " + error().condition.label() + ": " + error().reason);
    return std::get<T>(v_);
  }
  const MathError& error() const { return std::get<MathError>(v_); }

 private:
  std::variant<T, MathError> v_;
};

enum class ModelId { M1_Baseline, M2_IDe, M3_We_NoSqrt_c, M4_We_Sqrt_c, M5_W_NoSqrt_c, M6_W_Sqrt_c, M7_GivenSigmaA };

inline constexpr std::array<ModelId, 7> kAllModels = {ModelId::M1_Baseline,   ModelId::M2_IDe,
                                                      ModelId::M3_We_NoSqrt_c, ModelId::M4_We_Sqrt_c,
                                                      ModelId::M5_W_NoSqrt_c,  ModelId::M6_W_Sqrt_c,
                                                      ModelId::M7_GivenSigmaA};

enum class WidthKind { Nominal, Effective, FingerAdjusted };
enum class TremorTreatment { None, FreeParameter, GivenSigmaA };

struct DerivedWidth {
  double value_mm = 0.0;
  WidthKind kind = WidthKind::Nominal;

  bool operator==(const DerivedWidth&) const = default;
};

struct ModelSpec {
  ModelId id = ModelId::M1_Baseline;

  constexpr WidthKind width_source() const {
    switch (id) {
      case ModelId::M1_Baseline:
      case ModelId::M5_W_NoSqrt_c:
      case ModelId::M6_W_Sqrt_c: return WidthKind::Nominal;
      case ModelId::M2_IDe:
      case ModelId::M3_We_NoSqrt_c:
      case ModelId::M4_We_Sqrt_c: return WidthKind::Effective;
      case ModelId::M7_GivenSigmaA: return WidthKind::FingerAdjusted;
    }
    return WidthKind::Nominal;
  }

  constexpr TremorTreatment tremor() const {
    switch (id) {
      case ModelId::M1_Baseline:
      case ModelId::M2_IDe: return TremorTreatment::None;
      case ModelId::M7_GivenSigmaA: return TremorTreatment::GivenSigmaA;
      default: return TremorTreatment::FreeParameter;
    }
  }

  constexpr bool optimizes_c() const { return tremor() == TremorTreatment::FreeParameter; }
  constexpr bool sqrt_form() const { return id == ModelId::M4_We_Sqrt_c || id == ModelId::M6_W_Sqrt_c; }

  constexpr int number() const { return static_cast<int>(id) + 1; }

  std::string key() const { return "m" + std::to_string(number()); }

  std::string_view description() const {
    switch (id) {
      case ModelId::M1_Baseline: return "Baseline";
      case ModelId::M2_IDe: return "ID_e";
      case ModelId::M3_We_NoSqrt_c: return "Param. Opt. (W_e, no sqrt)";
      case ModelId::M4_We_Sqrt_c: return "Param. Opt. (W_e, sqrt)";
      case ModelId::M5_W_NoSqrt_c: return "Param. Opt. (W, no sqrt)";
      case ModelId::M6_W_Sqrt_c: return "Param. Opt. (W, sqrt)";
      case ModelId::M7_GivenSigmaA: return "Given sigma_a";
    }
    return "?";
  }

  std::string_view formula() const {
    switch (id) {
      case ModelId::M1_Baseline: return "log2(A/W+1)";
      case ModelId::M2_IDe: return "log2(A/W_e+1)";
      case ModelId::M3_We_NoSqrt_c: return "log2(A/(W_e-c)+1)";
      case ModelId::M4_We_Sqrt_c: return "log2(A/sqrt(W_e^2-c^2)+1)";
      case ModelId::M5_W_NoSqrt_c: return "log2(A/(W-c)+1)";
      case ModelId::M6_W_Sqrt_c: return "log2(A/sqrt(W^2-c^2)+1)";
      case ModelId::M7_GivenSigmaA: return "log2(A/sqrt(2*pi*e*(sigma_obs^2-sigma_a^2))+1)";
    }
    return "?";
  }

  bool operator==(const ModelSpec&) const = default;
  auto operator<=>(const ModelSpec&) const = default;
};

inline std::optional<ModelSpec> parse_model(std::string_view key) {
  for (ModelId id : kAllModels) {
    ModelSpec s{id};
    if (key == s.key()) return s;
  }
  return std::nullopt;
}

inline DerivedWidth effective_width(double sigma_obs_mm) {
  if (!(sigma_obs_mm > 0.0)) throw ValidationError("sigma_obs must be positive");
  return {kEffectiveWidthFactor * sigma_obs_mm, WidthKind::Effective};
}

// sqrt(2*pi*e*(sigma_obs^2 - sigma_a^2)); a MathError when sigma_obs <= sigma_a.
// sigma_a = 0 is accepted and reduces to W_e.
inline MathResult<DerivedWidth> finger_width(double sigma_obs_mm, double sigma_a_mm, const Condition& where = {}) {
  if (!(sigma_obs_mm > 0.0)) throw ValidationError("sigma_obs must be positive");
  if (!(sigma_a_mm >= 0.0)) throw ValidationError("sigma_a must be non-negative");
  const double diff = sigma_obs_mm * sigma_obs_mm - sigma_a_mm * sigma_a_mm;
  if (!(diff > 0.0)) {
    return MathError{where, sigma_a_mm,
                     fmt::format("sigma_obs {} <= sigma_a {}: negative value inside the square root", sigma_obs_mm,
                                 sigma_a_mm)};
  }
  return DerivedWidth{std::sqrt(2.0 * std::numbers::pi * std::numbers::e * diff), WidthKind::FingerAdjusted};
}

// Rectangular targets: the smaller side stands in for W in every formulation.
inline double reduce_rect_width(double width_mm, double height_mm) { return std::min(width_mm, height_mm); }

namespace detail {

inline double shannon_id(double amplitude_mm, double width_mm) {
  return std::log(amplitude_mm / width_mm + 1.0) / std::numbers::ln2;
}

}  // namespace detail

// Tremor-adjusted width entering the ID. c = 0 returns the width unchanged.
inline MathResult<double> adjusted_width(const ModelSpec& spec, const Condition& condition, double width_mm,
                                         double c_mm) {
  if (!(c_mm >= 0.0)) throw ValidationError("c must be non-negative");
  if (!spec.optimizes_c() || c_mm == 0.0) return width_mm;
  const double w = spec.sqrt_form() ? width_mm * width_mm - c_mm * c_mm : width_mm - c_mm;
  if (!(w > 0.0)) {
    return MathError{condition, c_mm,
                     fmt::format("width {} does not exceed c = {} mm", width_mm, c_mm)};
  }
  return spec.sqrt_form() ? std::sqrt(w) : w;
}

// Index of difficulty in bits for `condition` with the width already chosen per
// the spec's width source (nominal W, W_e or W_f).
inline MathResult<double> compute_id(const ModelSpec& spec, const Condition& condition, double width_mm,
                                     double c_mm = 0.0) {
  if (!(width_mm > 0.0)) throw ValidationError("width must be positive");
  auto w = adjusted_width(spec, condition, width_mm, c_mm);
  if (!w) return w.error();
  return detail::shannon_id(condition.amplitude_mm, w.value());
}

// Same as compute_id but never fails: a width term that falls below `guard_mm`
// is clamped to it. Used to predict held-out conditions whose width lies
// outside the domain a training fold's c allows.
inline double compute_id_guarded(const ModelSpec& spec, const Condition& condition, double width_mm, double c_mm,
                                 double guard_mm = 1e-6) {
  double w = width_mm;
  if (spec.optimizes_c() && c_mm != 0.0) {
    w = spec.sqrt_form() ? std::sqrt(std::max(width_mm * width_mm - c_mm * c_mm, guard_mm * guard_mm))
                         : std::max(width_mm - c_mm, guard_mm);
  }
  return detail::shannon_id(condition.amplitude_mm, std::max(w, guard_mm));
}

// Width fed into the ID for one summary: nominal W, W_e, or W_f from sigma_a.
inline MathResult<DerivedWidth> model_width(const ModelSpec& spec, const ConditionSummary& s,
                                            std::optional<double> sigma_a_mm) {
  switch (spec.width_source()) {
    case WidthKind::Nominal: return DerivedWidth{s.condition.width_mm, WidthKind::Nominal};
    case WidthKind::Effective: return effective_width(s.sigma_obs_mm);
    case WidthKind::FingerAdjusted:
      if (!sigma_a_mm) throw ValidationError(spec.key() + " needs a sigma_a value");
      return finger_width(s.sigma_obs_mm, *sigma_a_mm, s.condition);
  }
  throw ValidationError("unknown width source");
}

}  // namespace ffitts
