#include <gtest/gtest.h>

#include <cmath>

#include "ffitts/ingestion.hpp"
#include "ffitts/id_models.hpp"
#include "ffitts/random.hpp"

using namespace ffitts;

namespace {

// High-precision references (50-digit arithmetic, rounded to double).
constexpr double kSqrt2PiE = 4.132731354122493;
constexpr double kWe069 = 2.851584634344520;
constexpr double kWe231 = 9.546609428022959;
constexpr double kWf129 = 3.882665366275463;  // sigma_obs 1.29, sigma_a 0.884
constexpr double kIdM1_20_2 = 3.459431618637297;
constexpr double kIdM6_20_2 = 3.517278598591902;  // c = 0.5806

const ModelSpec M1{ModelId::M1_Baseline}, M3{ModelId::M3_We_NoSqrt_c}, M4{ModelId::M4_We_Sqrt_c},
    M5{ModelId::M5_W_NoSqrt_c}, M6{ModelId::M6_W_Sqrt_c}, M7{ModelId::M7_GivenSigmaA};

}  // namespace

TEST(ModelSpec, Taxonomy) {
  EXPECT_EQ(M1.width_source(), WidthKind::Nominal);
  EXPECT_EQ(ModelSpec{ModelId::M2_IDe}.width_source(), WidthKind::Effective);
  EXPECT_EQ(M4.width_source(), WidthKind::Effective);
  EXPECT_EQ(M6.width_source(), WidthKind::Nominal);
  EXPECT_EQ(M7.width_source(), WidthKind::FingerAdjusted);
  EXPECT_EQ(M7.tremor(), TremorTreatment::GivenSigmaA);
  int optimized = 0;
  for (ModelId id : kAllModels) optimized += ModelSpec{id}.optimizes_c() ? 1 : 0;
  EXPECT_EQ(optimized, 4);
  EXPECT_TRUE(M4.sqrt_form());
  EXPECT_FALSE(M5.sqrt_form());
}

TEST(ModelSpec, KeysParse) {
  for (ModelId id : kAllModels) EXPECT_EQ(parse_model(ModelSpec{id}.key())->id, id);
  EXPECT_FALSE(parse_model("m8"));
  EXPECT_EQ(M7.key(), "m7");
}

TEST(EffectiveWidth, Values) {
  EXPECT_DOUBLE_EQ(kEffectiveWidthFactor, kSqrt2PiE);
  EXPECT_NEAR(effective_width(1.0).value_mm, 4.1327, 5e-5);
  EXPECT_NEAR(effective_width(0.69).value_mm, kWe069, 1e-12);
  EXPECT_NEAR(effective_width(2.31).value_mm, kWe231, 1e-12);
  EXPECT_EQ(effective_width(1.0).kind, WidthKind::Effective);
  EXPECT_THROW(effective_width(0.0), ValidationError);
}

TEST(FingerWidth, Values) {
  const auto w = finger_width(1.29, 0.884);
  ASSERT_TRUE(w.ok());
  EXPECT_NEAR(w.value().value_mm, kWf129, 1e-12);
  EXPECT_NEAR(w.value().value_mm, 3.87, 0.05);
}

TEST(FingerWidth, MathErrorIsAValue) {
  const auto w = finger_width(0.69, 0.884, {20, 2});
  ASSERT_FALSE(w.ok());
  EXPECT_EQ(w.error().condition, (Condition{20, 2}));
  EXPECT_THROW(w.value(), Error);
  EXPECT_FALSE(finger_width(1.0, 1.0).ok());  // equality is an error too
}

TEST(FingerWidth, ZeroSigmaAIsEffectiveWidth) {
  NormalGenerator gen(99);
  for (int i = 0; i < 100; ++i) {
    const double s = 0.01 + 10.0 * gen.uniform();
    const double we = effective_width(s).value_mm;
    EXPECT_LE(std::abs(finger_width(s, 0.0).value().value_mm - we), 1e-12 * we);
  }
}

TEST(FingerWidth, Calib1dErrorPattern) {
  const auto ds = embedded("paper-1d");
  std::vector<Condition> errors;
  for (const auto& s : ds.summaries) {
    if (!finger_width(s.sigma_obs_mm, 0.884, s.condition).ok()) errors.push_back(s.condition);
  }
  EXPECT_EQ(errors, (std::vector<Condition>{{20, 2}, {45, 2}}));
}

TEST(ComputeId, ClosedForms) {
  EXPECT_NEAR(compute_id(M1, {20, 2}, 2.0).value(), kIdM1_20_2, 1e-14);
  EXPECT_NEAR(compute_id(M6, {20, 2}, 2.0, 0.5806).value(), kIdM6_20_2, 1e-13);
  EXPECT_NEAR(compute_id(M5, {20, 2}, 2.0, 0.5).value(), std::log2(20.0 / 1.5 + 1.0), 1e-13);
  EXPECT_NEAR(compute_id(M4, {30, 4}, 5.0, 3.0).value(), std::log2(30.0 / 4.0 + 1.0), 1e-13);
}

TEST(ComputeId, ZeroCMatchesBaseline) {
  for (double a : {20.0, 30.0, 45.0, 60.0}) {
    for (double w : {2.0, 4.0, 6.0, 8.0, 10.0}) {
      const double base = compute_id(M1, {a, w}, w).value();
      EXPECT_EQ(compute_id(M5, {a, w}, w, 0.0).value(), base);
      EXPECT_EQ(compute_id(M6, {a, w}, w, 0.0).value(), base);
    }
  }
}

TEST(ComputeId, DomainViolationNamesConditionAndC) {
  const auto r = compute_id(M5, {45, 2}, 2.0, 2.0);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().condition, (Condition{45, 2}));
  EXPECT_EQ(r.error().c_mm, 2.0);
  EXPECT_FALSE(compute_id(M6, {45, 2}, 2.0, 2.5).ok());
  EXPECT_TRUE(compute_id(M6, {45, 2}, 2.0, 1.999).ok());
  EXPECT_THROW(compute_id(M5, {45, 2}, 2.0, -0.1), ValidationError);
}

TEST(ComputeId, GuardedClampsInsteadOfFailing) {
  const double id = compute_id_guarded(M5, {20, 2}, 2.0, 3.0);
  EXPECT_NEAR(id, std::log2(20.0 / 1e-6 + 1.0), 1e-9);
  EXPECT_EQ(compute_id_guarded(M5, {20, 4}, 4.0, 1.0), compute_id(M5, {20, 4}, 4.0, 1.0).value());
}

TEST(IdProperty, MonotoneInWidthAndAmplitude) {
  for (const auto& spec : {M1, M5, M6}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double w = 1.0; w <= 10.0; w += 0.25) {
      const double id = compute_id(spec, {30, w}, w, 0.3).value();
      EXPECT_LT(id, prev);
      prev = id;
    }
    prev = -1.0;
    for (double a = 5.0; a <= 100.0; a += 5.0) {
      const double id = compute_id(spec, {a, 4}, 4.0, 0.3).value();
      EXPECT_GT(id, prev);
      prev = id;
    }
  }
}

TEST(IdProperty, OneBitWhenAmplitudeEqualsWidth) {
  for (ModelId id : kAllModels) {
    for (double w : {0.5, 2.0, 7.25}) EXPECT_DOUBLE_EQ(compute_id({id}, {w, w}, w, 0.0).value(), 1.0);
  }
}

TEST(IdProperty, SqrtFormBelowNoSqrtForm) {
  NormalGenerator gen(4);
  for (int i = 0; i < 200; ++i) {
    const double w = 0.5 + 10.0 * gen.uniform();
    const double c = w * (0.01 + 0.98 * gen.uniform());
    const Condition cond{20 + 40 * gen.uniform(), w};
    EXPECT_LT(compute_id(M6, cond, w, c).value(), compute_id(M5, cond, w, c).value());
    EXPECT_LT(compute_id(M4, cond, w, c).value(), compute_id(M3, cond, w, c).value());
  }
}

TEST(ModelWidth, PicksSourcePerSpec) {
  const ConditionSummary s{{20, 4}, 364, 1.29, 10, 0};
  EXPECT_EQ(model_width(M1, s, std::nullopt).value().value_mm, 4.0);
  EXPECT_NEAR(model_width(M3, s, std::nullopt).value().value_mm, 1.29 * kSqrt2PiE, 1e-12);
  EXPECT_NEAR(model_width(M7, s, 0.884).value().value_mm, kWf129, 1e-12);
  EXPECT_THROW(model_width(M7, s, std::nullopt), ValidationError);
}

TEST(RectTarget, SmallerSide) { EXPECT_EQ(reduce_rect_width(6.0, 4.0), 4.0); }
