#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "ffitts/fitting.hpp"
#include "ffitts/ingestion.hpp"
#include "ffitts/random.hpp"

using namespace ffitts;

namespace {

const ModelSpec M1{ModelId::M1_Baseline}, M2{ModelId::M2_IDe}, M3{ModelId::M3_We_NoSqrt_c},
    M4{ModelId::M4_We_Sqrt_c}, M5{ModelId::M5_W_NoSqrt_c}, M6{ModelId::M6_W_Sqrt_c}, M7{ModelId::M7_GivenSigmaA};

std::vector<ConditionSummary> on_line(double a, double b, std::function<double(double, double)> id_of) {
  std::vector<ConditionSummary> s;
  for (double amp : {20.0, 30.0, 45.0, 60.0}) {
    for (double w : {2.0, 4.0, 6.0, 8.0, 10.0}) s.push_back({{amp, w}, a + b * id_of(amp, w), 0.2 * w + 0.5, 20, 0});
  }
  return s;
}

std::vector<ModelSpec> all_without_m7() { return {M1, M2, M3, M4, M5, M6}; }

}  // namespace

TEST(Ols, ExactLine) {
  std::vector<IdMtPoint> p;
  for (double id : {1.0, 2.0, 3.5, 4.25}) p.push_back({id, 100.0 + 50.0 * id});
  const auto f = ols_fit(p);
  EXPECT_NEAR(f.a, 100.0, 1e-10);
  EXPECT_NEAR(f.b, 50.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-15);
}

TEST(Ols, ConstantIdIsSingular) {
  const std::vector<IdMtPoint> p = {{2.0, 300}, {2.0, 320}, {2.0, 310}};
  EXPECT_THROW(ols_fit(p), SingularFitError);
}

TEST(Ols, ResidualsOrthogonalToDesign) {
  const auto r = fit_model(embedded("paper-1d").summaries, M1, {});
  double s0 = 0.0, s1 = 0.0, scale = 0.0;
  for (const auto& c : r.per_condition) {
    s0 += c.residual_ms;
    s1 += c.residual_ms * c.id_bits;
    scale += c.mt_ms * c.id_bits;
  }
  EXPECT_LE(std::abs(s0), 1e-9 * scale);
  EXPECT_LE(std::abs(s1), 1e-9 * scale);
}

TEST(FitModel, Baseline1d) {
  const auto r = fit_model(embedded("paper-1d").summaries, M1);
  EXPECT_NEAR(*r.a_ms, 132.7, 1.0);
  EXPECT_NEAR(*r.b_ms_per_bit, 90.03, 0.5);
  EXPECT_NEAR(*r.r2, 0.9813, 0.002);
  EXPECT_EQ(r.k, 2);
  EXPECT_FALSE(r.c_mm);
  EXPECT_EQ(r.per_condition.size(), 20u);
}

TEST(FitModel, Baseline2d) {
  const auto r = fit_model(embedded("paper-2d").summaries, M1);
  EXPECT_NEAR(*r.a_ms, 109.7, 1.0);
  EXPECT_NEAR(*r.b_ms_per_bit, 99.57, 0.5);
  EXPECT_NEAR(*r.r2, 0.9904, 0.002);
}

TEST(FitModel, GivenSigmaA) {
  FitOptions opt;
  opt.sigma_a_mm = 1.163;
  const auto r = fit_model(embedded("paper-2d").summaries, M7, opt);
  ASSERT_TRUE(r.usable());
  EXPECT_NEAR(*r.r2, 0.9340, 0.005);
  EXPECT_EQ(r.sigma_a_mm, 1.163);

  opt.sigma_a_mm = 0.884;
  const auto bad = fit_model(embedded("paper-1d").summaries, M7, opt);
  EXPECT_FALSE(bad.usable());
  EXPECT_EQ(bad.math_errors.size(), 2u);
  EXPECT_FALSE(bad.r2);
  EXPECT_FALSE(bad.aic);
  EXPECT_FALSE(bad.bic);
  EXPECT_EQ(bad.unusable_reason, "mathematical error in 2 conditions");

  EXPECT_FALSE(fit_model(embedded("paper-2d").summaries, M7, {}).usable());
}

TEST(FitModel, FixedZeroCEqualsBaseline) {
  const auto s = embedded("paper-1d").summaries;
  const auto base = fit_model(s, M1);
  FitOptions opt;
  opt.fixed_c_mm = 0.0;
  for (const auto& spec : {M5, M6}) {
    const auto r = fit_model(s, spec, opt);
    EXPECT_EQ(r.k, 2);
    EXPECT_EQ(r.a_ms, base.a_ms);
    EXPECT_EQ(r.b_ms_per_bit, base.b_ms_per_bit);
    EXPECT_EQ(r.aic, base.aic);
    EXPECT_EQ(r.bic, base.bic);
    EXPECT_EQ(r.cv_rmse_ms, base.cv_rmse_ms);
  }
}

TEST(FitModelProperty, ResultInvariants) {
  for (const char* name : {"paper-1d", "paper-2d"}) {
    FitOptions opt;
    opt.sigma_a_mm = 1.163;
    for (ModelId id : kAllModels) {
      const auto r = fit_model(embedded(name).summaries, {id}, opt);
      if (!r.usable()) continue;
      EXPECT_LE(*r.adj_r2, *r.r2);
      EXPECT_EQ(r.k == 3, ModelSpec{id}.optimizes_c());
      EXPECT_NEAR(*r.bic - *r.aic, r.k * (std::log(20.0) - 2.0), 1e-9);
      EXPECT_DOUBLE_EQ(*r.adj_r2, 1.0 - (1.0 - *r.r2) * 19.0 / (20.0 - r.k));
    }
  }
}

TEST(OptimizeC, Published1dSqrt) {
  const auto o = optimize_c(embedded("paper-1d").summaries, M6);
  EXPECT_NEAR(o.c_star_mm, 0.5806, 0.05);
  EXPECT_NEAR(*o.fit.r2, 0.9815, 0.002);
  EXPECT_EQ(o.fit.k, 3);
}

TEST(OptimizeC, Published2dNoSqrt) {
  const auto o = optimize_c(embedded("paper-2d").summaries, M5);
  EXPECT_NEAR(o.c_star_mm, 0.02535, 0.05);
  EXPECT_NEAR(*o.fit.r2, 0.9905, 0.002);
}

TEST(OptimizeC, RecoversGeneratingC) {
  const auto s = on_line(100.0, 90.0, [](double a, double w) { return std::log2(a / std::sqrt(w * w - 0.64) + 1); });
  const auto o = optimize_c(s, M6);
  EXPECT_NEAR(o.c_star_mm, 0.8, 0.01);
  EXPECT_NEAR(*o.fit.r2, 1.0, 1e-9);
}

TEST(OptimizeC, Deterministic) {
  const auto s = embedded("paper-2d").summaries;
  for (const auto& spec : {M3, M4, M5, M6}) EXPECT_EQ(optimize_c(s, spec).c_star_mm, optimize_c(s, spec).c_star_mm);
}

TEST(OptimizeC, TiesGoToSmallerC) {
  // Constant MT: R^2 is the same for every c, so c = 0 must win.
  std::vector<ConditionSummary> s;
  for (double w : {2.0, 4.0, 6.0, 8.0}) s.push_back({{30, w}, 400.0, 1.0, 10, 0});
  EXPECT_EQ(optimize_c(s, M5).c_star_mm, 0.0);
  EXPECT_EQ(optimize_c(s, M6).c_star_mm, 0.0);
}

TEST(OptimizeC, RejectsModelsWithoutC) { EXPECT_THROW(optimize_c(embedded("paper-1d").summaries, M1), ValidationError); }

TEST(OptimizeCProperty, NeverDecreasesR2) {
  NormalGenerator gen(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ConditionSummary> s;
    for (double amp : {20.0, 30.0, 45.0, 60.0}) {
      for (double w : {2.0, 4.0, 6.0, 8.0, 10.0}) {
        s.push_back({{amp, w}, 120 + 90 * std::log2(amp / w + 1) + gen(0, 15), 0.5 + 0.2 * w * gen.uniform(), 20, 0});
      }
    }
    FitOptions o;
    o.cross_validate = false;
    const double r1 = *fit_model(s, M1, o).r2, r2 = *fit_model(s, M2, o).r2;
    EXPECT_GE(*fit_model(s, M5, o).r2, r1);
    EXPECT_GE(*fit_model(s, M6, o).r2, r1);
    EXPECT_GE(*fit_model(s, M3, o).r2, r2);
    EXPECT_GE(*fit_model(s, M4, o).r2, r2);
  }
}

TEST(InformationCriteria, GapIdentity) {
  const auto k2 = information_criteria(1234.5, 20, 2);
  const auto k3 = information_criteria(1234.5, 20, 3);
  EXPECT_NEAR(k2.bic - k2.aic, 1.991464547107982, 1e-12);
  EXPECT_NEAR(k3.bic - k3.aic, 2.987196820661973, 1e-12);
}

TEST(InformationCriteria, Published1dBaseline) {
  EXPECT_NEAR(*fit_model(embedded("paper-1d").summaries, M1).aic, 156.6, 1.5);
}

TEST(InformationCriteria, ScalingRssByESquaredAdds2n) {
  const double rss = 987.0;
  const auto a = information_criteria(rss, 20, 2);
  const auto b = information_criteria(rss * std::exp(2.0), 20, 2);
  EXPECT_NEAR(b.aic - a.aic, 40.0, 1e-10);
  EXPECT_NEAR(b.bic - a.bic, 40.0, 1e-10);
}

TEST(InformationCriteria, PerfectFitAndDomain) {
  const auto p = information_criteria(0.0, 20, 2);
  EXPECT_TRUE(p.perfect_fit);
  EXPECT_TRUE(std::isinf(p.aic) && p.aic < 0);
  EXPECT_THROW(information_criteria(1.0, 3, 3), ValidationError);
  EXPECT_THROW(information_criteria(-1.0, 20, 2), ValidationError);
}

TEST(InformationCriteria, RankingIgnoresAdditiveConstant) {
  const auto sel = compare(embedded("paper-1d"), all_without_m7(), std::nullopt, false);
  for (std::size_t i = 0; i < sel.results.size(); ++i) {
    for (std::size_t j = 0; j < sel.results.size(); ++j) {
      const auto& a = sel.results[i];
      const auto& b = sel.results[j];
      const double ca = 20 * std::log(*a.rss) + 2 * a.k, cb = 20 * std::log(*b.rss) + 2 * b.k;
      EXPECT_EQ(*a.aic < *b.aic, ca < cb);
    }
  }
}

TEST(Loocv, Published1dBaseline) {
  const auto cv = loocv_rmse(embedded("paper-1d").summaries, M1);
  EXPECT_NEAR(*cv.rmse_ms, 13.30, 0.5);
  EXPECT_EQ(cv.residuals_ms.size(), 20u);
}

TEST(Loocv, Ordering2dNoSqrtAboveSqrt) {
  const auto d = embedded("paper-2d").summaries;
  EXPECT_GT(*loocv_rmse(d, M5).rmse_ms, *loocv_rmse(d, M6).rmse_ms);
}

TEST(Loocv, ExactLineIsZero) {
  const auto s = on_line(100.0, 80.0, [](double a, double w) { return std::log2(a / w + 1); });
  EXPECT_NEAR(*loocv_rmse(s, M1).rmse_ms, 0.0, 1e-9);
}

TEST(Loocv, UndefinedOnMathError) {
  FitOptions opt;
  opt.sigma_a_mm = 0.884;
  const auto cv = loocv_rmse(embedded("paper-1d").summaries, M7, opt);
  EXPECT_FALSE(cv.rmse_ms);
  EXPECT_FALSE(cv.undefined_reason.empty());
  const std::vector<ConditionSummary> three = {{{20, 2}, 400, 1}, {{20, 4}, 350, 1}, {{20, 6}, 320, 1}};
  EXPECT_THROW(loocv_rmse(three, M1), ValidationError);
}

TEST(Compare, Paper1dWithCatalogSigma) {
  const auto ds = embedded("paper-1d");
  std::vector<ModelSpec> all(kAllModels.begin(), kAllModels.end());
  for (SigmaMethod m : kCatalogMethods) {
    const auto sel = compare(ds, all, ds.catalog_entry(m)->sigma_a_mm);
    EXPECT_FALSE(sel.find(ModelId::M7_GivenSigmaA)->usable());
    EXPECT_TRUE(sel.is_rejected(ModelId::M7_GivenSigmaA));
    EXPECT_EQ(sel.best_by.at("adj_r2"), ModelId::M1_Baseline);
  }
}

TEST(Compare, Paper2dGivenSigma) {
  const std::vector<ModelSpec> all(kAllModels.begin(), kAllModels.end());
  const auto sel = compare(embedded("paper-2d"), all, 1.163);
  const auto* m7 = sel.find(ModelId::M7_GivenSigmaA);
  ASSERT_TRUE(m7->usable());
  EXPECT_NEAR(*m7->r2, 0.9340, 0.005);
  EXPECT_EQ(sel.results.size(), 7u);
  for (const char* c : kCriteria) EXPECT_TRUE(sel.best_by.contains(c)) << c;
}

TEST(Compare, SingleModel) {
  const std::vector<ModelSpec> one = {M2};
  const auto sel = compare(embedded("paper-1d"), one, std::nullopt);
  ASSERT_EQ(sel.results.size(), 1u);
  EXPECT_EQ(*sel.delta_aic[0], 0.0);
  EXPECT_EQ(*sel.delta_bic[0], 0.0);
  EXPECT_FALSE(sel.rejected[0]);
}

TEST(Compare, DeltasAndRejection) {
  const auto sel = compare(embedded("paper-1d"), all_without_m7(), std::nullopt);
  for (std::size_t i = 0; i < sel.results.size(); ++i) {
    EXPECT_GE(*sel.delta_aic[i], 0.0);
    EXPECT_GE(*sel.delta_bic[i], 0.0);
    EXPECT_EQ(sel.rejected[i], *sel.delta_aic[i] >= 10.0 || *sel.delta_bic[i] >= 10.0);
  }
  EXPECT_TRUE(sel.is_rejected(ModelId::M2_IDe));
  EXPECT_FALSE(sel.is_rejected(ModelId::M6_W_Sqrt_c));
}

TEST(Compare, OrderedByModelIdRegardlessOfRequestOrder) {
  const std::vector<ModelSpec> shuffled = {M6, M1, M4, M2, M1, M5, M3};
  const auto sel = compare(embedded("paper-2d"), shuffled, std::nullopt, false);
  ASSERT_EQ(sel.results.size(), 6u);
  for (std::size_t i = 0; i < sel.results.size(); ++i) EXPECT_EQ(sel.results[i].spec.number(), static_cast<int>(i) + 1);
}
