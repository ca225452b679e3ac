#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "rpf/design.hpp"

using rpf::DesignSpec;
using rpf::NoiseDistribution;
using rpf::Verdict;

namespace {

DesignSpec risk_neutral(NoiseDistribution noise) {
  DesignSpec spec;
  spec.noise = std::move(noise);
  return spec;
}

std::vector<NoiseDistribution> symmetric_unimodal() {
  return {NoiseDistribution::normal(), NoiseDistribution::logistic(1.0), NoiseDistribution::logistic(0.3),
          NoiseDistribution::student_t(1), NoiseDistribution::student_t(3), NoiseDistribution::student_t(10)};
}

}  // namespace

TEST(Design, EffortCurveClosedForms) {
  const auto spec = risk_neutral(NoiseDistribution::normal());
  for (const auto& [k, e] : rpf::effort_curve(spec)) {
    const double f = spec.noise.pdf(spec.noise.quantile(1.0 - k));
    ASSERT_NEAR(e, f / (2.0 * k), 1e-13 * std::max(1.0, e));
  }
  EXPECT_NEAR(rpf::equilibrium_effort(risk_neutral(NoiseDistribution::student_t(1)), 0.25), 1.0 / std::numbers::pi, 1e-14);
}

TEST(Design, NormalEffortDecreasingAboveHalf) {
  auto spec = risk_neutral(NoiseDistribution::normal());
  spec.k_grid = rpf::numeric::linspace(0.5, 0.99, 64);
  const auto curve = rpf::effort_curve(spec);
  for (std::size_t i = 1; i < curve.size(); ++i) ASSERT_LT(curve[i].value, curve[i - 1].value);
}

TEST(Design, OptimalK) {
  const auto normal = rpf::optimal_k(risk_neutral(NoiseDistribution::normal()));
  EXPECT_TRUE(normal.boundary);
  EXPECT_EQ(normal.k, rpf::default_k_grid().front());

  // mpmath: argmax of (1/k) f(F^-1(1-k))
  const auto t3 = rpf::optimal_k(risk_neutral(NoiseDistribution::student_t(3)));
  const auto t1 = rpf::optimal_k(risk_neutral(NoiseDistribution::student_t(1)));
  EXPECT_FALSE(t3.boundary);
  EXPECT_FALSE(t1.boundary);
  EXPECT_NEAR(t3.k, 0.16794631205701372658, 1e-6);
  EXPECT_NEAR(t1.k, 0.37100964820355159041, 1e-6);
  EXPECT_GT(t1.k, t3.k);
  for (const auto& F : symmetric_unimodal()) EXPECT_LE(rpf::optimal_k(risk_neutral(F)).k, 0.5) << F.description();
}

TEST(Design, HazardRatio) {
  EXPECT_NEAR(rpf::hazard_ratio(NoiseDistribution::normal(), 0.0), 2.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(rpf::hazard_ratio(NoiseDistribution::student_t(1), 0.0), 2.0 / std::numbers::pi, 1e-15);
  // hazard maxima at s* = F^-1(1 - k*), mpmath
  EXPECT_NEAR(rpf::hazard_ratio(NoiseDistribution::student_t(1), 0.42897790896417928234), 0.72461135377670847574, 1e-14);
  EXPECT_NEAR(rpf::hazard_ratio(NoiseDistribution::student_t(3), 1.1432719302526982026), 1.0617628621943385747, 1e-14);
}

TEST(Design, HazardValueCurves) {
  EXPECT_NEAR(rpf::figure1_value(NoiseDistribution::student_t(1), 0.25), 2.0 / std::numbers::pi, 1e-12);
  const auto grid = rpf::default_k_grid();
  const auto normal = rpf::figure1_curve(NoiseDistribution::normal(), grid);
  for (std::size_t i = 1; i < normal.size(); ++i) ASSERT_LT(normal[i].value, normal[i - 1].value);
  for (double nu : {1.0, 3.0}) {
    const auto F = NoiseDistribution::student_t(nu);
    const auto curve = rpf::figure1_curve(F, grid);
    const auto top = rpf::figure1_argmax(F, grid);
    EXPECT_FALSE(top.boundary);
    EXPECT_GT(top.value, curve.front().value);
    EXPECT_GT(top.value, curve.back().value);
  }
  EXPECT_NEAR(rpf::figure1_argmax(NoiseDistribution::student_t(1), grid).value, 0.72461135377670847574, 1e-12);
  EXPECT_NEAR(rpf::figure1_argmax(NoiseDistribution::student_t(3), grid).value, 1.0617628621943385747, 1e-12);
}

TEST(Design, DecreasingEffortAboveHalf) {
  const auto grid = rpf::numeric::linspace(0.5, 0.99, 64);
  EXPECT_EQ(rpf::proposition5_check(NoiseDistribution::normal(), grid).verdict, Verdict::pass);
  EXPECT_EQ(rpf::proposition5_check(NoiseDistribution::logistic(1.0), grid).verdict, Verdict::pass);
  const auto logistic = rpf::proposition5_check(NoiseDistribution::logistic(1.0), grid);
  EXPECT_LE(logistic.max_s_fprime, 1e-9);

  const auto asym = NoiseDistribution::tabulated({-1, 0, 2}, {0.2, 0.5, 0.9});
  EXPECT_EQ(rpf::proposition5_check(asym, grid).verdict, Verdict::inapplicable);
  EXPECT_EQ(rpf::proposition5_check(rpf::shift_distribution(NoiseDistribution::normal(), 0.5), grid).verdict,
            Verdict::inapplicable);

  // symmetric but bimodal: equal mixture of N(-2, 1) and N(2, 1)
  std::vector<double> xs, fs;
  for (double x : rpf::numeric::linspace(-9, 9, 721)) {
    xs.push_back(x);
    fs.push_back(0.5 * static_cast<double>(oracle::normal_cdf(x + 2.0L) + oracle::normal_cdf(x - 2.0L)));
  }
  const auto bimodal = NoiseDistribution::tabulated(xs, fs, true);
  ASSERT_TRUE(bimodal.symmetric());
  const auto r = rpf::proposition5_check(bimodal, grid);
  EXPECT_EQ(r.verdict, Verdict::inapplicable);
  EXPECT_GT(r.max_s_fprime, 1e-9);

  EXPECT_THROW(rpf::proposition5_check(NoiseDistribution::normal(), rpf::numeric::linspace(0.3, 0.9, 10)), rpf::DomainError);
}

TEST(Design, RentDissipation) {
  const auto n = NoiseDistribution::normal();
  EXPECT_NEAR(rpf::rent_dissipation_ratio(1.0, 1.0, 0.5, n), 0.079577471545947667884, 1e-15);
  EXPECT_NEAR(rpf::dissipation_threshold(1.0, 0.5, n), 4.0 * std::numbers::pi, 1e-12);
  for (double k : {0.05, 0.3, 0.5, 0.8}) {
    for (double A : {0.5, 1.0, 3.0}) {
      const double vstar = rpf::dissipation_threshold(A, k, n);
      EXPECT_NEAR(rpf::rent_dissipation_ratio(vstar, A, k, n), 1.0, 1e-12);
      EXPECT_LT(rpf::rent_dissipation_ratio(0.9 * vstar, A, k, n), 1.0);
      EXPECT_GT(rpf::rent_dissipation_ratio(1.1 * vstar, A, k, n), 1.0);
      for (double V : {0.1, 1.0, 7.0}) {
        const double r = rpf::rent_dissipation_ratio(V, A, k, n);
        EXPECT_NEAR(r, rpf::rent_dissipation_via_equilibrium(V, A, k, n), 1e-10 * std::max(1.0, r));
        EXPECT_NEAR(rpf::rent_dissipation_ratio(2 * V, A, k, n), 2 * r, 1e-14 * std::max(1.0, r));
      }
    }
  }
}

TEST(DesignProperty, HazardValueIsHazardAtQuantile) {
  for (const auto& F : symmetric_unimodal()) {
    for (double k : rpf::default_k_grid()) {
      const double v = rpf::figure1_value(F, k);
      ASSERT_NEAR(v, rpf::hazard_ratio(F, F.quantile(1.0 - k)), 1e-12 * std::max(1.0, v)) << F.description() << " k=" << k;
    }
  }
}

TEST(DesignProperty, EffortArgmaxMatchesHazardValueArgmax) {
  for (const auto& F : {NoiseDistribution::student_t(1), NoiseDistribution::student_t(3), NoiseDistribution::student_t(2)}) {
    DesignSpec spec = risk_neutral(F);
    spec.B = 3.0;
    spec.cost = rpf::CostFunction::quadratic(2.5);
    EXPECT_NEAR(rpf::optimal_k(spec).k, rpf::figure1_argmax(F, spec.k_grid).k, 1e-6) << F.description();
  }
}

TEST(DesignProperty, DecreasingEffortForBuiltins) {
  const auto grid = rpf::numeric::linspace(0.5, 0.99, 64);
  for (const auto& F : symmetric_unimodal()) EXPECT_EQ(rpf::proposition5_check(F, grid).verdict, Verdict::pass) << F.description();
}
