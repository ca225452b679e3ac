#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "rpf/equilibrium.hpp"

using rpf::ContestSpec;
using rpf::CostFunction;
using rpf::NoiseDistribution;
using rpf::Utility;

namespace {

ContestSpec quadratic_normal(double k, double V = 1.0, double A = 1.0) {
  return ContestSpec(k, V, CostFunction::quadratic(A), Utility::linear(), NoiseDistribution::normal());
}

}  // namespace

TEST(Equilibrium, CostAndUtilityBasics) {
  const auto c = CostFunction::power(2.0, 3.0);
  EXPECT_DOUBLE_EQ(c.value(2.0), 16.0);
  EXPECT_DOUBLE_EQ(c.marginal(2.0), 24.0);
  EXPECT_DOUBLE_EQ(c.curvature(2.0), 24.0);
  EXPECT_NEAR(c.marginal(c.inverse_marginal(5.0)), 5.0, 1e-13);
  EXPECT_THROW(CostFunction::power(1.0, 1.0), rpf::DomainError);
  EXPECT_THROW(CostFunction::power(0.0, 2.0), rpf::DomainError);

  const auto custom = CostFunction::custom([](double e) { return e * e + e * e * e; },
                                           [](double e) { return 2 * e + 3 * e * e; },
                                           [](double e) { return 2 + 6 * e; }, "e^2+e^3");
  EXPECT_NEAR(custom.marginal(custom.inverse_marginal(0.7)), 0.7, 1e-13);
  // c'(0) = 1 breaks the standard conditions
  EXPECT_THROW(CostFunction::custom([](double e) { return e + e * e; }, [](double e) { return 1 + 2 * e; },
                                    [](double) { return 2.0; }),
               rpf::DomainError);

  EXPECT_DOUBLE_EQ(Utility::linear()(3.0), 3.0);
  EXPECT_DOUBLE_EQ(Utility::power(0.5)(4.0), 2.0);
  EXPECT_THROW(Utility::power(1.5), rpf::DomainError);
  EXPECT_THROW(quadratic_normal(0.3, -1.0), rpf::DomainError);
  EXPECT_DOUBLE_EQ(ContestSpec::from_purse(0.25, 1.0, CostFunction::quadratic(), Utility::linear(), NoiseDistribution::normal()).V, 4.0);
}

TEST(Equilibrium, PayoffExamples) {
  const auto spec = quadratic_normal(0.3);
  for (double ebar : {0.2, 1.0, 3.0}) EXPECT_NEAR(rpf::payoff(spec, ebar, rpf::dirac(ebar)), 0.3 - ebar * ebar, 1e-10);
  EXPECT_NEAR(rpf::payoff(spec, 1.2, rpf::dirac(1.0)), -1.0671825841854265787, 1e-12);
  const long double direct = oracle::normal_sf(oracle::normal_quantile(0.7L) - 0.2L) - 1.44L;
  EXPECT_NEAR(rpf::payoff(spec, 1.2, rpf::dirac(1.0)), static_cast<double>(direct), 1e-12);
  // costs vanish as e -> 0
  const double tiny = rpf::payoff(spec, 1e-9, rpf::dirac(1.0));
  EXPECT_GE(tiny, 0.0);
  EXPECT_NEAR(tiny, rpf::csf_eval(spec.family(), rpf::dirac(1.0), 0.3, 1e-9), 1e-17);
}

TEST(Equilibrium, FocExamples) {
  const auto half = rpf::foc_equilibrium(quadratic_normal(0.5));
  EXPECT_NEAR(half.e_star, 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-15);
  EXPECT_NEAR(half.e_star, 0.19947114020071633897, 1e-15);
  EXPECT_LE(std::abs(half.residual), 1e-10);
  const auto quarter = rpf::foc_equilibrium(quadratic_normal(0.25));
  EXPECT_NEAR(quarter.e_star, 0.15888828634205346699, 1e-14);
  EXPECT_NEAR(quarter.e_star, static_cast<double>(oracle::normal_pdf(oracle::normal_quantile(0.75L)) / 2), 1e-14);
  // u(V) -> 0 sends e* to 0
  EXPECT_LT(rpf::foc_equilibrium(quadratic_normal(0.5, 1e-12)).e_star, 1e-12);

  const ContestSpec t3(0.4, 2.0, CostFunction::power(1.5, 1.7), Utility::power(0.6), NoiseDistribution::student_t(3));
  const auto r = rpf::foc_equilibrium(t3);
  EXPECT_LE(std::abs(r.residual), 1e-10 * r.rhs);
}

TEST(Equilibrium, SocExamples) {
  const auto pass = rpf::soc_check(quadratic_normal(0.3));
  EXPECT_TRUE(pass.pass);
  // c'' = 2, min f' = -phi(1)
  EXPECT_NEAR(pass.margin, 2.0 - static_cast<double>(oracle::normal_pdf(1.0L)), 1e-4);

  const auto fail = rpf::soc_check(quadratic_normal(0.3, 100.0, 0.01));
  EXPECT_FALSE(fail.pass);
  EXPECT_NEAR(fail.s_at, 1.0, 0.01);
  EXPECT_NEAR(fail.margin, 0.02 - 100.0 * static_cast<double>(oracle::normal_pdf(1.0L)), 1e-2);

  const auto mild = CostFunction::custom([](double e) { return e * e + e * e * e; }, [](double e) { return 2 * e + 3 * e * e; },
                                         [](double e) { return 2 + 6 * e; });
  EXPECT_TRUE(rpf::soc_check(ContestSpec(0.3, 1.0, mild, Utility::linear(), NoiseDistribution::normal())).pass);
  EXPECT_FALSE(rpf::soc_check(ContestSpec(0.3, 20.0, mild, Utility::linear(), NoiseDistribution::normal())).pass);
}

TEST(Equilibrium, BestResponseExamples) {
  const auto spec = quadratic_normal(0.25);
  const auto br = rpf::best_response(spec, rpf::dirac(0.1));
  // maximizer of (1 - Phi(0.1 + Phi^-1(0.75) - e)) - e^2, mpmath
  EXPECT_NEAR(br.e, 0.16573283687875911446, 1e-7);
  EXPECT_NEAR(br.payoff, 0.24387541515790060524, 1e-13);
  EXPECT_FALSE(br.boundary);

  const double e_star = rpf::foc_equilibrium(spec).e_star;
  EXPECT_NEAR(rpf::best_response(spec, rpf::dirac(e_star)).e, e_star, 1e-4);

  const auto tiny_prize = rpf::best_response(quadratic_normal(0.25, 1e-30), rpf::dirac(1.0));
  EXPECT_TRUE(tiny_prize.boundary);
  const auto slack = rpf::best_response(spec, rpf::EffortMeasure({{1.0, 0.2}}));
  EXPECT_TRUE(slack.boundary);
  EXPECT_LE(slack.e, rpf::kParticipationFloor);
}

TEST(Equilibrium, VerifyEquilibrium) {
  const auto spec = quadratic_normal(0.5);
  const double e_star = rpf::foc_equilibrium(spec).e_star;
  const auto ok = rpf::verify_equilibrium(spec, e_star);
  EXPECT_TRUE(ok.verified);
  EXPECT_GE(ok.payoff, 0.0);
  EXPECT_FALSE(rpf::verify_equilibrium(spec, e_star + 0.05).verified);
  const auto report = rpf::solve_equilibrium(spec);
  EXPECT_TRUE(report.soc.pass);
  EXPECT_TRUE(report.verdict.verified);
}

TEST(EquilibriumProperty, FocMatchesArgmaxWhenSocPasses) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<NoiseDistribution> noises = {NoiseDistribution::normal(), NoiseDistribution::logistic(1.0),
                                                 NoiseDistribution::student_t(3), NoiseDistribution::student_t(1)};
  int checked = 0;
  for (int i = 0; checked < 100 && i < 1000; ++i) {
    const ContestSpec spec(0.05 + 0.9 * u(rng), 0.2 + 4.8 * u(rng), CostFunction::power(0.2 + 4.8 * u(rng), 1.5 + 0.5 * u(rng)),
                           u(rng) < 0.5 ? Utility::linear() : Utility::power(0.5 + 0.5 * u(rng)), noises[i % noises.size()]);
    if (!rpf::soc_check(spec).pass) continue;
    ++checked;
    const double e_star = rpf::foc_equilibrium(spec).e_star;
    ASSERT_NEAR(rpf::best_response(spec, rpf::dirac(e_star)).e, e_star, 1e-4) << spec.noise.description() << " k=" << spec.k;
  }
  EXPECT_EQ(checked, 100);
}

TEST(EquilibriumProperty, PayoffMaximumOnlyNearEquilibrium) {
  const auto spec = quadratic_normal(0.4, 1.5);
  const double e_star = rpf::foc_equilibrium(spec).e_star;
  const auto p = rpf::dirac(e_star);
  const rpf::BoundCsf w(spec.family(), p, spec.k);
  double best = -1e300, arg = 0.0;
  for (double e : rpf::numeric::linspace(1e-6, 5.0 * e_star, 10000)) {
    const double v = w(e) * spec.V - spec.cost.value(e);
    if (v > best) {
      best = v;
      arg = e;
    }
  }
  EXPECT_LE(std::abs(arg - e_star), 1e-3);
}

TEST(EquilibriumProperty, EffortIncreasesWithPrize) {
  for (double k : {0.1, 0.5, 0.9}) {
    double prev = 0.0;
    for (double V : rpf::numeric::logspace(0.01, 100.0, 50)) {
      const double e = rpf::foc_equilibrium(ContestSpec(k, V, CostFunction::power(1.0, 1.8), Utility::power(0.7),
                                                        NoiseDistribution::logistic(1.0)))
                           .e_star;
      ASSERT_GT(e, prev);
      prev = e;
    }
  }
}
