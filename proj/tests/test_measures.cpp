#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rpf/measures.hpp"

using rpf::Atom;
using rpf::EffortMeasure;

namespace {

EffortMeasure random_measure(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> eff(0.1, 10.0), w(0.05, 1.0);
  std::vector<Atom> atoms;
  const int n = 1 + static_cast<int>(rng() % 4);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({eff(rng), w(rng)});
    total += atoms.back().mass;
  }
  const double target = 0.3 + 0.5 * w(rng);
  for (auto& a : atoms) a.mass *= target / total;
  std::vector<rpf::DensitySegment> segs;
  if (rng() % 2) {
    const double lo = eff(rng);
    segs.push_back({rpf::numeric::linspace(lo, lo + 1.0, 33), std::vector<double>(33, 0.15)});
  }
  return EffortMeasure(atoms, segs);
}

}  // namespace

TEST(Measures, Dirac) {
  const auto d = rpf::dirac(1.0);
  ASSERT_EQ(d.atoms().size(), 1u);
  EXPECT_EQ(d.atoms()[0], (Atom{1.0, 1.0}));
  EXPECT_DOUBLE_EQ(rpf::dirac(2.5).total_mass(), 1.0);
  EXPECT_THROW(rpf::dirac(0.0), rpf::DomainError);
  EXPECT_THROW(rpf::dirac(-1.0), rpf::DomainError);
}

TEST(Measures, TotalMass) {
  EXPECT_DOUBLE_EQ(rpf::total_mass(rpf::dirac(1.0)), 1.0);
  EXPECT_NEAR(EffortMeasure({{1.0, 0.5}, {2.0, 0.3}}).total_mass(), 0.8, 1e-15);
  EXPECT_NEAR(EffortMeasure::uniform(1.0, 2.0, 0.6).total_mass(), 0.6, 1e-13);
  EXPECT_THROW(EffortMeasure({{1.0, 0.7}, {2.0, 0.7}}), rpf::DomainError);
}

TEST(Measures, Integrate) {
  auto id = [](double e) { return e; };
  EXPECT_DOUBLE_EQ(rpf::integrate(rpf::dirac(2.0), id), 2.0);
  EXPECT_DOUBLE_EQ(rpf::integrate(EffortMeasure({{1.0, 0.5}, {3.0, 0.5}}), id), 2.0);
  // Grid starts just inside E = (0, inf); closed form 1/3 on [0, 1].
  const auto u = EffortMeasure::uniform(1e-9, 1.0, 1.0, 10000);
  EXPECT_NEAR(u.integrate([](double e) { return e * e; }), 1.0 / 3.0, 1e-6);
}

TEST(Measures, AtomsMergeAndCanonicalOrder) {
  const EffortMeasure p({{2.0, 0.1}, {1.0, 0.2}, {2.0, 0.3}, {4.0, 0.0}});
  ASSERT_EQ(p.atoms().size(), 2u);
  EXPECT_EQ(p.atoms()[0].effort, 1.0);
  EXPECT_NEAR(p.atoms()[1].mass, 0.4, 1e-15);
}

TEST(Measures, MixExamples) {
  const auto p = EffortMeasure({{1.0, 0.4}, {5.0, 0.6}});
  const auto q = EffortMeasure({{2.0, 0.8}});
  EXPECT_EQ(rpf::mix(1.0, p, q), p);
  const auto m = rpf::mix(0.5, rpf::dirac(1.0), rpf::dirac(3.0));
  ASSERT_EQ(m.atoms().size(), 2u);
  EXPECT_EQ(m.atoms()[0], (Atom{1.0, 0.5}));
  EXPECT_EQ(m.atoms()[1], (Atom{3.0, 0.5}));
  EXPECT_NEAR(rpf::mix(0.25, p, q).total_mass(), 0.85, 1e-15);
  EXPECT_THROW(rpf::mix(1.5, p, q), rpf::DomainError);
}

TEST(Measures, RightShiftExamples) {
  EXPECT_EQ(rpf::right_shift(rpf::dirac(1.0), 2.0), rpf::dirac(3.0));
  EXPECT_EQ(rpf::right_shift(EffortMeasure({{1.0, 0.5}, {2.0, 0.5}}), 1.0), EffortMeasure({{2.0, 0.5}, {3.0, 0.5}}));
  EXPECT_THROW(rpf::right_shift(rpf::dirac(1.0), 0.0), rpf::DomainError);
  const auto u = EffortMeasure::uniform(1.0, 2.0, 0.6);
  EXPECT_NEAR(rpf::right_shift(u, 3.5).total_mass(), u.total_mass(), 1e-12);
}

TEST(Measures, Discretized) {
  const EffortMeasure p({{0.5, 0.2}}, {{rpf::numeric::linspace(1.0, 2.0, 101), std::vector<double>(101, 0.5)}});
  const auto d = p.discretized();
  EXPECT_TRUE(d.is_atomic());
  auto g = [](double e) { return std::sin(e) + e * e; };
  EXPECT_NEAR(d.integrate(g), p.integrate(g), 1e-13);
}

TEST(MeasuresProperty, IntegrateIsLinearInMixing) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto g = [](double e) { return std::log(e) + 1.0 / (1.0 + e); };
  for (int i = 0; i < 500; ++i) {
    const auto p = random_measure(rng);
    const auto q = random_measure(rng);
    const double a = u(rng);
    const double lhs = rpf::mix(a, p, q).integrate(g);
    const double rhs = a * p.integrate(g) + (1 - a) * q.integrate(g);
    ASSERT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(MeasuresProperty, ShiftIsChangeOfVariables) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  auto g = [](double e) { return std::exp(-0.3 * e) * e; };
  for (int i = 0; i < 500; ++i) {
    const auto p = random_measure(rng);
    const double a = u(rng);
    ASSERT_NEAR(rpf::right_shift(p, a).integrate(g), p.integrate([&](double e) { return g(e + a); }), 1e-12);
  }
}

TEST(MeasuresProperty, MixAndShiftCommute) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_measure(rng);
    const auto q = random_measure(rng);
    const double a = u(rng), s = 0.01 + 3 * u(rng);
    const auto lhs = rpf::right_shift(rpf::mix(a, p, q), s);
    const auto rhs = rpf::mix(a, rpf::right_shift(p, s), rpf::right_shift(q, s));
    ASSERT_EQ(lhs.atoms().size(), rhs.atoms().size());
    for (std::size_t j = 0; j < lhs.atoms().size(); ++j) {
      ASSERT_NEAR(lhs.atoms()[j].effort, rhs.atoms()[j].effort, 1e-12);
      ASSERT_NEAR(lhs.atoms()[j].mass, rhs.atoms()[j].mass, 1e-15);
    }
    ASSERT_NEAR(lhs.total_mass(), rhs.total_mass(), 1e-14);
  }
}
