#include <cmath>

#include <gtest/gtest.h>

#include "pvmrigid/escort_markov.hpp"
#include "test_oracles.hpp"

using namespace pvmrigid;

TEST(Normalization, IdentityPassesEverywhere) {
  const std::vector<std::size_t> dims{3, 4, 5};
  const auto r = normalization_scan(generators::identity(), dims);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_abs_residual, 1e-12);
  EXPECT_NEAR(r.details["vertex_f0"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(r.details["vertex_f1"].get<double>(), 1.0, 1e-12);
}

TEST(Normalization, SquareFailsAtBarycenter) {
  const std::vector<std::size_t> dims{3};
  const auto r = normalization_scan(generators::power(2.0), dims);
  EXPECT_FALSE(r.pass);
  // 3 * (1/9) - 1
  EXPECT_NEAR(r.residual_at_argmax, -2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.details["per_dim"][0]["barycenter_residual"].get<double>(), -2.0 / 3.0, 1e-12);
  ASSERT_TRUE(r.witness);
  const auto [lhs, rhs] = replay(*r.witness, generators::power(2.0));
  EXPECT_DOUBLE_EQ(lhs, r.witness->lhs);
  EXPECT_DOUBLE_EQ(rhs, 1.0);
}

TEST(Normalization, VertexComparisonRecoversFZero) {
  const std::vector<std::size_t> dims{3, 4};
  // f(0) = 0.1 breaks the vertex identities: f(1) + 2 f(0) vs f(1) + 3 f(0)
  const EscortGenerator shifted{[](double t) { return 0.1 + 0.8 * t; }, "affine", {}};
  const auto r = normalization_scan(shifted, dims);
  EXPECT_NEAR(r.details["vertex_f0"].get<double>(), 0.1, 1e-12);
  EXPECT_FALSE(r.pass);
}

TEST(Normalization, GridCountsAndDomain) {
  const std::vector<std::size_t> dims{3};
  const auto r = normalization_scan(generators::identity(), dims, 4);
  // compositions of 4 into 3 parts plus the barycenter
  EXPECT_EQ(r.details["per_dim"][0]["points"], 15 + 1);
  const std::vector<std::size_t> bad{2};
  EXPECT_THROW(normalization_scan(generators::identity(), bad), DomainError);
  EXPECT_THROW(normalization_scan(generators::identity(), std::vector<std::size_t>{}), DomainError);
}

TEST(Cauchy, ResidualValues) {
  EXPECT_NEAR(cauchy_additivity_residual(generators::linear(3.0), 0.2, 0.45), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(cauchy_additivity_residual(generators::power(2.0), 0.25, 0.25), 0.125);
  EXPECT_EQ(cauchy_additivity_residual(generators::identity(), 0.3, 0.7), 0.0);
  EXPECT_THROW(cauchy_additivity_residual(generators::identity(), 0.6, 0.6), DomainError);
  EXPECT_THROW(cauchy_additivity_residual(generators::identity(), -0.1, 0.2), DomainError);
}

TEST(Cauchy, ScanSeparatesLinearFromSquare) {
  EXPECT_TRUE(cauchy_scan(generators::linear(2.0)).pass);
  const auto r = cauchy_scan(generators::power(2.0));
  EXPECT_FALSE(r.pass);
  // 2uv peaks at u = v = 1/2 on the triangle; the 64-node grid misses 1/2
  EXPECT_GT(r.max_abs_residual, 0.49);
  ASSERT_TRUE(r.witness);
  const auto [lhs, rhs] = replay(*r.witness, generators::power(2.0));
  EXPECT_DOUBLE_EQ(lhs - rhs, r.witness->lhs - r.witness->rhs);
}

TEST(Markov, ResidualValues) {
  EXPECT_DOUBLE_EQ(markov_invariance_residual(generators::power(2.0), 0.5, 1.0), -0.5);
  EXPECT_NEAR(markov_invariance_residual(generators::power(0.5), 0.5, 1.0), std::sqrt(2.0) - 1.0, 1e-15);
  EXPECT_NEAR(markov_invariance_residual(generators::power(0.5), 0.5, 1.0), 0.4142136, 1e-6);
  EXPECT_THROW(markov_invariance_residual(generators::identity(), 1.5, 0.5), DomainError);
  EXPECT_THROW(markov_invariance_residual(generators::identity(), 0.5, 0.0), DomainError);
}

TEST(Markov, LinearGeneratorsVanishOnGrid) {
  for (double c : {1.0, 2.0, 0.5, 3.0, 0.7}) {
    const auto r = markov_scan(generators::linear(c));
    EXPECT_LT(r.max_abs_residual, 1e-15) << "c=" << c;
    EXPECT_TRUE(r.pass);
  }
}

// Markov residual vanishes on the grid exactly when the linear fit passes.
TEST(Markov, EquivalentToLinearFitOnFamily) {
  std::vector<EscortGenerator> family{generators::linear(0.5), generators::linear(2.0), generators::linear(3.0),
                                      generators::power(0.5), generators::power(1.0), generators::power(2.0)};
  for (const auto& f : family) {
    const bool markov_ok = markov_scan(f).max_abs_residual <= 1e-9;
    const bool fit_ok = linear_fit_conclusion(f, 64, 1e-6).pass;
    EXPECT_EQ(markov_ok, fit_ok) << f.name;
  }
}

TEST(LinearFit, ExactForLinearGenerators) {
  const LinearFit a = linear_fit_conclusion(generators::linear(3.0));
  EXPECT_DOUBLE_EQ(a.c, 3.0);
  EXPECT_EQ(a.max_dev, 0.0);
  EXPECT_TRUE(a.pass);
  const LinearFit b = linear_fit_conclusion(generators::identity());
  EXPECT_EQ(b.c, 1.0);
  EXPECT_TRUE(b.pass);
}

TEST(LinearFit, SquareIsFarFromLinear) {
  const LinearFit f = linear_fit_conclusion(generators::power(2.0), 64);
  EXPECT_FALSE(f.pass);
  EXPECT_GT(f.max_dev, 0.1);
  // grid fit approaches the continuum values
  EXPECT_NEAR(f.c, oracle::t_squared_slope, 0.01);
  EXPECT_NEAR(f.max_dev, oracle::t_squared_max_dev, 0.01);
  EXPECT_THROW(linear_fit_conclusion(generators::identity(), 4), DomainError);
}

TEST(LinearFit, NormalizationPassImpliesSlopeOne) {
  const std::vector<std::size_t> dims{3, 4, 5};
  for (const auto& f : {generators::identity(), generators::linear(2.0), generators::power(2.0)}) {
    if (normalization_scan(f, dims).max_abs_residual > 1e-9) continue;
    const LinearFit fit = linear_fit_conclusion(f);
    EXPECT_LE(fit.max_dev, 1e-6);
    EXPECT_NEAR(fit.c, 1.0, 1e-12);
  }
}

TEST(LinearFit, TabulatedLinearTablePasses) {
  const EscortGenerator f = generators::tabulated({0.0, 0.3, 1.0}, {0.0, 0.6, 2.0});
  EXPECT_TRUE(linear_fit_conclusion(f).pass);
  EXPECT_TRUE(markov_scan(f).pass);
}

TEST(EscortRigidity, LinearCollapsesToBorn) {
  const auto suite = default_suite(3, RngSeed{1});
  const auto samples = haar_sample(RngSeed{2}, 300, 3);
  for (const auto& f : {generators::identity(), generators::linear(2.0)}) {
    const auto r = escort_rigidity_test(f, 3, suite, samples);
    EXPECT_EQ(r.verdict.conclusion, Conclusion::BornConfirmed) << f.name;
    EXPECT_TRUE(r.fit.pass);
    EXPECT_LE(r.readout_born_gap, 1e-15);
  }
}

TEST(EscortRigidity, SquareViolatesH2AndFailsFit) {
  const auto suite = default_suite(2, RngSeed{1});
  const auto samples = haar_sample(RngSeed{2}, 300, 2);
  const auto r = escort_rigidity_test(generators::power(2.0), 2, suite, samples);
  EXPECT_EQ(r.verdict.conclusion, Conclusion::PremiseViolated);
  EXPECT_EQ(r.verdict.violated_premise, "H2");
  EXPECT_GT(r.fit.max_dev, 0.1);
}

TEST(ScanReport, SerializesModeAndFit) {
  const Json j = to_json(linear_fit_scan(generators::linear(2.0)));
  EXPECT_EQ(j["mode"], "LINEAR_FIT");
  EXPECT_EQ(j["fitted_c"], 2.0);
  EXPECT_EQ(j["status"], "PASS");
  EXPECT_THROW(parse_scan_mode("bogus"), SpecError);
}

TEST(ScanReport, ResidualsAreBitReproducible) {
  const auto a = to_json(markov_scan(generators::power(0.5))).dump();
  const auto b = to_json(markov_scan(generators::power(0.5))).dump();
  EXPECT_EQ(a, b);
}
