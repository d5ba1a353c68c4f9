#include <cmath>

#include <gtest/gtest.h>

#include "pvmrigid/readout.hpp"
#include "pvmrigid/simplex.hpp"
#include "test_oracles.hpp"

using namespace pvmrigid;

TEST(SimplexPoint, RejectsOffSimplexInput) {
  EXPECT_THROW(SimplexPoint({0.5, 0.6}), DomainError);
  EXPECT_THROW(SimplexPoint({1.2, -0.2}), DomainError);
  EXPECT_NO_THROW(SimplexPoint({0.25, 0.25, 0.5}));
}

TEST(SimplexPoint, ClampsRoundoffNegatives) {
  const SimplexPoint u({1.0 + 1e-15, -1e-15});
  EXPECT_EQ(u[1], 0.0);
}

TEST(SimplexTangent, MustSumToZero) {
  EXPECT_THROW(SimplexTangent({1.0, 0.0}), DomainError);
  EXPECT_NO_THROW(SimplexTangent({1.0, -1.0}));
}

TEST(FisherMetric, HandComputedValues) {
  // (1)^2/0.5 + (-1)^2/0.5
  EXPECT_DOUBLE_EQ(fisher_norm_sq(SimplexPoint({0.5, 0.5}), SimplexTangent({1.0, -1.0})), 4.0);
  // 1/0.2 + 4/0.3 + 9/0.5
  const double g = fisher_norm_sq(SimplexPoint({0.2, 0.3, 0.5}), SimplexTangent({1.0, 2.0, -3.0}));
  EXPECT_NEAR(g, 5.0 + 40.0 / 3.0 + 18.0, 1e-12);
}

TEST(FisherMetric, ThrowsOnBoundary) {
  EXPECT_THROW(fisher_norm_sq(SimplexPoint({1.0, 0.0}), SimplexTangent({1.0, -1.0})), DomainError);
}

TEST(SqrtChart, RoundTrip) {
  for (std::size_t d = 2; d <= 5; ++d)
    for (std::uint64_t k = 0; k < 50; ++k) {
      const SimplexPoint u = random_interior_point(RngSeed{3}, k, d);
      const SimplexPoint back = sqrt_chart_inverse(sqrt_chart(u));
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(back[i], u[i], 1e-15);
    }
}

TEST(RoundDistance, VerticesAndArccos) {
  EXPECT_NEAR(round_distance(OrthantPoint::vertex(3, 0), OrthantPoint::vertex(3, 2)), oracle::pi / 2, 1e-15);
  const OrthantPoint x({0.6, 0.8});
  const OrthantPoint y({0.8, 0.6});
  EXPECT_NEAR(round_distance(x, y), std::acos(0.96), 1e-14);
  EXPECT_EQ(round_distance(x, x), 0.0);
}

TEST(RoundDistance, StableForNearbyPoints) {
  // arccos of a dot product would lose half the digits here
  const double eps = 1e-9;
  const OrthantPoint x = OrthantPoint::normalized({1.0, 1.0});
  const OrthantPoint y = OrthantPoint::normalized({1.0 + eps, 1.0});
  EXPECT_NEAR(round_distance(x, y), eps / 2.0, 1e-16);
}

TEST(OrthantGeodesic, EndpointsAndMidpointLength) {
  const OrthantPoint x = OrthantPoint::vertex(2, 0);
  const OrthantPoint y = OrthantPoint::vertex(2, 1);
  EXPECT_NEAR(round_distance(orthant_chord_geodesic(x, y, 0.0), x), 0.0, 1e-15);
  EXPECT_NEAR(round_distance(orthant_chord_geodesic(x, y, 1.0), y), 0.0, 1e-15);
  EXPECT_NEAR(round_distance(orthant_chord_geodesic(x, y, 0.5), x), oracle::pi / 4, 1e-15);
}

// 4 |dPhi v|^2 = g^F(v, v) with Phi = sqrt, via finite differences at 1e-5.
TEST(SqrtChart, ConformalFactorFour) {
  for (std::size_t d = 2; d <= 5; ++d) {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const SimplexPoint u = random_interior_point(RngSeed{11}, k, d);
      const SimplexTangent v = random_unit_tangent(RngSeed{12}, k, u);
      const double h = 1e-5 * std::min(1.0, *std::min_element(u.coords().begin(), u.coords().end()) * 10.0);
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double dphi = (std::sqrt(u[i] + h * v[i]) - std::sqrt(u[i] - h * v[i])) / (2 * h);
        acc += dphi * dphi;
      }
      worst = std::max(worst, std::abs(4 * acc / fisher_norm_sq(u, v) - 1.0));
    }
    EXPECT_LT(worst, 1e-4) << "d=" << d;
  }
}

TEST(Sampling, InteriorPointsAreDeterministic) {
  const SimplexPoint a = random_interior_point(RngSeed{5}, 7, 4);
  const SimplexPoint b = random_interior_point(RngSeed{5}, 7, 4);
  const SimplexPoint c = random_interior_point(RngSeed{5}, 8, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_TRUE(a.is_interior());
}

TEST(Sampling, UnitTangentsHaveUnitFisherNorm) {
  for (std::uint64_t k = 0; k < 200; ++k) {
    const SimplexPoint u = random_interior_point(RngSeed{1}, k, 3);
    const SimplexTangent v = random_unit_tangent(RngSeed{2}, k, u);
    double sum = 0.0;
    for (double x : v.comps()) sum += x;
    EXPECT_NEAR(sum, 0.0, 1e-12);
    EXPECT_NEAR(fisher_norm_sq(u, v), 1.0, 1e-12);
  }
}

TEST(Retraction, MovesBoundaryPointsInside) {
  const SimplexPoint r = retract_to_interior(SimplexPoint::vertex(3, 0));
  EXPECT_TRUE(r.is_interior());
  EXPECT_NEAR(r[0], 1.0, 1e-8);
  const OrthantPoint x = retract_to_interior(OrthantPoint::vertex(3, 1));
  EXPECT_GT(x[0], 0.0);
}

TEST(FisherPushforward, IdentityHasZeroResidual) {
  const SimplexSelfMap id = identity_simplex_map(3);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const SimplexPoint u = random_interior_point(RngSeed{9}, k, 3);
    const SimplexTangent v = random_unit_tangent(RngSeed{10}, k, u);
    EXPECT_NEAR(fisher_nonexpansion_residual(id, u, v), 0.0, 1e-8);
  }
}

namespace {

// Escort t^2 in d = 2 along v = (1, -1): with D = x^2 + (1-x)^2 the first
// image coordinate moves at 2x(1-x)/D^2, so the pushed length is
// (dT)^2 / (T_1 T_2) against the original 1 / (x (1-x)).
double escort_sq_residual(double x) {
  const double D = x * x + (1 - x) * (1 - x);
  const double dT = 2 * x * (1 - x) / (D * D);
  const double t1 = x * x / D, t2 = (1 - x) * (1 - x) / D;
  return dT * dT / (t1 * t2) - 1.0 / (x * (1 - x));
}

}  // namespace

TEST(FisherPushforward, EscortSquareMatchesAnalyticDerivative) {
  const SimplexSelfMap t = maps::escort(generators::power(2.0), 2);
  for (double x : {0.6, 0.9, 0.5, 0.3}) {
    const double r = fisher_nonexpansion_residual(t, SimplexPoint({x, 1 - x}), SimplexTangent({1.0, -1.0}));
    EXPECT_NEAR(r, escort_sq_residual(x), 1e-6 * std::max(1.0, std::abs(r))) << "x=" << x;
  }
  // expands near the equator, contracts near a vertex
  EXPECT_GT(escort_sq_residual(0.6), 0.0);
  EXPECT_NEAR(escort_sq_residual(0.9), -5.16227, 1e-5);
}

TEST(FisherPushforward, HalvesStepNearBoundary) {
  const SimplexSelfMap id = identity_simplex_map(2);
  const SimplexPoint u({1e-6, 1.0 - 1e-6});
  const auto fp = fisher_pushforward(id, u, std::vector<double>{1.0, -1.0}, 1e-5);
  EXPECT_LT(fp.step, 1e-6);
  EXPECT_NEAR(fp.residual() / fp.original, 0.0, 1e-6);
}

TEST(FisherPushforward, RejectsBoundaryBasePoint) {
  EXPECT_THROW(fisher_pushforward(identity_simplex_map(2), SimplexPoint({1.0, 0.0}),
                                  std::vector<double>{-1.0, 1.0}),
               DomainError);
}

TEST(FisherPushforward, UsesSqrtConventionWhenImageOnBoundary) {
  const SimplexSelfMap collapse{[](const SimplexPoint&) { return SimplexPoint::vertex(2, 0); }, "collapse", 2};
  const auto fp = fisher_pushforward(collapse, SimplexPoint({0.5, 0.5}), std::vector<double>{1.0, -1.0});
  EXPECT_TRUE(fp.sqrt_convention);
  EXPECT_EQ(fp.pushed, 0.0);
}
