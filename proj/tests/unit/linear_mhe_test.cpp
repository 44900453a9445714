#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dualhorizon/deadbeat.hpp"
#include "dualhorizon/errors.hpp"
#include "dualhorizon/linear_mhe.hpp"
#include "dualhorizon/random_systems.hpp"
#include "oracles.hpp"

namespace dh = dualhorizon;
namespace mhe = dualhorizon::mhe;
using dh::Matrix;
using dh::Vector;

namespace {

Matrix s(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

// Scalar instance a = 2, C = 1, R = 1. Hand algebra for N = 2:
//   Q = C^T R C = 1, H = a^2 = 4, eta(z, y) = (a y + z) / 5,
//   L = a^2 * a / 5 = 1.6, a - L = 0.4.
struct Golden {
  Matrix a = s(2.0);
  Matrix c = s(1.0);
  Matrix r = s(1.0);
  int horizon = 2;
};

}  // namespace

TEST(HorizonWeights, GoldenScalar) {
  const Golden g;
  const mhe::HorizonWeights w = mhe::horizon_weights(g.a, g.c, g.horizon, g.r);
  EXPECT_NEAR(w.Q(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(w.H(0, 0), 4.0, 1e-15);
}

TEST(HorizonWeights, SingleStepHasEmptyQ) {
  const Golden g;
  const mhe::HorizonWeights w = mhe::horizon_weights(g.a, g.c, 1, g.r);
  EXPECT_EQ(w.Q(0, 0), 0.0);
  EXPECT_NEAR(w.H(0, 0), 1.0, 1e-15);
}

TEST(HorizonWeights, IdentityThreeSteps) {
  const Matrix i3 = Matrix::Identity(3, 3);
  const mhe::HorizonWeights w = mhe::horizon_weights(i3, i3, 3, i3);
  EXPECT_TRUE(w.Q.isApprox(2 * i3));
  EXPECT_TRUE(w.H.isApprox(i3));
}

TEST(HorizonWeights, RejectsBadWeightAndRank) {
  const Golden g;
  EXPECT_THROW(mhe::horizon_weights(g.a, g.c, 2, s(-1.0)), dh::ConfigError);
  const Matrix a = Matrix::Identity(2, 2);
  const Matrix c = (Matrix(1, 2) << 1, 0).finished();
  EXPECT_THROW(mhe::horizon_weights(a, c, 3, s(1.0)), dh::SynthesisError);
}

TEST(OptimalEta, GoldenScalar) {
  const Golden g;
  const mhe::HorizonWeights w = mhe::horizon_weights(g.a, g.c, g.horizon, g.r);
  EXPECT_NEAR(mhe::optimal_eta(w, g.a, g.c, v1(1.0), v1(0.0))(0), 0.2, 1e-15);
}

TEST(OptimalEta, SingleStepInvertsSquareC) {
  const Matrix a = (Matrix(2, 2) << 0.5, 1, 0, 0.3).finished();
  const Matrix c = (Matrix(2, 2) << 2, 1, 1, 3).finished();
  const Matrix r = Matrix::Identity(2, 2);
  const mhe::HorizonWeights w = mhe::horizon_weights(a, c, 1, r);
  const Vector y = (Vector(2) << 1, -2).finished();
  const Vector eta = mhe::optimal_eta(w, a, c, Vector::Zero(2), y);
  EXPECT_LT((eta - c.inverse() * y).norm(), 1e-12);
}

TEST(OptimalEta, ConsistentDataReturnsZ) {
  dh::random::Engine rng(21);
  const dh::LinearSystem sys = dh::random::observable_system(rng, 3, 1, 3);
  const mhe::HorizonWeights w = mhe::horizon_weights(sys.A(), sys.C(), 4, s(1.0));
  const Vector z = dh::random::uniform_vector(rng, 3);
  const Vector y = sys.C() * oracle::mpow(sys.A(), 3) * z;
  EXPECT_LT((mhe::optimal_eta(w, sys.A(), sys.C(), z, y) - z).norm(), 1e-10);
}

TEST(OptimalEta, MatchesLeastSquaresOracle) {
  dh::random::Engine rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const int p = 1 + trial % 2;
    const int horizon = n + trial % 3;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, p, horizon);
    const Matrix r = dh::random::spd_matrix(rng, p);
    const mhe::HorizonWeights w = mhe::horizon_weights(sys.A(), sys.C(), horizon, r);
    const Vector z = dh::random::uniform_vector(rng, n);
    const Vector y = dh::random::uniform_vector(rng, p);
    const Vector eta = mhe::optimal_eta(w, sys.A(), sys.C(), z, y);
    const Vector ref = oracle::mhe_eta(sys.A(), sys.C(), horizon, r, z, y);
    EXPECT_LT((eta - ref).norm(), 1e-8 * (1 + ref.norm()));
  }
}

TEST(OptimalEta, PerturbationsNeverLowerTheCost) {
  dh::random::Engine rng(23);
  const dh::LinearSystem sys = dh::random::observable_system(rng, 3, 2, 3);
  const Matrix r = dh::random::spd_matrix(rng, 2);
  const mhe::HorizonWeights w = mhe::horizon_weights(sys.A(), sys.C(), 3, r);
  const Vector z = dh::random::uniform_vector(rng, 3);
  const Vector y = dh::random::uniform_vector(rng, 2);
  const Vector eta = mhe::optimal_eta(w, sys.A(), sys.C(), z, y);
  const double best = mhe::cost_J(sys.A(), sys.C(), r, 3, eta, z, y);
  for (int i = 0; i < 100; ++i) {
    const Vector xi = eta + 1e-3 * dh::random::uniform_vector(rng, 3);
    EXPECT_GE(mhe::cost_J(sys.A(), sys.C(), r, 3, xi, z, y), best - 1e-14);
  }
}

TEST(CostJ, GoldenScalarAndTrivialCases) {
  const Golden g;
  EXPECT_NEAR(mhe::cost_J(g.a, g.c, g.r, 2, v1(0.2), v1(1.0), v1(0.0)), 0.8, 1e-15);
  EXPECT_EQ(mhe::cost_J(g.a, g.c, g.r, 2, v1(1.5), v1(1.5), v1(3.0)), 0.0);
  const double j1 = mhe::cost_J(g.a, g.c, g.r, 2, v1(0.7), v1(1.0), v1(0.3));
  const double j3 = mhe::cost_J(g.a, g.c, s(3.0), 2, v1(0.7), v1(1.0), v1(0.3));
  EXPECT_NEAR(j3, 3.0 * j1, 1e-14);
}

TEST(ObserverGain, GoldenScalar) {
  const Golden g;
  const mhe::ObserverGain gain = mhe::observer_gain(g.a, g.c, g.horizon, g.r);
  EXPECT_NEAR(gain.L(0, 0), 1.6, 1e-12);
  EXPECT_NEAR(gain.spectral_radius, 0.4, 1e-12);
}

TEST(ObserverGain, SingleStepScalarIsDeadbeat) {
  const mhe::ObserverGain gain = mhe::observer_gain(s(-1.7), s(1.0), 1, s(2.0));
  EXPECT_NEAR(gain.L(0, 0), -1.7, 1e-12);
  EXPECT_NEAR(gain.spectral_radius, 0.0, 1e-12);
}

TEST(ObserverGain, MatchesLeastSquaresOracle) {
  dh::random::Engine rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const int p = 1 + trial % 2;
    const int horizon = n + trial % 3;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, p, horizon);
    const Matrix r = dh::random::spd_matrix(rng, p);
    const Matrix l = mhe::observer_gain(sys.A(), sys.C(), horizon, r).L;
    const Matrix ref = oracle::mhe_gain(sys.A(), sys.C(), horizon, r);
    EXPECT_LT((l - ref).cwiseAbs().maxCoeff(), 1e-8 * (1 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST(ObserverGain, HorizonNEqualsDeadbeatForScalarOutput) {
  dh::random::Engine rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, 1, n);
    const Matrix l = mhe::observer_gain(sys.A(), sys.C(), n, s(1.0)).L;
    const Matrix l_db = dh::deadbeat::observer_gain(sys.A(), sys.C());
    EXPECT_LT((l - l_db).cwiseAbs().maxCoeff(), 1e-7 * (1 + l_db.cwiseAbs().maxCoeff()));
    const Matrix closed = sys.A() - l * sys.C();
    EXPECT_LT(oracle::mpow(closed, n).cwiseAbs().maxCoeff(),
              1e-7 * (1 + oracle::mpow(sys.A(), n).cwiseAbs().maxCoeff()));
  }
}

TEST(ObserverGain, SpectralRadiusBelowOneAndMatchesEigenOracle) {
  dh::random::Engine rng(26);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const int p = 1 + trial % 2;
    const int horizon = n + trial % 3;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, std::min(p, n), horizon);
    const mhe::ObserverGain g = mhe::observer_gain(sys.A(), sys.C(), horizon, Matrix::Identity(sys.output_dim(), sys.output_dim()));
    EXPECT_LT(g.spectral_radius, 1.0);
    const double ref = oracle::spectral_radius(sys.A() - g.L * sys.C());
    if (ref > 1e-3) {
      EXPECT_NEAR(g.spectral_radius, ref, 1e-9);
    } else {
      // Nilpotent closed loop: eigenvalues are only resolved to about eps^(1/n).
      EXPECT_LT(g.spectral_radius, 1e-3);
    }
  }
}

TEST(Identities, GoldenScalarTerms) {
  const Golden g;
  const mhe::HorizonWeights w = mhe::horizon_weights(g.a, g.c, g.horizon, g.r);
  const mhe::CostDecomposition t = mhe::cost_decomposition(w, g.a, g.c, v1(1.0), v1(0.0));
  EXPECT_NEAR(t.cost, 0.8, 1e-15);
  EXPECT_NEAR(t.descent, 0.2, 1e-15);
  EXPECT_NEAR(t.prior, 1.0, 1e-15);
  EXPECT_NEAR(mhe::decomposition_residual(w, g.a, g.c, v1(1.0), v1(0.0)), 0.0, 1e-15);
  const mhe::CostDecomposition zero = mhe::cost_decomposition(w, g.a, g.c, v1(0.3), v1(0.3));
  EXPECT_NEAR(zero.cost + zero.descent + zero.prior, 0.0, 1e-15);
}

TEST(Identities, RandomInstances) {
  dh::random::Engine rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const int p = 1 + trial % 2;
    const int horizon = n + trial % 3;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, std::min(p, n), horizon);
    const Matrix r = dh::random::spd_matrix(rng, sys.output_dim());
    const mhe::HorizonWeights w = mhe::horizon_weights(sys.A(), sys.C(), horizon, r);
    const Vector z = dh::random::uniform_vector(rng, n);
    const Vector xt = dh::random::uniform_vector(rng, n);
    const mhe::CostDecomposition t = mhe::cost_decomposition(w, sys.A(), sys.C(), z, xt);
    EXPECT_LE(std::abs(t.residual()) / t.scale(), 1e-10);
    EXPECT_LE(mhe::symmetry_residual(w), 1e-12 * (1 + w.total().cwiseAbs().maxCoeff()));
    EXPECT_LE(mhe::closed_form_cost_residual(w, sys.A(), sys.C(), z, xt), 1e-10);
    EXPECT_LE(mhe::descent_form_residual(w, sys.A(), sys.C(), z, xt), 1e-10);
  }
}

TEST(Lyapunov, GoldenScalarAndZero) {
  const Golden g;
  const mhe::HorizonWeights w = mhe::horizon_weights(g.a, g.c, g.horizon, g.r);
  const mhe::LyapunovStep step = mhe::lyap_decrement(w, g.a, g.c, v1(1.0), v1(0.0));
  EXPECT_NEAR(step.lhs, 0.16, 1e-15);
  EXPECT_NEAR(step.rhs, 0.2, 1e-15);
  const mhe::LyapunovStep zero = mhe::lyap_decrement(w, g.a, g.c, v1(0.4), v1(0.4));
  EXPECT_NEAR(zero.lhs, 0.0, 1e-15);
  EXPECT_NEAR(zero.rhs, 0.0, 1e-15);
}

TEST(ClaimDelta, HandValues) {
  EXPECT_NEAR(mhe::claim_delta(1, s(1.0), s(1.0), s(1.0), 1.0), 1.0, 1e-15);
  const Matrix w = (Matrix(2, 1) << 1, 2).finished();
  EXPECT_NEAR(mhe::claim_delta(2, w, s(2.0), s(1.0), 0.5), 0.25 / 16.0, 1e-15);
  EXPECT_NEAR(mhe::claim_delta(2, w, s(2.0), s(1.0), 1.0),
              4.0 * mhe::claim_delta(2, w, s(2.0), s(1.0), 0.5), 1e-15);
  EXPECT_EQ(mhe::claim_delta(1, s(1.0), s(0.0), s(1.0), 1.0),
            std::numeric_limits<double>::infinity());
}

TEST(Run, GoldenScalarContractsByPointFour) {
  const Golden g;
  const dh::Trace trace = mhe::run(g.a, g.c, g.horizon, g.r, v1(1.0), v1(0.0), 12);
  ASSERT_EQ(trace.size(), 13u);
  for (size_t k = 1; k < trace.size(); ++k) {
    EXPECT_NEAR(trace[k].err_norm, 0.4 * trace[k - 1].err_norm, 1e-12);
  }
}

TEST(Run, ZeroStepsGivesInitialRecordOnly) {
  const Golden g;
  const dh::Trace trace = mhe::run(g.a, g.c, g.horizon, g.r, v1(1.0), v1(0.0), 0);
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_NEAR(trace[0].err_norm, 2.0, 1e-15);
}

TEST(Run, ConsistentStartHasZeroCost) {
  dh::random::Engine rng(28);
  const dh::LinearSystem sys = dh::random::observable_system(rng, 3, 1, 3);
  const Vector x0 = dh::random::uniform_vector(rng, 3);
  // z_0 = x_{-N+1} makes every window consistent.
  const Vector z0 = oracle::mpow(sys.A(), 2).partialPivLu().solve(x0);
  const dh::Trace trace = mhe::run(sys.A(), sys.C(), 3, s(1.0), z0, x0, 20);
  for (const auto& rec : trace) {
    ASSERT_TRUE(rec.cost_J.has_value());
    EXPECT_LT(*rec.cost_J, 1e-20 + 1e-12 * x0.squaredNorm());
  }
}

TEST(Run, RandomFourStateConverges) {
  dh::random::Engine rng(29);
  for (int horizon : {4, 5, 6}) {
    const dh::LinearSystem sys = dh::random::observable_system(rng, 4, 1, 4);
    const Vector x0 = dh::random::uniform_vector(rng, 4);
    const dh::Trace trace =
        mhe::run(sys.A(), sys.C(), horizon, s(1.0), Vector::Zero(4), x0, 200);
    EXPECT_LE(trace.back().err_norm, 1e-6 * (1 + trace.back().x.norm())) << "N=" << horizon;
  }
}

TEST(Run, LyapunovInequalityAndDelayedState) {
  dh::random::Engine rng(30);
  const dh::LinearSystem sys = dh::random::observable_system(rng, 3, 2, 4);
  const Vector x0 = dh::random::uniform_vector(rng, 3);
  const dh::Trace trace = mhe::run(sys.A(), sys.C(), 4, Matrix::Identity(2, 2),
                                   dh::random::uniform_vector(rng, 3), x0, 50);
  for (const auto& rec : trace) {
    if (rec.k < 3) {
      EXPECT_FALSE(rec.x_delayed.has_value());
      EXPECT_FALSE(rec.lyap_lhs.has_value());
      continue;
    }
    ASSERT_TRUE(rec.x_delayed.has_value());
    EXPECT_LT((*rec.x_delayed - trace[rec.k - 3].x).norm(), 1e-12);
    EXPECT_LE(*rec.lyap_lhs, *rec.lyap_rhs + 1e-12);
  }
}

TEST(Run, EtaFormEqualsGainForm) {
  dh::random::Engine rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    const int horizon = n + trial % 2;
    const dh::LinearSystem sys = dh::random::observable_system(rng, n, 1, horizon);
    const Vector z0 = dh::random::uniform_vector(rng, n);
    const Vector x0 = dh::random::uniform_vector(rng, n);
    const Matrix l = mhe::observer_gain(sys.A(), sys.C(), horizon, s(1.0)).L;
    const dh::Trace eta_form = mhe::run(sys.A(), sys.C(), horizon, s(1.0), z0, x0, 30);
    const dh::Trace gain_form = mhe::run_gain_form(
        sys.A(), sys.C(), l, oracle::mpow(sys.A(), horizon - 1) * z0, x0, 30);
    ASSERT_EQ(eta_form.size(), gain_form.size());
    for (size_t k = 0; k < eta_form.size(); ++k) {
      EXPECT_LT((eta_form[k].xhat - gain_form[k].xhat).norm(),
                1e-9 * (1 + gain_form[k].xhat.norm()));
    }
  }
}
