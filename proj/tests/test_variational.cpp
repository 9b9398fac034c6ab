#include <gtest/gtest.h>

#include <cmath>

#include "fkode/problem.hpp"
#include "fkode/quadrature.hpp"
#include "fkode/reference.hpp"
#include "fkode/riccati.hpp"
#include "fkode/transform.hpp"
#include "fkode/variational.hpp"
#include "support.hpp"

using fkode::DriftPair;
using fkode::Grid;

namespace {

const Grid kGrid(1.0, 512);

DriftPair inhomogeneous_drift(double d0) {
    const auto a = fkode::constant_riccati(kGrid, Eigen::MatrixXd::Constant(1, 1, 1.0));
    return fkode::solve_D(a, [](double t) { return Eigen::VectorXd::Constant(1, t).eval(); },
                          Eigen::VectorXd::Constant(1, d0));
}

struct Built {
    fkode::Problem problem;
    std::unique_ptr<fkode::WeightedCoefficients> weighted;
    std::unique_ptr<DriftPair> drift;
};

Built build(const std::string& config, std::size_t m = 512) {
    Built b{fkode::load_problem(config), nullptr, nullptr};
    b.weighted = std::make_unique<fkode::WeightedCoefficients>(b.problem, Grid(b.problem.horizon(), m));
    b.drift = std::make_unique<DriftPair>(fkode::build_drift(*b.weighted));
    return b;
}

}  // namespace

TEST(ClosedFormLagrangian, Examples) {
    EXPECT_DOUBLE_EQ(fkode::closed_form_lagrangian(0.0, 0.0, 0.5, 1.0, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(fkode::closed_form_lagrangian(1.0, 0.0, 0.0, 1.0, 0.0), 1.0);
    for (const double t : {0.0, 0.4, 1.0}) EXPECT_DOUBLE_EQ(fkode::closed_form_lagrangian(t, 1.0, t, 0.0, 1.0), 0.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) * 2.0;
    EXPECT_DOUBLE_EQ(fkode::closed_form_lagrangian(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 0.5, a,
                                                   Eigen::VectorXd::Zero(2)),
                     4.0);
}

TEST(Quadrature, ExactForTopDegree) {
    for (std::size_t k = 1; k <= 40; ++k) {
        const double horizon = 1.7;
        const auto rule = fkode::gauss_legendre(k, horizon);
        const double p = static_cast<double>(2 * k - 1);
        const double exact = std::pow(horizon, p + 1) / (p + 1);
        const double approx = rule.integrate([&](double t) { return std::pow(t, p); });
        EXPECT_NEAR(approx, exact, 1e-12 * exact) << "k=" << k;
        double weights = 0.0;
        for (const double w : rule.weights) weights += w;
        EXPECT_NEAR(weights, horizon, 1e-13);
    }
}

TEST(Quadrature, CompositeRule) {
    const auto rule = fkode::composite_gauss_legendre(5, 16, 2.0);
    EXPECT_EQ(rule.order(), 80u);
    EXPECT_NEAR(rule.integrate([](double t) { return std::exp(t); }), std::exp(2.0) - 1.0, 1e-13);
}

TEST(Basis, EndpointsVanish) {
    fkode::testing::Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t degree = static_cast<std::size_t>(fkode::testing::integer(rng, 1, 40));
        const double horizon = fkode::testing::uniform(rng, 0.2, 3.0);
        const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, fkode::testing::uniform(rng, -2.0, 2.0));
        Eigen::VectorXd c(static_cast<Eigen::Index>(degree));
        for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = fkode::testing::uniform(rng, -1.0, 1.0);
        const fkode::BasisExpansion z(degree, horizon, a, c);
        const auto b0 = z.basis(0.0);
        const auto b1 = z.basis(horizon);
        for (std::size_t k = 0; k < degree; ++k) {
            EXPECT_NEAR(b0.phi[k], 0.0, 1e-13);
            EXPECT_NEAR(b1.phi[k], 0.0, 1e-13);
        }
        EXPECT_NEAR(z.value(0.0)[0], 0.0, 1e-12);
        EXPECT_NEAR(z.value(horizon)[0], a[0], 1e-12);
    }
}

TEST(Basis, DerivativesMatchFiniteDifferences) {
    const fkode::BasisExpansion z(6, 2.0, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::LinSpaced(6, 0.5, -0.5));
    for (const double t : {0.3, 1.0, 1.7}) {
        const double h = 1e-5;
        EXPECT_NEAR(z.derivative(t)[0], (z.value(t + h)[0] - z.value(t - h)[0]) / (2 * h), 1e-7);
        EXPECT_NEAR(z.second_derivative(t)[0], (z.derivative(t + h)[0] - z.derivative(t - h)[0]) / (2 * h), 1e-6);
    }
}

TEST(Assemble, GramOfFirstBasisFunction) {
    const auto drift = DriftPair::constant(kGrid, 0.0, 0.0);
    const fkode::BasisExpansion basis(1, 1.0, Eigen::VectorXd::Constant(1, 0.0));
    const auto sys = fkode::assemble(drift, basis, fkode::gauss_legendre(9, 1.0));
    EXPECT_NEAR(sys.gram(0, 0), 12.0, 1e-12);
    EXPECT_DOUBLE_EQ(sys.rhs[0], 0.0);
    EXPECT_DOUBLE_EQ(sys.kappa, 0.0);
}

TEST(Assemble, ZeroRhsForZeroBoundary) {
    const auto drift = DriftPair::constant(kGrid, 0.0, 0.0);
    const fkode::BasisExpansion basis(12, 1.0, Eigen::VectorXd::Constant(1, 0.0));
    const auto sys = fkode::assemble(drift, basis, fkode::gauss_legendre(20, 1.0));
    EXPECT_TRUE(sys.rhs.isZero());
}

TEST(Assemble, KappaOfBoundaryInterpolant) {
    const auto drift = DriftPair::constant(kGrid, 1.0, 0.0);
    const fkode::BasisExpansion basis(0, 1.0, Eigen::VectorXd::Constant(1, 1.0));
    const auto sys = fkode::assemble(drift, basis, fkode::gauss_legendre(8, 1.0));
    EXPECT_NEAR(sys.kappa, 5.0 / 12.0, 1e-14);
    EXPECT_NEAR(fkode::minimize(drift, 1.0, 0).functional, 5.0 / 12.0, 1e-14);
}

TEST(Assemble, RejectsLowQuadratureOrder) {
    const auto drift = DriftPair::constant(kGrid, 1.0, 0.0);
    const fkode::BasisExpansion basis(10, 1.0, Eigen::VectorXd::Constant(1, 1.0));
    EXPECT_THROW((void)fkode::assemble(drift, basis, fkode::gauss_legendre(11, 1.0)), fkode::Error);
    EXPECT_NO_THROW((void)fkode::assemble(drift, basis, fkode::gauss_legendre(12, 1.0)));
}

TEST(Minimize, SinhMode) {
    const auto drift = DriftPair::constant(kGrid, 1.0, 0.0);
    const auto mode = fkode::minimize(drift, 1.0, 20);
    EXPECT_NEAR(mode.expansion.value(0.5)[0], 0.4434094, 1e-6);
    EXPECT_NEAR(mode.expansion.value(0.5)[0], std::sinh(0.5) / std::sinh(1.0), 1e-12);
    EXPECT_GT(mode.functional, 0.0);
    EXPECT_EQ(mode.quadrature_order, 28u);
}

TEST(Minimize, StraightLineWithoutDrift) {
    const auto drift = DriftPair::constant(Grid(2.5, 64), 0.0, 0.0);
    for (const std::size_t degree : {1u, 7u, 25u}) {
        const auto mode = fkode::minimize(drift, -3.0, degree);
        EXPECT_LE(mode.expansion.coefficients().cwiseAbs().maxCoeff(), 1e-14);
        for (const double t : {0.0, 0.7, 2.5}) EXPECT_NEAR(mode.expansion.value(t)[0], -3.0 * t / 2.5, 1e-14);
    }
}

TEST(Minimize, InhomogeneousMode) {
    const auto mode = fkode::minimize(inhomogeneous_drift(0.0), 2.0, 20);
    EXPECT_NEAR(mode.expansion.value(0.5)[0], 0.9434094, 1e-6);
    EXPECT_NEAR(mode.expansion.value(0.5)[0], 0.5 + std::sinh(0.5) / std::sinh(1.0), 1e-10);
}

TEST(Minimize, DGaugeInvariance) {
    const auto m0 = fkode::minimize(inhomogeneous_drift(0.0), 2.0, 20);
    const auto m1 = fkode::minimize(inhomogeneous_drift(1.0), 2.0, 20);
    EXPECT_LE(fkode::sup_distance(m0.samples, m1.samples), 1e-8);
}

TEST(Minimize, SignBranchAgreement) {
    for (const double root : {1.0, 2.0, 0.5}) {
        const auto plus = fkode::minimize(DriftPair::constant(kGrid, root, 0.0), 1.0, 24);
        const auto minus = fkode::minimize(DriftPair::constant(kGrid, -root, 0.0), 1.0, 24);
        EXPECT_LE(fkode::sup_distance(plus.samples, minus.samples), 1e-8) << root;
    }
}

TEST(Minimize, QuadraticFormMatchesDirectQuadrature) {
    for (const auto& id : fkode::gallery_ids()) {
        const auto b = build(fkode::gallery(id, 1.0, 2.0).config);
        const auto mode = fkode::minimize(*b.drift, b.weighted->terminal_hat(), 20);
        const double direct =
            fkode::functional_by_quadrature(mode.expansion, *b.drift, fkode::composite_gauss_legendre(8, 64, 1.0));
        EXPECT_NEAR(mode.functional, direct, 1e-10) << id;
        EXPECT_GE(mode.functional, 0.0);
    }
}

TEST(Minimize, GramStaysPositiveDefinite) {
    for (const auto& id : fkode::gallery_ids()) {
        const auto b = build(fkode::gallery(id, 1.0, 1.0).config);
        for (const std::size_t degree : {5u, 20u, 40u, 60u}) {
            const auto mode = fkode::minimize(*b.drift, b.weighted->terminal_hat(), degree);
            EXPECT_GT(mode.min_pivot, 0.0) << id << " N=" << degree;
        }
    }
}

TEST(Minimize, AgreesWithFdOracle) {
    for (const auto& id : fkode::gallery_ids()) {
        const auto b = build(fkode::gallery(id, 1.0, 2.0).config);
        const auto fd = fkode::fd_bvp_solve(fkode::LinearBvp::from_weighted(*b.weighted), 512);
        const double dt = 1.0 / 512;
        for (const std::size_t degree : {20u, 30u}) {
            const auto mode = fkode::minimize(*b.drift, b.weighted->terminal_hat(), degree);
            EXPECT_LE(fkode::sup_distance(mode.samples, fd), std::max(1e-6, 10.0 * dt * dt)) << id;
        }
    }
}

TEST(Minimize, SystemDecouples) {
    const auto b = build("n = 2\nT = 1\na = 1, 1\ng[0][0] = -1\ng[1][1] = -4\n");
    const auto mode = fkode::minimize(*b.drift, b.weighted->terminal_hat(), 20);
    for (const double t : {0.25, 0.5, 0.75}) {
        EXPECT_NEAR(mode.expansion.value(t)[0], std::sinh(t) / std::sinh(1.0), 1e-10);
        EXPECT_NEAR(mode.expansion.value(t)[1], std::sinh(2 * t) / std::sinh(2.0), 1e-10);
    }
}

TEST(ElResidual, Examples) {
    const fkode::BasisExpansion line(8, 1.0, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(8));
    const fkode::MatrixFunction zero_g = [](double) { return Eigen::MatrixXd::Zero(1, 1).eval(); };
    const fkode::VectorFunction zero_h = [](double) { return Eigen::VectorXd::Zero(1).eval(); };
    EXPECT_DOUBLE_EQ(fkode::el_residual(line, zero_g, zero_h, kGrid), 0.0);

    const auto sinh = build("T = 1\na = 1\ng = -1\n");
    EXPECT_LE(fkode::el_residual(fkode::minimize(*sinh.drift, 1.0, 20), *sinh.weighted), 1e-8);

    const auto airy = build("T = 1\na = 2\ng = -t\n");
    const auto r10 = fkode::el_residual(fkode::minimize(*airy.drift, 2.0, 10), *airy.weighted);
    const auto r30 = fkode::el_residual(fkode::minimize(*airy.drift, 2.0, 30), *airy.weighted);
    EXPECT_LT(r30, r10);
}

TEST(ElResidual, AiryDecreasesUntilRoundoff) {
    // Spectral convergence reaches the double-precision floor near N = 12; past that
    // the residual is rounding noise, so strict decrease is checked before the floor.
    const auto airy = build("T = 1\na = 2\ng = -t\n");
    double previous = INFINITY;
    for (std::size_t degree = 1; degree <= 10; ++degree) {
        const double r = fkode::el_residual(fkode::minimize(*airy.drift, 2.0, degree), *airy.weighted);
        EXPECT_LT(r, previous) << "N=" << degree;
        previous = r;
    }
    for (const std::size_t degree : {20u, 30u, 40u}) {
        EXPECT_LT(fkode::el_residual(fkode::minimize(*airy.drift, 2.0, degree), *airy.weighted), 1e-20);
    }
}

TEST(VariationalProperty, FunctionalNonIncreasingInDegree) {
    // Nested bases: the minimum cannot grow. The comparison allows rounding in
    // 1/2 c'Gc - r'c + kappa (a few ulps of the O(1) value).
    for (const auto& id : fkode::gallery_ids()) {
        const auto b = build(fkode::gallery(id, 1.0, 2.0).config);
        double previous = INFINITY;
        for (const std::size_t degree : {5u, 10u, 20u, 40u}) {
            const double value = fkode::minimize(*b.drift, b.weighted->terminal_hat(), degree).functional;
            EXPECT_LE(value, previous + 1e-12 * std::abs(value)) << id << " N=" << degree;
            previous = value;
        }
    }
}

TEST(VariationalProperty, RandomCoefficientsNeverBeatMinimizer) {
    fkode::testing::Rng rng(77);
    const auto b = build("T = 1\na = 2\ng = -t\n");
    const auto mode = fkode::minimize(*b.drift, 2.0, 8);
    const auto quad = fkode::gauss_legendre(16, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd c = mode.expansion.coefficients();
        for (Eigen::Index k = 0; k < c.size(); ++k) c[k] += fkode::testing::uniform(rng, -1e-2, 1e-2);
        const fkode::BasisExpansion z(8, 1.0, Eigen::VectorXd::Constant(1, 2.0), c);
        EXPECT_GE(fkode::functional_by_quadrature(z, *b.drift, quad), mode.functional - 1e-12);
    }
}
