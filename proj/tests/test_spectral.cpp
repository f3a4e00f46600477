#include "oracles.hpp"
#include "qab/spectral.hpp"
#include "qab/tridiagonal_ql.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qab;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void expect_basis_invariants(const HamiltonianMatrix& h, const AdaptiveBasis& b) {
    ASSERT_EQ(b.dim(), h.dim());
    for (std::size_t i = 1; i < b.dim(); ++i) EXPECT_LE(b.energies[i - 1], b.energies[i]);
    const auto res = residual_report(h, b);
    for (std::size_t i = 0; i < b.dim(); ++i) {
        EXPECT_LE(res[i], 1e-8 * std::max(1.0, std::abs(b.energies[i]))) << i;
        EXPECT_NEAR(dot(b.vector(i), b.vector(i)), 1.0, 1e-12);
        for (std::size_t j = i + 1; j < b.dim(); ++j) EXPECT_LE(std::abs(dot(b.vector(i), b.vector(j))), 1e-10);
        for (double v : b.vector(i)) {
            if (std::abs(v) > kSignThreshold) {
                EXPECT_GT(v, 0.0);
                break;
            }
        }
    }
}

} // namespace

TEST(Eigendecompose, TwoSiteChain) {
    const auto h = build_1d(Potential::one_d({0, 0}), PlanckFactor{1});
    const auto b = eigendecompose(h);
    EXPECT_NEAR(b.energies[0], 1.0, 1e-14);
    EXPECT_NEAR(b.energies[1], 3.0, 1e-14);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(b.vector(0)[0], r, 1e-14);
    EXPECT_NEAR(b.vector(0)[1], r, 1e-14);
    EXPECT_NEAR(b.vector(1)[0], r, 1e-14);
    EXPECT_NEAR(b.vector(1)[1], -r, 1e-14);
}

TEST(Eigendecompose, ThreeSiteChain) {
    const auto b = eigendecompose(build_1d(Potential::one_d({0, 0, 0}), PlanckFactor{1}));
    EXPECT_NEAR(b.energies[0], 2.0 - std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(b.energies[1], 2.0, 1e-13);
    EXPECT_NEAR(b.energies[2], 2.0 + std::sqrt(2.0), 1e-13);
}

TEST(Eigendecompose, ConstantPotentialAgreesWithJacobiAndClosedForm) {
    for (std::size_t n = 2; n <= 16; ++n) {
        const double c = 0.37;
        const double t = 0.8;
        const std::vector<double> x(n, c);
        const auto ours = eigendecompose(build_1d(Potential::one_d(x), PlanckFactor{t}));
        const auto ref = oracle::jacobi(oracle::hamiltonian_1d(x, t));
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(ours.energies[k], ref.values[k], 1e-11);
            const double analytic =
                c + 2 * t - 2 * t * std::cos(static_cast<double>(k + 1) * std::numbers::pi / static_cast<double>(n + 1));
            EXPECT_NEAR(ref.values[k], analytic, 1e-11);
        }
    }
}

TEST(Eigendecompose, RandomPotentialsAgreeWithJacobi) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto x1 = random_values(24, seed);
        const auto b1 = eigendecompose(build_1d(Potential::one_d(x1), PlanckFactor{0.6}));
        const auto r1 = oracle::jacobi(oracle::hamiltonian_1d(x1, 0.6));
        for (std::size_t k = 0; k < 24; ++k) {
            EXPECT_NEAR(b1.energies[k], r1.values[k], 1e-11);
            EXPECT_NEAR(std::abs(dot(b1.vector(k), r1.vectors[k])), 1.0, 1e-9);
        }
        const auto x2 = random_values(20, seed + 100);
        const auto b2 = eigendecompose(build_2d(Potential::two_d(4, 5, x2), PlanckFactor{1.3}));
        const auto r2 = oracle::jacobi(oracle::hamiltonian_2d(x2, 4, 5, 1.3));
        for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(b2.energies[k], r2.values[k], 1e-11);
    }
}

TEST(Eigendecompose, BasisInvariants1dAnd2d) {
    const auto h1 = build_1d(Potential::one_d(random_values(97, 3)), PlanckFactor{0.5});
    expect_basis_invariants(h1, eigendecompose(h1));
    const auto h2 = build_2d(Potential::two_d(9, 7, random_values(63, 4)), PlanckFactor{0.5});
    expect_basis_invariants(h2, eigendecompose(h2));
}

TEST(Eigendecompose, DegenerateSpectrumStillOrthonormal) {
    // A constant square grid has many exactly repeated energies.
    const auto h = build_2d(Potential::two_d(6, 6, std::vector<double>(36, 0.0)), PlanckFactor{1});
    const auto b = eigendecompose(h);
    expect_basis_invariants(h, b);
}

TEST(Eigendecompose, DeterministicBits) {
    const auto h = build_2d(Potential::two_d(8, 8, random_values(64, 11)), PlanckFactor{0.7});
    const auto a = eigendecompose(h);
    const auto b = eigendecompose(h);
    EXPECT_EQ(a.energies, b.energies);
    EXPECT_TRUE(a.vectors == b.vectors);
}

TEST(Eigendecompose, EnergyFloorIsThePotentialMinimum) {
    const auto x = random_values(48, 12, -3.0, 4.0);
    const auto b = eigendecompose(build_2d(Potential::two_d(6, 8, x), PlanckFactor{0.9}));
    EXPECT_GE(b.energies.front(), *std::min_element(x.begin(), x.end()) - 1e-9);
}

TEST(Eigendecompose, ParsevalAndCompleteness) {
    const auto b = eigendecompose(build_1d(Potential::one_d(random_values(64, 13)), PlanckFactor{1}));
    const auto v = random_values(64, 14);
    double energy = 0.0;
    std::vector<double> rebuilt(64, 0.0);
    for (std::size_t i = 0; i < 64; ++i) {
        const double a = dot(v, b.vector(i));
        energy += a * a;
        for (std::size_t k = 0; k < 64; ++k) rebuilt[k] += a * b.vector(i)[k];
    }
    EXPECT_NEAR(energy, dot(v, v), 1e-9 * dot(v, v));
    EXPECT_LE(oracle::relative_error(rebuilt, v), 1e-9);
}

TEST(Eigendecompose, StepPotentialConfinesLowEnergyStates) {
    const std::size_t n = 128;
    const double t = 1.0;
    const double v0 = 5.0 * t;
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n / 2; i < n; ++i) x[i] = v0;
    const auto b = eigendecompose(build_1d(Potential::one_d(x), PlanckFactor{t}));
    std::size_t checked = 0;
    for (std::size_t k = 0; k < n && b.energies[k] <= 0.8 * v0; ++k) {
        double left = 0.0;
        for (std::size_t i = 0; i < n / 2; ++i) left += b.vector(k)[i] * b.vector(k)[i];
        EXPECT_GE(left, 0.9) << "rank " << k;
        ++checked;
    }
    EXPECT_GT(checked, 10u);
}

TEST(Eigendecompose, Errors) {
    EXPECT_THROW(eigendecompose(HamiltonianMatrix({1.0}, 1.0, 1, 1)), std::invalid_argument);
    EXPECT_THROW(eigendecompose(HamiltonianMatrix({1.0, std::nan("")}, 1.0, 1, 2)), std::invalid_argument);
}

TEST(ResidualReport, ExactPairsPerturbationAndMismatch) {
    const auto h = build_1d(Potential::one_d({0.3, -0.2}), PlanckFactor{1});
    auto b = eigendecompose(h);
    for (double r : residual_report(h, b)) EXPECT_LE(r, 1e-14);

    const auto big = build_1d(Potential::one_d(random_values(16, 21)), PlanckFactor{1});
    auto bb = eigendecompose(big);
    const auto dir = random_values(16, 22);
    const double nd = std::sqrt(dot(dir, dir));
    for (std::size_t k = 0; k < 16; ++k) bb.vectors(static_cast<Eigen::Index>(k), 3) += 1e-3 * dir[k] / nd;
    EXPECT_GT(residual_report(big, bb)[3], 1e-4);
    EXPECT_LE(residual_report(big, bb)[2], 1e-12);

    EXPECT_THROW(residual_report(big, b), std::invalid_argument);
}

TEST(ImplicitQl, EigenvaluesOnlyMatchesJacobi) {
    const auto d = random_values(30, 31);
    const auto e = random_values(29, 32);
    oracle::Matrix m = oracle::zeros(30);
    for (std::size_t i = 0; i < 30; ++i) {
        m[i][i] = d[i];
        if (i + 1 < 30) m[i][i + 1] = m[i + 1][i] = e[i];
    }
    const auto ref = oracle::jacobi(m);
    const auto ours = tridiagonal_eigenvalues(d, e);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(ours[i], ref.values[i], 1e-12);
}

TEST(ImplicitQl, RejectsBadShapes) {
    std::vector<double> d{1, 2, 3};
    std::vector<double> e{1};
    EXPECT_THROW(implicit_ql(std::span<double>(d), e, DiscardRotations{}), std::invalid_argument);
}

TEST(SpectralTransform, MatchesExplicitBasisAndInverts) {
    for (bool two_d : {false, true}) {
        const auto x = random_values(two_d ? 49 : 60, 41);
        const Potential p = two_d ? Potential::two_d(7, 7, x) : Potential::one_d(x);
        const auto h = build_hamiltonian(p, PlanckFactor{0.8});
        const SpectralTransform st(h);
        const auto b = eigendecompose(h);
        ASSERT_EQ(st.dim(), b.dim());
        for (std::size_t i = 0; i < b.dim(); ++i) EXPECT_NEAR(st.energies()[i], b.energies[i], 1e-12);

        const auto v = random_values(x.size(), 42);
        const auto alpha = st.analyze(v);
        for (std::size_t i = 0; i < b.dim(); ++i) EXPECT_NEAR(std::abs(alpha[i]), std::abs(dot(v, b.vector(i))), 1e-10);
        EXPECT_LE(oracle::relative_error(st.synthesize(alpha), v), 1e-12);

        std::vector<double> w(b.dim(), 0.0);
        for (std::size_t i = 0; i < b.dim() / 3; ++i) w[i] = 1.0;
        const auto filtered = st.filter(v, w);
        std::vector<double> expect(v.size(), 0.0);
        for (std::size_t i = 0; i < b.dim() / 3; ++i) {
            const double a = dot(v, b.vector(i));
            for (std::size_t k = 0; k < v.size(); ++k) expect[k] += a * b.vector(i)[k];
        }
        EXPECT_LE(oracle::relative_error(filtered, expect), 1e-10);
        EXPECT_THROW(st.analyze(std::vector<double>(3)), std::invalid_argument);
    }
}
