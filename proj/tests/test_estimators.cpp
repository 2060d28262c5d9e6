#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "setmem/builtins.hpp"
#include "setmem/dynamics.hpp"
#include "setmem/errors.hpp"
#include "setmem/estimators.hpp"
#include "support/oracles.hpp"

using namespace setmem;

namespace {

MeasurementGroup scalar_group(std::initializer_list<std::pair<double, double>> pairs) {
    MeasurementGroup g;
    for (const auto& [x, y] : pairs) g.pairs.push_back({Vector::Constant(1, x), Vector::Constant(1, y)});
    return g;
}

EstimateOptions with_ridge(double ridge, Execution exec = Execution::Serial) {
    EstimateOptions o;
    o.ridge = ridge;
    o.execution = exec;
    return o;
}

MeasurementGroup a2_group(std::uint64_t seed, std::size_t n) {
    NoiseSampler s(NoiseSet::cube(4), seed);
    const Trajectory t = simulate(SwitchedSystem({builtins::a2()}), std::vector<std::size_t>(n, 0), Vector::Zero(4), s);
    return group(t, 1).front();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void expect_certified(const MeasurementGroup& g, const NoiseSet& w, const EstimateResult& r, double ridge,
                      bool squared = true) {
    const auto cert = oracle::check_certificate(g.regressors(), g.successors(), w.lower(), w.upper(), r.a_hat, ridge,
                                                squared);
    EXPECT_LE(cert.max_violation, kFeasibilityTol);
    EXPECT_LE(cert.kkt_residual, kKktTol);
}

}  // namespace

TEST(SmeEstimate, ExactScalarData) {
    const auto r = sme_estimate(scalar_group({{1, 2}, {2, 4}}), NoiseSet::cube(1), with_ridge(0.0));
    EXPECT_EQ(r.status, EstimateStatus::Optimal);
    EXPECT_NEAR(r.a_hat(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(r.objective, 0.0, 1e-20);
    EXPECT_EQ(r.n_used, 2u);
}

TEST(SmeEstimate, BindingConstraint) {
    const auto g = scalar_group({{10, 16}, {2, 2}});
    const auto r = sme_estimate(g, NoiseSet::cube(1), with_ridge(0.0));
    EXPECT_EQ(r.status, EstimateStatus::Optimal);
    EXPECT_NEAR(r.a_hat(0, 0), 1.5, 1e-12);
    EXPECT_NEAR(ols_estimate(g).a_hat(0, 0), 164.0 / 104.0, 1e-12);
}

TEST(FeasibleEstimate, MinimumNormFeasiblePoint) {
    const auto r = feasible_estimate(scalar_group({{10, 16}}), NoiseSet::cube(1));
    EXPECT_NEAR(r.a_hat(0, 0), 1.5, 1e-12);
    EXPECT_EQ(r.objective, 0.0);
    EXPECT_THROW(feasible_estimate(MeasurementGroup{}, NoiseSet::cube(1)), DimensionError);
}

TEST(FeasibleEstimate, ExactDataHasZeroObjective) {
    std::mt19937_64 rng(4);
    const Matrix a = oracle::random_with_radius(rng, 3, 0.9);
    NoiseSampler none(NoiseSet::zero(3), 0);
    const Trajectory t = simulate(SwitchedSystem({a}), std::vector<std::size_t>(10, 0), Vector::Ones(3), none);
    const auto r = feasible_estimate(group(t, 1).front(), NoiseSet::zero(3));
    EXPECT_EQ(r.status, EstimateStatus::Optimal);
    EXPECT_LE(r.objective, 1e-24);
    EXPECT_LE(r.max_violation, 1e-15);
    EXPECT_LT((r.a_hat - a).norm(), 1e-9);
}

TEST(FeasibleEstimate, InconsistentDataIsInfeasible) {
    // a = 2 from the first pair but a = -2 from the second; W = [-1, 1] cannot bridge it.
    const auto r = feasible_estimate(scalar_group({{1, 2}, {1, -2}}), NoiseSet::cube(1, 0.5));
    EXPECT_EQ(r.status, EstimateStatus::Infeasible);
}

TEST(SmeEstimate, RejectsEmptyAndPolytope) {
    EXPECT_THROW(sme_estimate(MeasurementGroup{}, NoiseSet::cube(1)), DimensionError);
    Matrix h(4, 2);
    h << 1, 1, 1, -1, -1, 1, -1, -1;
    MeasurementGroup g;
    g.pairs.push_back({Vector::Ones(2), Vector::Ones(2)});
    EXPECT_THROW(sme_estimate(g, NoiseSet::polytope(h, Vector::Ones(4))), UnsupportedError);
    EXPECT_THROW(sme_estimate(g, NoiseSet::cube(3)), DimensionError);
}

TEST(SmeEstimate, ScalarOracle) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> a0(-3.0, 3.0), xs(-5.0, 5.0), w(-1.0, 1.0);
    std::uniform_int_distribution<int> count(1, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = a0(rng);
        std::vector<double> x, y;
        MeasurementGroup g;
        for (int i = 0, n = count(rng); i < n; ++i) {
            x.push_back(xs(rng));
            y.push_back(a * x.back() + w(rng));
            g.pairs.push_back({Vector::Constant(1, x.back()), Vector::Constant(1, y.back())});
        }
        const auto expected = oracle::scalar_clamp(x, y, -1.0, 1.0, kDefaultRidge);
        ASSERT_TRUE(expected.has_value());
        const auto r = sme_estimate(g, NoiseSet::cube(1));
        EXPECT_NEAR(r.a_hat(0, 0), *expected, 1e-8) << "trial " << trial;
    }
}

TEST(SmeEstimate, IndependentCertificateOnA2) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (double ridge : {0.0, kDefaultRidge}) {
            const auto g = a2_group(seed, 200);
            const auto r = sme_estimate(g, NoiseSet::cube(4), with_ridge(ridge));
            EXPECT_EQ(r.status, EstimateStatus::Optimal);
            expect_certified(g, NoiseSet::cube(4), r, ridge);
        }
    }
}

TEST(SmeEstimate, TruthIsFeasibleAndNeverInfeasible) {
    const SwitchedSystem sys({builtins::a1(), builtins::a2(), builtins::a3(), builtins::a4()});
    NoiseSampler s(NoiseSet::cube(4), 8);
    std::mt19937_64 rng(8);
    std::vector<std::size_t> sw;
    for (int t = 0; t < 80; ++t) sw.push_back(rng() % 4);
    const Trajectory t = simulate(sys, sw, Vector::Zero(4), s);
    const auto groups = group(t, 4);
    for (std::size_t p = 0; p < 4; ++p) {
        for (const auto& pr : groups[p].pairs) {
            EXPECT_TRUE(contains(NoiseSet::cube(4), pr.y - sys.matrix(p) * pr.x, 0.0));
        }
        for (std::size_t n = 1; n <= groups[p].size(); n += 3) {
            const auto r = sme_estimate(groups[p].prefix(n), NoiseSet::cube(4));
            EXPECT_NE(r.status, EstimateStatus::Infeasible) << "p=" << p << " n=" << n;
        }
    }
}

TEST(SmeEstimate, UnderdeterminedFlag) {
    const auto g = a2_group(5, 200);
    const auto r = sme_estimate(g.prefix(3), NoiseSet::cube(4));
    EXPECT_EQ(r.status, EstimateStatus::Underdetermined);
    EXPECT_TRUE(r.a_hat.allFinite());
    EXPECT_EQ(ols_estimate(g.prefix(3)).status, EstimateStatus::Underdetermined);
    EXPECT_EQ(regressor_rank(g.prefix(3).regressors()), 2);  // X_0 = 0
}

TEST(SmeEstimate, RowsMatchJointSolve) {
    for (std::uint64_t seed : {11u, 12u}) {
        for (std::size_t n : {6u, 30u, 120u}) {
            const auto g = a2_group(seed, n);
            const auto rows = sme_estimate(g, NoiseSet::cube(4));
            const auto joint = reference::sme_estimate_joint(g, NoiseSet::cube(4));
            EXPECT_LT((rows.a_hat - joint.a_hat).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed << " n " << n;
        }
    }
}

TEST(SmeEstimate, SerialAndParallelAreBitIdentical) {
    const auto g = a2_group(21, 150);
    const auto s = sme_estimate(g, NoiseSet::cube(4), with_ridge(kDefaultRidge, Execution::Serial));
    const auto p = sme_estimate(g, NoiseSet::cube(4), with_ridge(kDefaultRidge, Execution::Parallel));
    EXPECT_TRUE((s.a_hat.array() == p.a_hat.array()).all());
    EXPECT_EQ(s.kkt_residual, p.kkt_residual);
    EXPECT_EQ(s.max_violation, p.max_violation);
}

TEST(SmeEstimate, ErrorDecaysWithData) {
    const auto g = a2_group(2, 200);
    const double e20 = estimation_error(sme_estimate(g.prefix(20), NoiseSet::cube(4)).a_hat, builtins::a2());
    const double e200 = estimation_error(sme_estimate(g, NoiseSet::cube(4)).a_hat, builtins::a2());
    EXPECT_LT(e200, e20);
}

TEST(SmeEstimate, MedianErrorIsMonotoneInN) {
    const std::size_t ns[] = {25, 50, 100, 200};
    std::vector<std::vector<double>> errs(4);
    std::vector<double> ols200;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = a2_group(1000 + seed, 200);
        for (std::size_t k = 0; k < 4; ++k) {
            errs[k].push_back(estimation_error(sme_estimate(g.prefix(ns[k]), NoiseSet::cube(4)).a_hat, builtins::a2()));
        }
        ols200.push_back(estimation_error(ols_estimate(g).a_hat, builtins::a2()));
    }
    for (std::size_t k = 1; k < 4; ++k) EXPECT_LE(median(errs[k]), median(errs[k - 1])) << "n=" << ns[k];
    EXPECT_GT(median(ols200), median(errs[3]));
}

TEST(OlsEstimate, ClosedForms) {
    EXPECT_NEAR(ols_estimate(scalar_group({{1, 2}, {2, 4}})).a_hat(0, 0), 2.0, 1e-14);
    const auto r = ols_estimate(scalar_group({{10, 16}, {2, 2}}));
    EXPECT_NEAR(r.a_hat(0, 0), 164.0 / 104.0, 1e-14);
    EXPECT_TRUE(std::isnan(r.max_violation));
    EXPECT_EQ(r.status, EstimateStatus::Optimal);
}

TEST(OlsEstimate, LongRunErrorExceedsSme) {
    std::vector<double> sme, ols;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = a2_group(3000 + seed, 2000);
        const auto r = sme_estimate(g, NoiseSet::cube(4));
        ASSERT_EQ(r.status, EstimateStatus::Optimal) << "seed " << seed;
        sme.push_back(estimation_error(r.a_hat, builtins::a2()));
        ols.push_back(estimation_error(ols_estimate(g).a_hat, builtins::a2()));
    }
    EXPECT_GT(median(ols), median(sme));
}

TEST(OlsEstimate, PseudoInverseOnSingularGram) {
    MeasurementGroup g;
    Vector x(2), y(2);
    x << 1, 0;
    y << 3, 4;
    g.pairs.push_back({x, y});
    const auto r = ols_estimate(g);
    EXPECT_EQ(r.status, EstimateStatus::Underdetermined);
    Matrix expected(2, 2);
    expected << 3, 0, 4, 0;
    EXPECT_LT((r.a_hat - expected).norm(), 1e-14);
}

TEST(ExactRecovery, SmeAndOlsOnNoiseFreeData) {
    std::mt19937_64 rng(44);
    for (double radius : {0.6, 1.3}) {
        const Matrix a = oracle::random_with_radius(rng, 4, radius);
        NoiseSampler none(NoiseSet::zero(4), 0);
        const Vector x0 = oracle::random_matrix(rng, 4, 1);
        const auto g = group(simulate(SwitchedSystem({a}), std::vector<std::size_t>(12, 0), x0, none), 1).front();
        EXPECT_LT((sme_estimate(g, NoiseSet::zero(4)).a_hat - a).norm(), 1e-6);
        EXPECT_LT((ols_estimate(g).a_hat - a).norm(), 1e-6);
    }
}

TEST(EstimationError, Metrics) {
    Matrix diff = Matrix::Zero(4, 4);
    diff(0, 0) = 3;
    diff(1, 1) = 4;
    const Matrix a0 = builtins::a4();
    EXPECT_EQ(estimation_error(a0, a0), 0.0);
    EXPECT_NEAR(estimation_error(a0 + diff, a0, ErrorMetric::Frobenius), 5.0, 1e-14);
    EXPECT_NEAR(estimation_error(a0 + diff, a0, ErrorMetric::Spectral), 4.0, 1e-12);
    EXPECT_THROW(estimation_error(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), DimensionError);
}

TEST(Enums, TextRoundTrip) {
    EXPECT_EQ(to_string(EstimateStatus::Underdetermined), "underdetermined");
    EXPECT_EQ(parse_error_metric("spectral"), ErrorMetric::Spectral);
    EXPECT_EQ(to_string(parse_error_metric("frobenius")), "frobenius");
    EXPECT_THROW(parse_error_metric("l1"), ConfigError);
}
