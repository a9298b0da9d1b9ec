#include "lrbandit/covering.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace lrbandit;

namespace {

// uniform-ish rank-r unit-Frobenius target (Gaussian factors, normalized)
Matrix random_low_rank(int d1, int d2, int r, std::mt19937_64& g) {
    std::normal_distribution<double> n;
    Matrix a(d1, r), b(d2, r);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = n(g);
    for (int i = 0; i < b.size(); ++i) b.data()[i] = n(g);
    Matrix m = a * b.transpose();
    return m / m.norm();
}

double brute_nearest(const LowRankNet& net, const Matrix& t) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < net.size(); ++i) best = std::min(best, (net.element(i) - t).norm());
    return best;
}

}  // namespace

TEST(Bound, SmallExact) {
    EXPECT_DOUBLE_EQ(net_size_bound(2, 2, 1, 1.0), 59049.0);
    EXPECT_DOUBLE_EQ(net_size_bound(3, 1, 2, 9.0), 1.0);
    EXPECT_NEAR(log_net_size_bound(2, 2, 1, 1.0), 5 * std::log(9.0), 1e-12);
}

TEST(Bound, AstronomicalAtPaperScale) {
    EXPECT_GT(log_net_size_bound(10, 10, 3, 1.0 / 3000), std::log(1e200));
    EXPECT_GT(net_size_bound(10, 10, 3, 1.0 / 3000), 1e200);
}

TEST(Net, ScalarCovering) {
    const auto net = build_net(1, 1, 1, 0.1);
    for (int i = 0; i <= 2000; ++i) {
        const double th = -1.0 + i * 0.001;
        EXPECT_LE(nearest_distance(net, Matrix::Constant(1, 1, th)), 0.1) << th;
    }
}

TEST(Net, CountUnderPaperBound) {
    const auto net = build_net(2, 2, 1, 1.0);
    EXPECT_LE(static_cast<double>(net.size()), net_size_bound(2, 2, 1, 1.0));
}

TEST(Net, CoversRandomRankOneTargets) {
    for (double eps : {0.5, 0.3}) {
        const auto net = build_net(2, 2, 1, eps);
        std::mt19937_64 g(17);
        int miss = 0;
        for (int i = 0; i < 1000; ++i) miss += nearest_distance(net, random_low_rank(2, 2, 1, g)) > eps;
        EXPECT_EQ(miss, 0) << "eps " << eps;
    }
}

TEST(Net, ElementsLowRankAndBounded) {
    const auto net = build_net(3, 3, 1, 0.6);
    for (Eigen::Index i = 0; i < net.size(); ++i) {
        const Matrix e = net.element(i);
        EXPECT_LE(e.norm(), 1.0 + 1e-12);
        Eigen::JacobiSVD<Matrix> svd(e);
        EXPECT_LT(svd.singularValues()(1), 1e-8 * std::max(1.0, svd.singularValues()(0)));
    }
}

TEST(Net, NearestDistanceBasics) {
    const auto net = build_net(2, 2, 1, 0.5);
    EXPECT_EQ(nearest_distance(net, net.element(net.size() / 2)), 0.0);
    EXPECT_LE(nearest_distance(net, Matrix::Zero(2, 2)), 0.5);
    std::mt19937_64 g(3);
    for (int i = 0; i < 50; ++i) {
        const Matrix t = random_low_rank(2, 2, 1, g) * 0.7;
        EXPECT_DOUBLE_EQ(nearest_distance(net, t), brute_nearest(net, t));
    }
    EXPECT_THROW(nearest_distance(net, Matrix::Zero(3, 2)), DimensionMismatch);
}

TEST(Net, PredictionsAreInnerProducts) {
    const auto net = build_net(2, 3, 1, 0.8);
    std::mt19937_64 g(1);
    const Matrix x = random_low_rank(2, 3, 2, g);
    const Vector f = net.predictions(x);
    for (Eigen::Index i = 0; i < net.size(); i += 7)
        EXPECT_NEAR(f(i), (net.element(i).array() * x.array()).sum(), 1e-14);
}

TEST(Net, ShrinkingEpsNeverIncreasesDistance) {
    const auto a = build_net(2, 2, 1, 0.5);
    const auto b = build_net(2, 2, 1, 0.35);
    const auto c = build_net(2, 2, 1, 0.25);
    std::mt19937_64 g(8);
    for (int i = 0; i < 500; ++i) {
        const Matrix t = random_low_rank(2, 2, 1, g);
        const double da = nearest_distance(a, t), db = nearest_distance(b, t), dc = nearest_distance(c, t);
        EXPECT_LE(db, da);
        EXPECT_LE(dc, db);
    }
}

TEST(Net, DeterministicBuild) {
    const auto a = build_net(2, 2, 1, 0.4);
    const auto b = build_net(2, 2, 1, 0.4);
    EXPECT_EQ(a.flat(), b.flat());
}

TEST(Net, CapExceededCarriesEstimate) {
    NetOptions o;
    o.cap = 50;
    try {
        build_net(2, 2, 1, 0.2, o);
        FAIL() << "expected CapExceeded";
    } catch (const CapExceeded& e) {
        EXPECT_GT(e.estimated_size, 50.0);
    }
    EXPECT_GT(estimate_net_size(10, 10, 3, 1.0 / 3000), 5e5);
}

TEST(Net, Preconditions) {
    EXPECT_THROW(build_net(2, 2, 1, 0.0), PreconditionError);
    EXPECT_THROW(build_net(2, 2, 1, 2.5), PreconditionError);
    EXPECT_THROW(build_net(2, 2, 3, 0.5), PreconditionError);
}

TEST(Cache, RoundTripAndReuse) {
    const auto dir = std::filesystem::temp_directory_path() / "lrbandit_net_cache_test";
    std::filesystem::remove_all(dir);
    const auto a = build_net_cached(dir, 2, 2, 1, 0.5);
    const auto path = dir / net_cache_name(2, 2, 1, 0.5);
    ASSERT_TRUE(std::filesystem::exists(path));
    const auto b = load_net(path);
    EXPECT_EQ(a.flat(), b.flat());
    EXPECT_EQ(b.eps(), 0.5);
    const auto c = build_net_cached(dir, 2, 2, 1, 0.5);
    EXPECT_EQ(a.flat(), c.flat());
    EXPECT_NE(net_cache_name(2, 2, 1, 0.5), net_cache_name(2, 2, 1, 0.25));
    std::filesystem::remove_all(dir);
}
