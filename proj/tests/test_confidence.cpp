#include "lrbandit/confidence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lrbandit;

namespace {

Matrix rnd(int d1, int d2, std::mt19937_64& g) {
    std::normal_distribution<double> n;
    Matrix m(d1, d2);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = n(g);
    return m / m.norm();
}

Vector unit_vec(int d, std::mt19937_64& g) {
    std::normal_distribution<double> n;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = n(g);
    return v / v.norm();
}

// boundary point theta_hat + sqrt(beta) L^{-T} u of {q : (q-c)^T V (q-c) = beta}
Vector boundary_point(const EllipsoidSet& s, const Vector& u) {
    Eigen::LLT<Matrix> llt(s.shape());
    return s.center() + std::sqrt(s.radius()) * llt.matrixU().solve(u);
}

}  // namespace

TEST(Beta, LinearValues) {
    EXPECT_NEAR(beta_linear(0, 0.25), 1 + 32 * std::log((std::sqrt(8.0) + 1) / 0.25), 1e-12);
    EXPECT_NEAR(beta_linear(0, 0.25), 88.32, 0.005);
    EXPECT_NEAR(beta_linear(10, 0.01), 21 + 32 * std::log((std::sqrt(8.0) + std::sqrt(11.0)) / 0.01), 1e-12);
    EXPECT_NEAR(beta_linear(10, 0.01), 226.47, 0.005);
    EXPECT_LT(beta_linear(1, 0.01), beta_linear(2, 0.01));
}

TEST(Beta, GlbValues) {
    const auto id = LinkSpec::identity();
    for (double b : {0.0, 1.0, 7.5})
        EXPECT_NEAR(beta_glb(b, 0.05, id), 2 + 4 * b + 32 * std::log((std::sqrt(8.0) + std::sqrt(2 * b + 1)) / 0.05),
                    1e-12);
    EXPECT_NEAR(beta_glb(0, 0.25, id), 89.32, 0.005);
    LinkSpec half = LinkSpec::logistic();
    const double base = beta_glb(3.0, 0.01, half);
    half.kappa_mu /= 2;
    EXPECT_GT(beta_glb(3.0, 0.01, half), base);
}

TEST(Ingest, ZeroAndOneRound) {
    ConversionState s(2, 3);
    EXPECT_EQ(s.V(), Matrix::Identity(6, 6));
    EXPECT_EQ(s.theta_hat(), Vector::Zero(6));
    std::mt19937_64 g(1);
    const Matrix x = rnd(2, 3, g) * 0.7;
    s.ingest(x, 0.4);
    const Vector want = 0.4 * vec(x) / (1 + x.squaredNorm());
    EXPECT_LT((s.theta_hat() - want).norm(), 1e-14);
}

TEST(Ingest, OrderInvariance) {
    std::mt19937_64 g(2);
    std::vector<Matrix> xs;
    std::vector<double> ys;
    std::normal_distribution<double> n;
    for (int i = 0; i < 40; ++i) xs.push_back(rnd(3, 3, g)), ys.push_back(n(g));
    ConversionState a(3, 3), b(3, 3);
    for (int i = 0; i < 40; ++i) a.ingest(xs[i], ys[i]);
    for (int i = 39; i >= 0; --i) b.ingest(xs[i], ys[i]);
    EXPECT_LT((a.V() - b.V()).norm(), 1e-10);
    EXPECT_LT((a.theta_hat() - b.theta_hat()).norm(), 1e-10);
}

TEST(Ingest, RidgeExactAcrossResolves) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> n;
    ConversionState s(2, 2);
    Matrix V = Matrix::Identity(4, 4);
    Vector b = Vector::Zero(4);
    double prev_logdet = 0;
    for (int t = 1; t <= 1000; ++t) {
        const Matrix x = rnd(2, 2, g);
        const double y = n(g);
        s.ingest(x, y);
        V += vec(x) * vec(x).transpose();
        b += y * vec(x);
        if (t % 50 == 0 || t == 255 || t == 257) {
            EXPECT_LT((s.V() - V).norm(), 1e-9);
            EXPECT_LE((V * s.theta_hat() - b).norm(), 1e-8 * b.norm());
            EXPECT_LT((s.V_inverse() * V - Matrix::Identity(4, 4)).norm(), 1e-8);
        }
        const double ld = s.log_det();
        EXPECT_GE(ld, prev_logdet - 1e-12);
        EXPECT_LE(ld, 4 * std::log(1.0 + t / 4.0) + 1e-9);
        prev_logdet = ld;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.V());
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-9);
}

TEST(Residual, MatchesLiteralSum) {
    std::mt19937_64 g(4);
    std::normal_distribution<double> n;
    ConversionState s(2, 2);
    std::vector<Matrix> xs;
    std::vector<double> ys;
    for (int i = 0; i < 30; ++i) {
        xs.push_back(rnd(2, 2, g));
        ys.push_back(n(g));
        s.ingest(xs.back(), ys.back());
    }
    for (int k = 0; k < 5; ++k) {
        const Matrix th = rnd(2, 2, g) * (0.3 * k);
        double want = th.squaredNorm();
        for (int i = 0; i < 30; ++i) {
            const double e = ys[i] - (xs[i].array() * th.array()).sum();
            want += e * e;
        }
        EXPECT_NEAR(s.penalized_residual(th), want, 1e-9 * std::max(1.0, want));
    }
}

TEST(Ucb, UnitBallAndDegenerate) {
    EllipsoidSet ball(Vector::Zero(4), Matrix::Identity(4, 4), 1.0);
    std::mt19937_64 g(5);
    const Matrix x = rnd(2, 2, g);
    EXPECT_NEAR(ucb_score(ball, x), 1.0, 1e-15);
    const Vector c = unit_vec(4, g);
    EllipsoidSet flat(c, Matrix::Identity(4, 4) * 3, 0.0);
    EXPECT_NEAR(ucb_score(flat, x), vec(x).dot(c), 1e-15);
}

TEST(Ucb, MonteCarloBoundaryMax) {
    std::mt19937_64 g(6);
    for (int trial = 0; trial < 3; ++trial) {
        ConversionState s(2, 2);
        std::normal_distribution<double> n;
        for (int i = 0; i < 8; ++i) s.ingest(rnd(2, 2, g), n(g));
        const auto set = s.ellipsoid(2.5);
        const Matrix x = rnd(2, 2, g);
        const double score = ucb_score(set, x);
        double best = -1e300;
        for (int k = 0; k < 100000; ++k) best = std::max(best, vec(x).dot(boundary_point(set, unit_vec(4, g))));
        EXPECT_LE(best, score + 1e-6);
        EXPECT_GE(best, score - 0.02);
    }
}

TEST(Ucb, DominatesInteriorPoints) {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(0, 1);
    ConversionState s(2, 3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 12; ++i) s.ingest(rnd(2, 3, g), n(g));
    const auto set = s.ellipsoid(4.0);
    const Matrix stacked = [&] {
        Matrix m(6, 5);
        for (int j = 0; j < 5; ++j) m.col(j) = vec(rnd(2, 3, g));
        return m;
    }();
    const Vector scores = ucb_scores(set, stacked);
    for (int k = 0; k < 1000; ++k) {
        const Vector th = set.center() + std::pow(u(g), 1.0 / 6) * (boundary_point(set, unit_vec(6, g)) - set.center());
        ASSERT_LE(set.quad(th), set.radius() * (1 + 1e-12));
        for (int j = 0; j < 5; ++j) EXPECT_GE(scores(j) + 1e-12, stacked.col(j).dot(th));
    }
}

TEST(Contains, LinearEdges) {
    ConversionState s(2, 2);
    std::vector<double> yh;
    std::vector<Matrix> xs;
    std::mt19937_64 g(8);
    EXPECT_TRUE(contains(s, ConfidenceMode::linear, 0.0, 0.01, rnd(2, 2, g), yh, xs));
    const double beta = beta_linear(0.0, 0.01);
    const Matrix big = rnd(2, 2, g) * std::sqrt(1 + beta + 0.1);
    EXPECT_FALSE(contains(s, ConfidenceMode::linear, 0.0, 0.01, big, yh, xs));
    s.ingest(rnd(2, 2, g), 0.1);
    EXPECT_THROW(contains(s, ConfidenceMode::linear, 0.0, 0.01, big, yh, xs), DimensionMismatch);
}

TEST(Contains, ExactSetInsideEnclosingEllipsoid) {
    for (auto mode : {ConfidenceMode::linear, ConfidenceMode::glb}) {
        std::mt19937_64 g(9);
        std::normal_distribution<double> n;
        ConversionState s(2, 2);
        std::vector<Matrix> xs;
        std::vector<double> yh;
        const Matrix truth = rnd(2, 2, g) * 0.6;
        for (int i = 0; i < 60; ++i) {
            xs.push_back(rnd(2, 2, g));
            yh.push_back((xs.back().array() * truth.array()).sum() + 0.3 * n(g));
            s.ingest(xs.back(), yh.back());
        }
        const double B = 5.0;
        const auto link = LinkSpec::identity();
        const auto set = s.ellipsoid(enclosing_radius(mode, B, 0.01, link));
        int inside = 0;
        for (int k = 0; k < 3000; ++k) {
            // GLB members are taken from the unit ball
            const double scale = mode == ConfidenceMode::glb ? 1.0 : 12.0;
            const Matrix th = rnd(2, 2, g) * scale * std::uniform_real_distribution<double>(0, 1)(g);
            if (!contains(s, mode, B, 0.01, th, yh, xs, link)) continue;
            ++inside;
            EXPECT_LE(set.quad(vec(th)), set.radius() * (1 + 1e-12));
        }
        EXPECT_GT(inside, 0);
    }
}

TEST(Beta, NonDecreasingInSchedule) {
    double prev = 0;
    for (double b = 0; b < 50; b += 0.5) {
        const double v = beta_linear(b, 0.01);
        EXPECT_GE(v, prev);
        prev = v;
    }
}
