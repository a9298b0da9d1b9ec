#include "lrbandit/ew_forecaster.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace lrbandit;

namespace {

std::shared_ptr<const LowRankNet> pool_of(std::vector<Matrix> ms) {
    const int d1 = static_cast<int>(ms[0].rows()), d2 = static_cast<int>(ms[0].cols());
    Matrix flat(static_cast<Eigen::Index>(ms.size()), d1 * d2);
    for (std::size_t i = 0; i < ms.size(); ++i) flat.row(static_cast<Eigen::Index>(i)) = vec(ms[i]).transpose();
    return std::make_shared<LowRankNet>(d1, d2, 1, 1.0, flat);
}

Matrix rnd(int d1, int d2, std::mt19937_64& g) {
    std::normal_distribution<double> n;
    Matrix m(d1, d2);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = n(g);
    return m / m.norm();
}

}  // namespace

TEST(Eta, SquaredValues) {
    const double lg = std::log(2.0 * 3000 / 0.01);
    EXPECT_NEAR(eta_squared(3000, 0.01), 1.0 / (2 * std::pow(2 + std::sqrt(2 * lg), 2)), 1e-16);
    EXPECT_NEAR(eta_squared(3000, 0.01), 0.009757, 5e-6);
    EXPECT_NEAR(eta_squared(1, 0.2), 1.0 / (2 * std::pow(2 + std::sqrt(2 * std::log(10.0)), 2)), 1e-16);
    EXPECT_NEAR(eta_squared(1, 0.2), 0.02909, 5e-6);
    EXPECT_LT(eta_squared(3000, 0.001), eta_squared(3000, 0.01));
    EXPECT_THROW(eta_squared(3000, 0.3), PreconditionError);
    EXPECT_THROW(eta_squared(0, 0.01), PreconditionError);
}

TEST(Eta, NllValues) {
    const double lg = std::log(600000.0);
    EXPECT_NEAR(eta_nll(3000, 0.01, LinkSpec::identity()), 1.0 / std::pow(std::sqrt(2 * lg) + 2, 2), 1e-16);
    EXPECT_NEAR(eta_nll(3000, 0.01, LinkSpec::identity()), 0.019515, 5e-6);
    const double e = std::exp(1.0), k = e / ((1 + e) * (1 + e));
    const double want = k / std::pow(std::sqrt(2 * 0.25 * lg) + 1.0 + 0.5, 2);
    EXPECT_NEAR(eta_nll(3000, 0.01, LinkSpec::logistic()), want, 1e-16);
    LinkSpec bad = LinkSpec::identity();
    bad.kappa_mu = 0.0;
    EXPECT_THROW(eta_nll(3000, 0.01, bad), PreconditionError);
}

TEST(Loss, Increments) {
    EXPECT_EQ(squared_loss(0.3, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(nll_loss(1.0, 1.0, LinkSpec::identity()), -0.5);
    EXPECT_NEAR(nll_loss(0.0, 0.0, LinkSpec::logistic()), std::log(2.0), 1e-15);
}

TEST(Predict, SingleExpert) {
    std::mt19937_64 g(1);
    const Matrix th = rnd(2, 3, g), x = rnd(2, 3, g);
    EwForecaster ew(pool_of({th}), 0.1, LossKind::squared);
    EXPECT_NEAR(ew.predict(x), (th.array() * x.array()).sum(), 1e-15);
}

TEST(Predict, EqualLossesGiveMean) {
    std::mt19937_64 g(2);
    std::vector<Matrix> ms;
    for (int i = 0; i < 7; ++i) ms.push_back(rnd(2, 2, g));
    const Matrix x = rnd(2, 2, g);
    EwForecaster ew(pool_of(ms), 0.5, LossKind::squared);
    ew.set_cumulative_losses(Vector::Constant(7, 3.25));
    double mean = 0;
    for (const auto& m : ms) mean += (m.array() * x.array()).sum();
    EXPECT_NEAR(ew.predict(x), mean / 7, 1e-15);
}

TEST(Predict, TwoExpertSoftmax) {
    Matrix a = Matrix::Zero(1, 2), b = Matrix::Zero(1, 2);
    a(0, 0) = 0.8;
    b(0, 1) = -0.6;
    const Matrix x = (Matrix(1, 2) << 1.0, 0.0).finished();
    EwForecaster ew(pool_of({a, b}), 1.0, LossKind::squared);
    ew.set_cumulative_losses((Vector(2) << 0.0, 10.0).finished());
    const double w1 = 1.0 / (1.0 + std::exp(-10.0));
    EXPECT_NEAR(ew.weights()(0), w1, 1e-15);
    EXPECT_NEAR(ew.predict(x), w1 * 0.8, 1e-15);
}

TEST(Update, SquaredAndNll) {
    Matrix a = Matrix::Zero(1, 1);
    a(0, 0) = 1.0;
    const Matrix x = Matrix::Constant(1, 1, 1.0);
    EwForecaster sq(pool_of({a}), 0.1, LossKind::squared);
    sq.update(x, 1.0);
    EXPECT_EQ(sq.cumulative_losses()(0), 0.0);
    EXPECT_EQ(sq.round(), 1);
    EwForecaster nl(pool_of({a}), 0.1, LossKind::nll, LinkSpec::identity());
    nl.update(x, 1.0);
    EXPECT_DOUBLE_EQ(nl.cumulative_losses()(0), -0.5);
    EwForecaster lg(pool_of({Matrix::Zero(1, 1)}), 0.1, LossKind::nll, LinkSpec::logistic());
    lg.update(x, 0.0);
    EXPECT_NEAR(lg.cumulative_losses()(0), std::log(2.0), 1e-15);
}

TEST(Invariants, WeightsRangeAndShift) {
    std::mt19937_64 g(4);
    std::vector<Matrix> ms;
    for (int i = 0; i < 40; ++i) ms.push_back(rnd(2, 2, g));
    EwForecaster ew(pool_of(ms), 0.7, LossKind::squared);
    std::normal_distribution<double> n;
    for (int t = 0; t < 200; ++t) {
        const Matrix x = rnd(2, 2, g);
        const Vector w = ew.weights();
        EXPECT_NEAR(w.sum(), 1.0, 1e-12);
        EXPECT_GE(w.minCoeff(), 0.0);
        const Vector f = ew.expert_predictions(x);
        const double p = ew.predict(x);
        EXPECT_GE(p, f.minCoeff() - 1e-15);
        EXPECT_LE(p, f.maxCoeff() + 1e-15);
        EwForecaster shifted = ew;
        shifted.shift_losses(123.456);
        EXPECT_NEAR(shifted.predict(x), p, 1e-12);
        ew.update(x, 0.3 + n(g));
    }
}

TEST(RegretVsExpert, Cases) {
    std::vector<double> y{0.1, -0.3, 0.7};
    std::vector<double> f{0.2, 0.2, 0.2};
    EXPECT_EQ(regret_vs_expert(f, f, y, LossKind::squared), 0.0);
    std::mt19937_64 g(5);
    std::normal_distribution<double> n;
    std::vector<double> yh(10), fe(10), yy(10);
    for (int i = 0; i < 10; ++i) yh[i] = n(g), fe[i] = n(g), yy[i] = n(g);
    double want = 0, want_nll = 0;
    for (int i = 0; i < 10; ++i) {
        want += (yy[i] - yh[i]) * (yy[i] - yh[i]) - (yy[i] - fe[i]) * (yy[i] - fe[i]);
        want_nll += (-yy[i] * yh[i] + std::log1p(std::exp(yh[i]))) - (-yy[i] * fe[i] + std::log1p(std::exp(fe[i])));
    }
    EXPECT_NEAR(regret_vs_expert(yh, fe, yy, LossKind::squared), want, 1e-12);
    EXPECT_NEAR(regret_vs_expert(yh, fe, yy, LossKind::nll, LinkSpec::logistic()), want_nll, 1e-12);
    std::vector<double> short_y{1.0};
    EXPECT_THROW(regret_vs_expert(yh, fe, short_y, LossKind::squared), DimensionMismatch);
}

TEST(RegretVsExpert, OneExpertPool) {
    std::mt19937_64 g(6);
    const Matrix th = rnd(2, 2, g) * 0.5;
    EwForecaster ew(pool_of({th}), 0.2, LossKind::squared);
    std::vector<double> yh, f, y;
    std::normal_distribution<double> n;
    for (int t = 0; t < 30; ++t) {
        const Matrix x = rnd(2, 2, g);
        yh.push_back(ew.predict(x));
        f.push_back((th.array() * x.array()).sum());
        y.push_back(f.back() + 0.1 * n(g));
        ew.update(x, y.back());
    }
    EXPECT_NEAR(regret_vs_expert(yh, f, y, LossKind::squared), 0.0, 1e-12);
}

// Best-expert regret per round shrinks with T. The pool is a coarse net: an
// eps = 1/T net is out of reach at this size (see README).
TEST(OnlineRegret, SublinearAgainstNet) {
    auto net = std::make_shared<const LowRankNet>(build_net(2, 2, 1, 0.25));
    std::vector<double> per_round;
    for (int T : {100, 250, 500}) {
        double acc = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 g(1000 + seed);
            std::normal_distribution<double> n;
            Vector u(2), v(2);
            u << n(g), n(g);
            v << n(g), n(g);
            const Matrix th = 0.8 * (u * v.transpose()) / (u * v.transpose()).norm();
            EwForecaster ew(net, eta_squared(T, 0.01), LossKind::squared);
            Vector expert_loss = Vector::Zero(net->size());
            double own = 0;
            for (int t = 0; t < T; ++t) {
                const Matrix x = rnd(2, 2, g);
                const double y = (th.array() * x.array()).sum() + 0.1 * n(g);
                const Vector f = ew.expert_predictions(x);
                own += (y - ew.predict_from(f)) * (y - ew.predict_from(f));
                expert_loss.array() += (y - f.array()).square();
                ew.update_from(f, y);
            }
            acc += (own - expert_loss.minCoeff()) / T;
        }
        per_round.push_back(acc / 20);
    }
    EXPECT_GT(per_round[0], per_round[1]);
    EXPECT_GT(per_round[1], per_round[2]);
}
