#include "lrbandit/ew_forecaster.hpp"

#include <cmath>

namespace lrbandit {

namespace {

void check_horizon(int T, double delta) {
    if (T < 1) throw PreconditionError("eta: horizon must be >= 1");
    if (!(delta > 0 && delta < 0.25)) throw PreconditionError("eta: delta must be in (0, 0.25)");
}

}  // namespace

double eta_squared(int T, double delta) {
    check_horizon(T, delta);
    const double a = 2.0 + std::sqrt(2.0 * std::log(2.0 * T / delta));
    return 1.0 / (2.0 * a * a);
}

double eta_nll(int T, double delta, const LinkSpec& link) {
    check_horizon(T, delta);
    link.validate();
    const double a = std::sqrt(2.0 * link.R * link.R * std::log(2.0 * T / delta)) + 2.0 * link.c_mu +
                     2.0 * link.L_mu;
    return link.kappa_mu / (a * a);
}

double squared_loss(double z, double y) { return (y - z) * (y - z); }

double nll_loss(double z, double y, const LinkSpec& link) { return -y * z + link.cumulant(z); }

EwForecaster::EwForecaster(std::shared_ptr<const LowRankNet> pool, double eta, LossKind kind,
                           LinkSpec link)
    : pool_(std::move(pool)), eta_(eta), kind_(kind), link_(link) {
    if (!pool_ || pool_->size() == 0) throw PreconditionError("forecaster: empty expert pool");
    if (!(eta_ > 0)) throw PreconditionError("forecaster: eta must be positive");
    losses_ = Vector::Zero(pool_->size());
}

Vector EwForecaster::expert_predictions(const Matrix& x) const { return pool_->predictions(x); }

Vector EwForecaster::weights() const {
    // max-shift: the smallest loss gets exponent 0
    const double lmin = losses_.minCoeff();
    Vector w = (-eta_ * (losses_.array() - lmin)).exp().matrix();
    return w / w.sum();
}

double EwForecaster::predict_from(const Vector& f) const {
    const Vector w = weights();
    return w.dot(f);
}

double EwForecaster::predict(const Matrix& x) const { return predict_from(expert_predictions(x)); }

void EwForecaster::set_cumulative_losses(const Vector& l) {
    if (l.size() != losses_.size()) throw DimensionMismatch("forecaster: loss vector size mismatch");
    if (!l.allFinite()) throw PreconditionError("forecaster: non-finite losses");
    losses_ = l;
}

double EwForecaster::loss(double z, double y) const {
    return kind_ == LossKind::squared ? squared_loss(z, y) : nll_loss(z, y, link_);
}

void EwForecaster::update_from(const Vector& f, double y) {
    if (!std::isfinite(y)) throw PreconditionError("forecaster: non-finite observation");
    if (f.size() != losses_.size()) throw DimensionMismatch("forecaster: prediction count mismatch");
    if (kind_ == LossKind::squared) {
        losses_.array() += (y - f.array()).square();
    } else {
        for (Eigen::Index i = 0; i < f.size(); ++i) losses_(i) += nll_loss(f(i), y, link_);
    }
    ++round_;
}

void EwForecaster::update(const Matrix& x, double y) { update_from(expert_predictions(x), y); }

double regret_vs_expert(std::span<const double> yhat, std::span<const double> f,
                        std::span<const double> y, LossKind kind, const LinkSpec& link) {
    if (yhat.size() != f.size() || f.size() != y.size())
        throw DimensionMismatch("regret_vs_expert: history lengths differ");
    double rho = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
        if (kind == LossKind::squared)
            rho += squared_loss(yhat[s], y[s]) - squared_loss(f[s], y[s]);
        else
            rho += nll_loss(yhat[s], y[s], link) - nll_loss(f[s], y[s], link);
    }
    return rho;
}

}  // namespace lrbandit
