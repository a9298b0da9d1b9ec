#pragma once

#include "lrbandit/covering.hpp"
#include "lrbandit/model.hpp"

#include <memory>
#include <span>

namespace lrbandit {

enum class LossKind { squared, nll };

double eta_squared(int T, double delta);
double eta_nll(int T, double delta, const LinkSpec& link);

double squared_loss(double z, double y);
// -y z + m(z) on the natural parameter
double nll_loss(double z, double y, const LinkSpec& link);

class EwForecaster {
public:
    EwForecaster(std::shared_ptr<const LowRankNet> pool, double eta, LossKind kind,
                 LinkSpec link = LinkSpec::identity());

    // f_i = <Theta_i, X> for every expert
    Vector expert_predictions(const Matrix& x) const;

    double predict(const Matrix& x) const;
    double predict_from(const Vector& f) const;

    void update(const Matrix& x, double y);
    void update_from(const Vector& f, double y);

    Vector weights() const;
    const Vector& cumulative_losses() const { return losses_; }
    void set_cumulative_losses(const Vector& l);
    // shifts every cumulative loss by c (weights are unaffected)
    void shift_losses(double c) { losses_.array() += c; }
    double loss(double z, double y) const;

    double eta() const { return eta_; }
    LossKind kind() const { return kind_; }
    int round() const { return round_; }
    const LowRankNet& pool() const { return *pool_; }

private:
    std::shared_ptr<const LowRankNet> pool_;
    double eta_;
    LossKind kind_;
    LinkSpec link_;
    Vector losses_;
    int round_ = 0;
};

// rho_t for one expert: sum_s loss(yhat_s) - loss(f_s)
double regret_vs_expert(std::span<const double> yhat, std::span<const double> f,
                        std::span<const double> y, LossKind kind,
                        const LinkSpec& link = LinkSpec::identity());

}  // namespace lrbandit
