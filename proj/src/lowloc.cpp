#include "lrbandit/lowloc.hpp"

#include <algorithm>
#include <cmath>

namespace lrbandit {

double bt_schedule(BtSchedule kind, int t, const BtParams& p) {
    if (t < 0 || t > p.T) throw PreconditionError("bt_schedule: need 0 <= t <= T");
    const double eps = p.eps > 0 ? p.eps : 1.0 / p.T;
    const double lg = std::log(2.0 * p.T / p.delta);
    const double cover = static_cast<double>((p.d1 + p.d2 + 1) * p.r) * std::log(9.0 / eps);
    switch (kind) {
        case BtSchedule::lemma3: {
            const double a = 2.0 + std::sqrt(2.0 * lg);
            return 2.0 * cover * a * a + 2.0 * t * eps * (1.0 + std::sqrt(2.0 * lg));
        }
        case BtSchedule::lemma7: {
            const auto& l = p.link;
            const double a = std::sqrt(2.0 * l.R * l.R * lg) + 2.0 * l.c_mu + 2.0 * l.L_mu;
            return cover * a * a / l.kappa_mu + t * eps * a;
        }
        case BtSchedule::empirical:
            return std::max(0.0, p.empirical);
    }
    throw PreconditionError("bt_schedule: unknown kind");
}

namespace {

EwForecaster make_forecaster(const std::shared_ptr<const LowRankNet>& net, const LowLocConfig& c) {
    if (c.mode == LowLocMode::linear)
        return EwForecaster(net, eta_squared(c.horizon, c.delta), LossKind::squared);
    return EwForecaster(net, eta_nll(c.horizon, c.delta, c.link), LossKind::nll, c.link);
}

}  // namespace

LowLocAgent::LowLocAgent(std::shared_ptr<const LowRankNet> net, LowLocConfig cfg)
    : net_(std::move(net)), cfg_(cfg), ew_(make_forecaster(net_, cfg_)),
      conv_(net_->d1(), net_->d2()) {
    if (cfg_.mode == LowLocMode::linear && cfg_.link.kind != LinkKind::identity)
        throw PreconditionError("lowloc: linear mode takes the identity link");
    bt_params_ = BtParams{cfg_.horizon, cfg_.delta, net_->d1(), net_->d2(), net_->r(),
                          net_->eps(), cfg_.link, 0.0};
}

std::size_t LowLocAgent::select_arm(const ArmSet& arms) {
    if (arms.size() == 0) throw PreconditionError("select_arm: empty arm set");
    if (arms.d1() != net_->d1() || arms.d2() != net_->d2())
        throw DimensionMismatch("select_arm: arm shape mismatch");
    const Vector s = ucb_scores(confidence_set(), arms.stacked());
    awaiting_ = true;
    return static_cast<std::size_t>(argmax_lowest(s));
}

void LowLocAgent::observe(const Matrix& arm, double y) {
    if (!awaiting_) throw OrderError("observe called before select_arm");
    if (conv_.round() >= cfg_.horizon) throw OrderError("observe past the configured horizon");
    awaiting_ = false;
    const Vector f = ew_.expert_predictions(arm);
    // (a) predict from L_{t-1}
    last_yhat_ = ew_.predict_from(f);
    // (b) extend the conversion
    conv_.ingest(arm, last_yhat_);
    // (c) losses with the true reward
    ew_.update_from(f, y);
    forecaster_loss_ += ew_.loss(last_yhat_, y);
    emp_max_ = std::max(emp_max_, forecaster_loss_ - ew_.cumulative_losses().minCoeff());
    // (d) radius for C_t
    bt_params_.empirical = emp_max_;
    const BtSchedule kind = cfg_.schedule;
    bt_ = std::max(bt_, bt_schedule(kind, conv_.round(), bt_params_));
    radius_ = enclosing_radius(confidence_mode(), bt_, cfg_.delta, cfg_.link);
}

RegretTrace lowloc_run(const BanditInstance& inst, const ArmSet& arms,
                       std::shared_ptr<const LowRankNet> net, const LowLocConfig& cfg, std::uint64_t seed) {
    if (net->d1() != inst.d1() || net->d2() != inst.d2()) throw DimensionMismatch("lowloc: net shape mismatch");
    LowLocAgent agent(std::move(net), cfg);
    Rng rng = make_rng(seed, 0x52554e);
    RegretTrace trace;
    trace.algo = cfg.mode == LowLocMode::linear ? "lowloc" : "lowgloc";
    trace.seed = seed;
    for (int t = 0; t < cfg.horizon; ++t) {
        const std::size_t i = agent.select_arm(arms);
        const double y = pull(inst, arms[i], rng);
        trace.push(instant_regret(inst, arms, i));
        agent.observe(arms[i].matrix(), y);
    }
    return trace;
}

}  // namespace lrbandit
