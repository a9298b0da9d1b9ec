#pragma once

#include "lrbandit/confidence.hpp"
#include "lrbandit/covering.hpp"
#include "lrbandit/ew_forecaster.hpp"
#include "lrbandit/model.hpp"
#include "lrbandit/trace.hpp"

#include <memory>

namespace lrbandit {

enum class BtSchedule { lemma3, lemma7, empirical };
enum class LowLocMode { linear, glm };

struct BtParams {
    int T = 1;
    double delta = 0.01;
    int d1 = 1, d2 = 1, r = 1;
    double eps = 0.0;  // 0 means 1/T
    LinkSpec link = LinkSpec::identity();
    double empirical = 0.0;  // running max of measured rho_t (empirical kind)
};

double bt_schedule(BtSchedule kind, int t, const BtParams& p);

struct LowLocConfig {
    int horizon = 1;
    double delta = 0.01;
    LowLocMode mode = LowLocMode::linear;
    LinkSpec link = LinkSpec::identity();
    BtSchedule schedule = BtSchedule::lemma3;
};

class LowLocAgent {
public:
    LowLocAgent(std::shared_ptr<const LowRankNet> net, LowLocConfig cfg);

    std::size_t select_arm(const ArmSet& arms);
    void observe(const Matrix& arm, double y);

    int round() const { return conv_.round(); }
    double radius() const { return radius_; }
    double bt() const { return bt_; }
    // largest forecaster regret against a net expert seen so far
    double empirical_regret() const { return emp_max_; }
    double last_prediction() const { return last_yhat_; }
    EllipsoidSet confidence_set() const { return conv_.ellipsoid(radius_); }
    const ConversionState& conversion() const { return conv_; }
    const EwForecaster& forecaster() const { return ew_; }
    const LowLocConfig& config() const { return cfg_; }
    ConfidenceMode confidence_mode() const {
        return cfg_.mode == LowLocMode::linear ? ConfidenceMode::linear : ConfidenceMode::glb;
    }

private:
    std::shared_ptr<const LowRankNet> net_;
    LowLocConfig cfg_;
    EwForecaster ew_;
    ConversionState conv_;
    BtParams bt_params_;
    double radius_ = 1.0;  // C_0 is the unit Frobenius ball
    double bt_ = 0.0;
    double emp_max_ = 0.0;
    double forecaster_loss_ = 0.0;
    double last_yhat_ = 0.0;
    bool awaiting_ = false;
};

// one LowLOC / LowGLOC episode of cfg.horizon rounds
RegretTrace lowloc_run(const BanditInstance& instance, const ArmSet& arms,
                       std::shared_ptr<const LowRankNet> net, const LowLocConfig& cfg, std::uint64_t seed);

}  // namespace lrbandit
