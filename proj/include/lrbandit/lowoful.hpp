#pragma once

#include "lrbandit/model.hpp"
#include "lrbandit/recovery.hpp"
#include "lrbandit/trace.hpp"

namespace lrbandit {

struct RotationMap {
    Matrix U_full;  // [U_hat U_perp]
    Matrix V_full;  // [V_hat V_perp]
    int r = 0;

    static RotationMap identity(int d1, int d2, int r);
    static RotationMap from_subspace(const RecoveredSubspace& rec);
};

// X' = U^T X V, then blocks [11; 21; 12; 22] each column-major
Vector rotate_and_vectorize(const Matrix& x, const RotationMap& map);
// stacked (d1*d2) x K
Matrix rotate_arm_set(const ArmSet& arms, const RotationMap& map);

struct LowOfulParams {
    int dim = 1;
    int k = 1;  // coordinates regularized by lambda; the rest get lambda_perp
    double lambda = 1.0;
    double lambda_perp = 1.0;
    double B = 1.0;
    double B_perp = 0.0;
    double delta = 0.01;
    double noise_scale = 1.0;  // multiplies the log-det term; 1 is the published radius
};

class LowOfulAgent {
public:
    explicit LowOfulAgent(LowOfulParams p);

    // columns of `arms` are vectorized arms; ties go to the lowest index
    std::size_t select(const Matrix& arms) const;
    void update(const Vector& a, double y);

    int round() const { return round_; }
    const LowOfulParams& params() const { return p_; }
    const Vector& theta_hat() const { return theta_; }
    const Matrix& V() const { return V_; }
    Vector lambda_diagonal() const;
    // log(|V_t| / |Lambda|)
    double log_det_ratio() const;

private:
    LowOfulParams p_;
    Matrix V_;
    Vector xty_;
    Vector theta_;
    Eigen::LLT<Matrix> llt_;
    double log_det_lambda_ = 0.0;
    int round_ = 0;
};

double lowoful_beta(const LowOfulAgent& agent);

struct LowEstrConfig {
    int T = 3000;
    int T1 = 200;
    int r = 1;
    double omega_r = 0.5;
    double sigma = 0.01;
    double delta = 0.01;
    double lambda = -1.0;  // nuclear penalty; negative means 0.01 sqrt(1/T1)
    double noise_scale = 1.0;
    SolverConfig solver{0.01, true, 5000, 1e-7};
};

struct LowEstrParams {
    int k = 0;
    double B = 1.0;
    double B_perp = 0.0;
    double lambda = 1.0;
    double lambda_perp = 1.0;
};

LowEstrParams lowestr_params(int d1, int d2, const LowEstrConfig& cfg);

struct LowEstrResult {
    RegretTrace trace;
    RecoveryReport report;
    RecoveredSubspace subspace;
};

LowEstrResult lowestr_run(const BanditInstance& instance, const ArmSet& arms, const LowEstrConfig& cfg,
                          std::uint64_t seed);

// isotropic baseline: lambda = 1, ||theta|| <= 1
RegretTrace oful_run(const BanditInstance& instance, const ArmSet& arms, int T, double delta,
                     std::uint64_t seed, double noise_scale = 1.0);

// LowOFUL on the true subspace of theta* (B_perp = 0)
RegretTrace lowoful_oracle_run(const BanditInstance& instance, const ArmSet& arms, int T, double delta,
                               std::uint64_t seed, double noise_scale = 1.0);

// T1 ~ (d1+d2)^{3/2} sqrt(r T) / omega_r, clamped to [1, T-1]
int tuned_t1(int d1, int d2, int r, int T, double omega_r);

}  // namespace lrbandit
