#pragma once

#include "lrbandit/model.hpp"

#include <string>
#include <vector>

namespace lrbandit {

struct RecoveryProblem {
    std::vector<Matrix> xs;
    std::vector<double> ys;
    int d1 = 0, d2 = 0;
    double lambda = 0.0;

    void validate() const;
    // (1/2n) sum (y - <X, Theta>)^2 + lambda ||Theta||_nuc
    double objective(const Matrix& theta) const;
};

// 0.01 * sqrt(1 / T1)
double default_lambda(int T1);

struct SolverConfig {
    double step = 0.01;
    bool lipschitz_step = false;  // use 1/L of the smooth part instead of `step`
    int max_iters = 5000;
    double tol = 1e-7;
    bool record_objective = false;
};

struct SolverResult {
    Matrix theta;
    int iters = 0;
    double objective = 0.0;
    double step = 0.0;
    std::vector<double> objective_history;  // accepted iterates, when recorded
};

Matrix nuclear_prox(const Matrix& m, double tau);
double nuclear_norm(const Matrix& m);

SolverResult solve_nuclear_ls(const RecoveryProblem& problem, const SolverConfig& cfg = {});

struct RecoveredSubspace {
    Matrix theta_hat;
    Matrix U_hat, V_hat, U_perp, V_perp;
    Vector singular_values;
    int r = 0;
};

RecoveredSubspace extract_subspace(const Matrix& theta_hat, int r);

// ||U_perp^T U*||_F * ||V_perp^T V*||_F
double subspace_error(const RecoveredSubspace& rec, const BanditInstance& instance);


struct RscReport {
    int violations = 0;
    double min_margin = 0.0;
};

// lhs - rhs of the RSC inequality for one probe
double rsc_margin(const std::vector<Matrix>& samples, const Matrix& theta, double c1, double c2);

RscReport rsc_check(const std::vector<Matrix>& samples, int n_probes, double c1, double c2,
                    std::uint64_t seed = 0);

struct RecoveryReport {
    double lambda = 0.0;
    int iters = 0;
    double objective = 0.0;
    double frob_error = 0.0;
    double subspace_error = 0.0;
};

std::string report_to_json(const RecoveryReport& r);

}  // namespace lrbandit
