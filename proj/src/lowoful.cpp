#include "lrbandit/lowoful.hpp"

#include <algorithm>
#include <cmath>

namespace lrbandit {

RotationMap RotationMap::identity(int d1, int d2, int r) {
    return RotationMap{Matrix::Identity(d1, d1), Matrix::Identity(d2, d2), r};
}

RotationMap RotationMap::from_subspace(const RecoveredSubspace& rec) {
    RotationMap m;
    m.r = rec.r;
    m.U_full.resize(rec.U_hat.rows(), rec.U_hat.cols() + rec.U_perp.cols());
    m.U_full << rec.U_hat, rec.U_perp;
    m.V_full.resize(rec.V_hat.rows(), rec.V_hat.cols() + rec.V_perp.cols());
    m.V_full << rec.V_hat, rec.V_perp;
    return m;
}

Vector rotate_and_vectorize(const Matrix& x, const RotationMap& map) {
    const Eigen::Index d1 = map.U_full.rows();
    const Eigen::Index d2 = map.V_full.rows();
    if (x.rows() != d1 || x.cols() != d2) throw DimensionMismatch("rotate: arm shape mismatch");
    const Eigen::Index r = map.r;
    const Matrix xp = map.U_full.transpose() * x * map.V_full;
    Vector out(d1 * d2);
    Eigen::Index pos = 0;
    auto put = [&](Eigen::Index r0, Eigen::Index nr, Eigen::Index c0, Eigen::Index nc) {
        for (Eigen::Index j = 0; j < nc; ++j)
            for (Eigen::Index i = 0; i < nr; ++i) out(pos++) = xp(r0 + i, c0 + j);
    };
    put(0, r, 0, r);
    put(r, d1 - r, 0, r);
    put(0, r, r, d2 - r);
    put(r, d1 - r, r, d2 - r);
    return out;
}

Matrix rotate_arm_set(const ArmSet& arms, const RotationMap& map) {
    Matrix out(static_cast<Eigen::Index>(arms.d1()) * arms.d2(), static_cast<Eigen::Index>(arms.size()));
    for (std::size_t i = 0; i < arms.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = rotate_and_vectorize(arms[i].matrix(), map);
    return out;
}

LowOfulAgent::LowOfulAgent(LowOfulParams p) : p_(p) {
    if (p_.dim < 1 || p_.k < 0 || p_.k > p_.dim) throw PreconditionError("lowoful: need 0 <= k <= dim");
    if (!(p_.lambda > 0 && p_.lambda_perp > 0)) throw PreconditionError("lowoful: regularizers must be positive");
    if (!(p_.delta > 0 && p_.delta < 1)) throw PreconditionError("lowoful: delta must be in (0,1)");
    if (!(p_.noise_scale > 0)) throw PreconditionError("lowoful: noise scale must be positive");
    V_ = lambda_diagonal().asDiagonal();
    xty_ = Vector::Zero(p_.dim);
    theta_ = Vector::Zero(p_.dim);
    llt_.compute(V_);
    log_det_lambda_ = p_.k * std::log(p_.lambda) + (p_.dim - p_.k) * std::log(p_.lambda_perp);
}

Vector LowOfulAgent::lambda_diagonal() const {
    Vector d(p_.dim);
    d.head(p_.k).setConstant(p_.lambda);
    d.tail(p_.dim - p_.k).setConstant(p_.lambda_perp);
    return d;
}

double LowOfulAgent::log_det_ratio() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum() - log_det_lambda_;
}

double lowoful_beta(const LowOfulAgent& agent) {
    const auto& p = agent.params();
    const double ld = agent.log_det_ratio() - 2.0 * std::log(p.delta);
    if (!std::isfinite(ld)) throw PreconditionError("lowoful_beta: V_t is not positive definite");
    const double s = p.noise_scale * std::sqrt(std::max(0.0, ld)) + std::sqrt(p.lambda) * p.B + std::sqrt(p.lambda_perp) * p.B_perp;
    return s * s;
}

std::size_t LowOfulAgent::select(const Matrix& arms) const {
    if (arms.cols() == 0) throw PreconditionError("lowoful: empty arm set");
    if (arms.rows() != p_.dim) throw DimensionMismatch("lowoful: arm dimension mismatch");
    const Matrix z = llt_.matrixL().solve(arms);
    const Vector width = z.colwise().norm().transpose();
    const Vector score = arms.transpose() * theta_ + std::sqrt(lowoful_beta(*this)) * width;
    return static_cast<std::size_t>(argmax_lowest(score));
}

void LowOfulAgent::update(const Vector& a, double y) {
    if (a.size() != p_.dim) throw DimensionMismatch("lowoful: arm dimension mismatch");
    V_.noalias() += a * a.transpose();
    xty_ += y * a;
    llt_.rankUpdate(a, 1.0);
    theta_ = llt_.solve(xty_);
    ++round_;
}

LowEstrParams lowestr_params(int d1, int d2, const LowEstrConfig& cfg) {
    LowEstrParams p;
    const int T2 = cfg.T - cfg.T1;
    p.k = cfg.r * (d1 + d2 - cfg.r);
    p.B = 1.0;
    const double dd = d1 + d2;
    p.B_perp = cfg.sigma * cfg.sigma * dd * dd * dd * cfg.r / (cfg.T1 * cfg.omega_r * cfg.omega_r);
    p.lambda = 1.0;
    p.lambda_perp = T2 / (p.k * std::log(1.0 + T2 / p.lambda));
    return p;
}

namespace {

constexpr std::uint64_t kRunStream = 0x52554e;

void run_stage2(LowOfulAgent& agent, const Matrix& vec_arms, const BanditInstance& inst, const ArmSet& arms,
                int rounds, Rng& rng, RegretTrace& trace) {
    for (int t = 0; t < rounds; ++t) {
        const std::size_t i = agent.select(vec_arms);
        const double y = pull(inst, arms[i], rng);
        trace.push(instant_regret(inst, arms, i));
        agent.update(vec_arms.col(static_cast<Eigen::Index>(i)), y);
    }
}

}  // namespace

LowEstrResult lowestr_run(const BanditInstance& inst, const ArmSet& arms, const LowEstrConfig& cfg,
                          std::uint64_t seed) {
    if (!(cfg.T1 >= 1 && cfg.T1 < cfg.T)) throw PreconditionError("lowestr: need 1 <= T1 < T");
    if (arms.d1() != inst.d1() || arms.d2() != inst.d2()) throw DimensionMismatch("lowestr: arm shape mismatch");
    const int d1 = inst.d1(), d2 = inst.d2();
    Rng rng = make_rng(seed, kRunStream);
    LowEstrResult res;
    res.trace.algo = "lowestr";
    res.trace.seed = seed;

    // stage 1: uniform exploration
    RecoveryProblem prob;
    prob.d1 = d1;
    prob.d2 = d2;
    prob.lambda = cfg.lambda >= 0 ? cfg.lambda : default_lambda(cfg.T1);
    std::uniform_int_distribution<std::size_t> pick(0, arms.size() - 1);
    for (int t = 0; t < cfg.T1; ++t) {
        const std::size_t i = pick(rng);
        prob.xs.push_back(arms[i].matrix());
        prob.ys.push_back(pull(inst, arms[i], rng));
        res.trace.push(instant_regret(inst, arms, i));
    }
    const SolverResult sol = solve_nuclear_ls(prob, cfg.solver);
    res.subspace = extract_subspace(sol.theta, cfg.r);
    res.report.lambda = prob.lambda;
    res.report.iters = sol.iters;
    res.report.objective = sol.objective;
    res.report.frob_error = (sol.theta - inst.theta_star()).norm();
    res.report.subspace_error = subspace_error(res.subspace, inst);

    // stage 2: LowOFUL on rotated arms
    const LowEstrParams lp = lowestr_params(d1, d2, cfg);
    LowOfulAgent agent(LowOfulParams{d1 * d2, lp.k, lp.lambda, lp.lambda_perp, lp.B, lp.B_perp, cfg.delta,
                                     cfg.noise_scale});
    const Matrix vec_arms = rotate_arm_set(arms, RotationMap::from_subspace(res.subspace));
    run_stage2(agent, vec_arms, inst, arms, cfg.T - cfg.T1, rng, res.trace);
    return res;
}

RegretTrace oful_run(const BanditInstance& inst, const ArmSet& arms, int T, double delta, std::uint64_t seed,
                     double noise_scale) {
    if (T < 1) throw PreconditionError("oful: T must be >= 1");
    const int p = inst.d1() * inst.d2();
    Rng rng = make_rng(seed, kRunStream);
    RegretTrace trace;
    trace.algo = "oful";
    trace.seed = seed;
    LowOfulAgent agent(LowOfulParams{p, p, 1.0, 1.0, 1.0, 0.0, delta, noise_scale});
    run_stage2(agent, arms.stacked(), inst, arms, T, rng, trace);
    return trace;
}

RegretTrace lowoful_oracle_run(const BanditInstance& inst, const ArmSet& arms, int T, double delta,
                               std::uint64_t seed, double noise_scale) {
    if (T < 1) throw PreconditionError("lowoful: T must be >= 1");
    const int d1 = inst.d1(), d2 = inst.d2(), r = inst.rank_r();
    Rng rng = make_rng(seed, kRunStream);
    RegretTrace trace;
    trace.algo = "lowoful";
    trace.seed = seed;
    const RecoveredSubspace truth = extract_subspace(inst.theta_star(), r);
    const int k = r * (d1 + d2 - r);
    const double lperp = T / (k * std::log(1.0 + T));
    LowOfulAgent agent(LowOfulParams{d1 * d2, k, 1.0, lperp, 1.0, 0.0, delta, noise_scale});
    run_stage2(agent, rotate_arm_set(arms, RotationMap::from_subspace(truth)), inst, arms, T, rng, trace);
    return trace;
}

int tuned_t1(int d1, int d2, int r, int T, double omega_r) {
    if (T < 2 || !(omega_r > 0)) throw PreconditionError("tuned_t1: need T >= 2 and omega_r > 0");
    const double v = std::pow(d1 + d2, 1.5) * std::sqrt(static_cast<double>(r) * T) / omega_r;
    return static_cast<int>(std::clamp(std::ceil(v), 1.0, static_cast<double>(T - 1)));
}

}  // namespace lrbandit
