#include "lrbandit/recovery.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace lrbandit {

void RecoveryProblem::validate() const {
    if (xs.empty() || xs.size() != ys.size())
        throw PreconditionError("recovery: need >= 1 sample with matching rewards");
    if (!(lambda >= 0)) throw PreconditionError("recovery: lambda must be nonnegative");
    for (const auto& x : xs)
        if (x.rows() != d1 || x.cols() != d2) throw DimensionMismatch("recovery: sample shape mismatch");
}

double nuclear_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

double RecoveryProblem::objective(const Matrix& theta) const {
    double sq = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const double e = ys[t] - frob_inner(xs[t], theta);
        sq += e * e;
    }
    return sq / (2.0 * static_cast<double>(xs.size())) + lambda * nuclear_norm(theta);
}

double default_lambda(int T1) {
    if (T1 < 1) throw PreconditionError("default_lambda: T1 must be >= 1");
    return 0.01 * std::sqrt(1.0 / T1);
}

Matrix nuclear_prox(const Matrix& m, double tau) {
    if (!(tau >= 0)) throw PreconditionError("nuclear_prox: tau must be nonnegative");
    if (tau == 0.0) return m;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

namespace {

// objective pieces on the stacked design: rows of A are vec(X_t)^T
struct Smooth {
    Matrix A;
    Vector y;
    double n;

    double value(const Vector& th) const { return (y - A * th).squaredNorm() / (2.0 * n); }
    Vector grad(const Vector& th) const { return -A.transpose() * (y - A * th) / n; }
};

}  // namespace

SolverResult solve_nuclear_ls(const RecoveryProblem& p, const SolverConfig& cfg) {
    p.validate();
    if (!(cfg.step > 0)) throw PreconditionError("solver: step must be positive");
    const Eigen::Index D = static_cast<Eigen::Index>(p.d1) * p.d2;
    Smooth f{Matrix(static_cast<Eigen::Index>(p.xs.size()), D), Vector(static_cast<Eigen::Index>(p.ys.size())),
             static_cast<double>(p.xs.size())};
    for (std::size_t t = 0; t < p.xs.size(); ++t) {
        f.A.row(static_cast<Eigen::Index>(t)) = vec(p.xs[t]).transpose();
        f.y(static_cast<Eigen::Index>(t)) = p.ys[t];
    }
    double step = cfg.step;
    if (cfg.lipschitz_step) {
        const Matrix gram = f.A.transpose() * f.A / f.n;
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
        const double L = es.eigenvalues().maxCoeff();
        step = L > 0 ? 1.0 / L : cfg.step;
    }
    auto total = [&](const Vector& th) {
        return f.value(th) + p.lambda * nuclear_norm(unvec(th, p.d1, p.d2));
    };

    Vector th = Vector::Zero(D);
    double obj = total(th);
    SolverResult res;
    if (cfg.record_objective) res.objective_history.push_back(obj);
    int it = 0;
    while (it < cfg.max_iters) {
        const Vector g = f.grad(th);
        const Matrix cand = nuclear_prox(unvec(th - step * g, p.d1, p.d2), step * p.lambda);
        const Vector nth = vec(cand);
        const double nobj = total(nth);
        if (!std::isfinite(nobj))
            throw DivergenceError("solver: objective is not finite; try a smaller step");
        if (nobj > obj + 1e-12 * std::max(1.0, std::abs(obj))) {
            // step too long for this design: shrink and retry without accepting
            step *= 0.5;
            if (step < 1e-14) throw DivergenceError("solver: step collapsed; try a smaller step");
            continue;
        }
        ++it;
        const double change = (nth - th).norm();
        assert(nobj <= obj + 1e-12 * std::max(1.0, std::abs(obj)));
        th = nth;
        obj = nobj;
        if (cfg.record_objective) res.objective_history.push_back(obj);
        if (change < cfg.tol) break;
    }
    res.theta = unvec(th, p.d1, p.d2);
    res.iters = it;
    res.objective = obj;
    res.step = step;
    return res;
}

RecoveredSubspace extract_subspace(const Matrix& theta_hat, int r) {
    const int d1 = static_cast<int>(theta_hat.rows());
    const int d2 = static_cast<int>(theta_hat.cols());
    if (r < 1 || r > std::min(d1, d2)) throw PreconditionError("extract_subspace: r out of range");
    Eigen::JacobiSVD<Matrix> svd(theta_hat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RecoveredSubspace rec;
    rec.theta_hat = theta_hat;
    rec.r = r;
    rec.singular_values = svd.singularValues();
    rec.U_hat = svd.matrixU().leftCols(r);
    rec.U_perp = svd.matrixU().rightCols(d1 - r);
    rec.V_hat = svd.matrixV().leftCols(r);
    rec.V_perp = svd.matrixV().rightCols(d2 - r);
    return rec;
}

double subspace_error(const RecoveredSubspace& rec, const BanditInstance& instance) {
    if (rec.theta_hat.rows() != instance.d1() || rec.theta_hat.cols() != instance.d2())
        throw DimensionMismatch("subspace_error: shape mismatch");
    const int r = instance.rank_r();
    Eigen::JacobiSVD<Matrix> svd(instance.theta_star(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix us = svd.matrixU().leftCols(r);
    const Matrix vs = svd.matrixV().leftCols(r);
    return (rec.U_perp.transpose() * us).norm() * (rec.V_perp.transpose() * vs).norm();
}

double rsc_margin(const std::vector<Matrix>& samples, const Matrix& theta, double c1, double c2) {
    if (samples.empty()) throw PreconditionError("rsc_margin: no samples");
    const double n = static_cast<double>(samples.size());
    const double dd = static_cast<double>(theta.size());
    double lhs = 0.0;
    for (const auto& x : samples) {
        if (x.rows() != theta.rows() || x.cols() != theta.cols())
            throw DimensionMismatch("rsc_margin: shape mismatch");
        const double v = frob_inner(x, theta);
        lhs += v * v;
    }
    lhs /= n;
    const double nuc = nuclear_norm(theta);
    const double rhs = c1 / dd * theta.squaredNorm() -
                       c2 * static_cast<double>(theta.rows() + theta.cols()) / (n * dd) * nuc * nuc;
    return lhs - rhs;
}

RscReport rsc_check(const std::vector<Matrix>& samples, int n_probes, double c1, double c2,
                    std::uint64_t seed) {
    if (n_probes < 1) throw PreconditionError("rsc_check: n_probes must be >= 1");
    if (samples.empty()) throw PreconditionError("rsc_check: no samples");
    const auto d1 = samples.front().rows();
    const auto d2 = samples.front().cols();
    const double n = static_cast<double>(samples.size());
    Matrix A(static_cast<Eigen::Index>(samples.size()), d1 * d2);
    for (std::size_t i = 0; i < samples.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = vec(samples[i]).transpose();

    Rng rng = make_rng(seed, 0x525343);
    std::normal_distribution<double> g(0.0, 1.0);
    RscReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    const double dd = static_cast<double>(d1 * d2);
    for (int k = 0; k < n_probes; ++k) {
        Matrix th(d1, d2);
        if (k % 2 == 0) {
            for (Eigen::Index i = 0; i < th.size(); ++i) th.data()[i] = g(rng);
        } else {
            // low rank probe
            const Eigen::Index rk = 1 + (k / 2) % std::min<Eigen::Index>(3, std::min(d1, d2));
            Matrix a(d1, rk), b(d2, rk);
            for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
            for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
            th = a * b.transpose();
        }
        th /= th.norm();
        const double lhs = (A * vec(th)).squaredNorm() / n;
        const double nuc = nuclear_norm(th);
        const double rhs = c1 / dd * th.squaredNorm() - c2 * static_cast<double>(d1 + d2) / (n * dd) * nuc * nuc;
        const double margin = lhs - rhs;  // same as rsc_margin, with A reused
        if (margin < 0) ++rep.violations;
        rep.min_margin = std::min(rep.min_margin, margin);
    }
    return rep;
}

std::string report_to_json(const RecoveryReport& r) {
    nlohmann::json j;
    j["lambda"] = r.lambda;
    j["iters"] = r.iters;
    j["objective"] = r.objective;
    j["frob_error"] = r.frob_error;
    j["subspace_error"] = r.subspace_error;
    return j.dump();
}

}  // namespace lrbandit
