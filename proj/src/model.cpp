#include "lrbandit/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lrbandit {

LinkSpec LinkSpec::identity() {
    return LinkSpec{LinkKind::identity, 1.0, 1.0, 0.0, 1.0};
}

LinkSpec LinkSpec::logistic() {
    const double e = std::exp(1.0);
    return LinkSpec{LinkKind::logistic, 0.25, e / ((1.0 + e) * (1.0 + e)), 0.5, 0.5};
}

double LinkSpec::mean(double z) const {
    if (kind == LinkKind::identity) return z;
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double ez = std::exp(z);
    return ez / (1.0 + ez);
}

double LinkSpec::cumulant(double z) const {
    if (kind == LinkKind::identity) return 0.5 * z * z;
    // log(1 + e^z) without overflow
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

std::string LinkSpec::name() const {
    return kind == LinkKind::identity ? "identity" : "logistic";
}

void LinkSpec::validate() const {
    if (!(kappa_mu > 0)) throw PreconditionError("link: kappa_mu must be positive");
    if (!(L_mu > 0)) throw PreconditionError("link: L_mu must be positive");
    if (c_mu < 0 || R < 0) throw PreconditionError("link: c_mu and R must be nonnegative");
    if (R > std::sqrt(L_mu) + 1e-12) throw PreconditionError("link: R exceeds sqrt(L_mu)");
}

LinkSpec link_from_name(const std::string& name) {
    if (name == "identity") return LinkSpec::identity();
    if (name == "logistic") return LinkSpec::logistic();
    throw PreconditionError("unknown link '" + name + "'");
}

ArmMatrix::ArmMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.size() == 0) throw DimensionMismatch("arm: empty matrix");
    if (!m_.allFinite()) throw PreconditionError("arm: non-finite entry");
    if (m_.norm() > 1.0 + 1e-9) throw PreconditionError("arm: Frobenius norm exceeds 1");
}

ArmSet::ArmSet(std::vector<ArmMatrix> arms) : arms_(std::move(arms)) {
    if (arms_.empty()) throw PreconditionError("arm set: empty");
    d1_ = arms_.front().rows();
    d2_ = arms_.front().cols();
    stacked_.resize(static_cast<Eigen::Index>(d1_) * d2_, static_cast<Eigen::Index>(arms_.size()));
    for (std::size_t i = 0; i < arms_.size(); ++i) {
        if (arms_[i].rows() != d1_ || arms_[i].cols() != d2_)
            throw DimensionMismatch("arm set: arms with different shapes");
        stacked_.col(static_cast<Eigen::Index>(i)) = vec(arms_[i].matrix());
    }
}

int numerical_rank(const Matrix& m, double tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    int k = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++k;
    return k;
}

BanditInstance::BanditInstance(Matrix theta_star, int rank_r, double omega_r, double sigma,
                               LinkSpec link)
    : theta_(std::move(theta_star)), r_(rank_r), omega_(omega_r), sigma_(sigma), link_(link) {
    if (theta_.size() == 0) throw InvalidInstance("instance: empty theta_star");
    if (!theta_.allFinite()) throw InvalidInstance("instance: non-finite theta_star");
    const int dmin = static_cast<int>(std::min(theta_.rows(), theta_.cols()));
    if (r_ < 1 || r_ > dmin) throw InvalidInstance("instance: rank out of range");
    if (!(omega_ > 0)) throw InvalidInstance("instance: omega_r must be positive");
    if (!(sigma_ >= 0 && sigma_ <= 1)) throw InvalidInstance("instance: sigma must be in [0,1]");
    if (theta_.norm() > 1.0 + 1e-12) throw InvalidInstance("instance: ||theta*||_F > 1");
    Eigen::JacobiSVD<Matrix> svd(theta_);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-8) ++rank;
    if (rank > r_) throw InvalidInstance("instance: numerical rank exceeds declared rank");
    if (s(r_ - 1) < omega_ - 1e-9)
        throw InvalidInstance("instance: r-th singular value below omega_r");
    link_.validate();
}

double BanditInstance::mean_reward(const Matrix& arm) const {
    if (arm.rows() != theta_.rows() || arm.cols() != theta_.cols())
        throw DimensionMismatch("arm shape does not match instance");
    return link_.mean(frob_inner(arm, theta_));
}

BanditInstance make_diag_instance(int d1, int d2, int r, double omega_r, double sigma,
                                  LinkSpec link) {
    if (d1 < 1 || d2 < 1 || r < 1 || r > std::min(d1, d2))
        throw InvalidInstance("diag instance: rank out of range");
    if (!(omega_r > 0 && omega_r <= 0.5)) throw InvalidInstance("diag instance: omega_r outside (0, 0.5]");
    Matrix theta = Matrix::Zero(d1, d2);
    // leading 0.5 entries, then omega_r up to rank r (so sigma_r = omega_r)
    const int halves = std::min(2, r - 1);
    for (int i = 0; i < r; ++i) theta(i, i) = i < halves ? 0.5 : omega_r;
    return BanditInstance(std::move(theta), r, omega_r, sigma, link);
}

ArmSet sample_unit_arm_set(int d1, int d2, int n_arms, std::uint64_t seed) {
    if (n_arms < 1) throw PreconditionError("arm set: n_arms must be >= 1");
    if (d1 < 1 || d2 < 1) throw DimensionMismatch("arm set: bad dims");
    Rng rng = make_rng(seed, 0x41524d53);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ArmMatrix> arms;
    arms.reserve(static_cast<std::size_t>(n_arms));
    for (int k = 0; k < n_arms; ++k) {
        Matrix m(d1, d2);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = g(rng);
        double n = m.norm();
        while (n == 0.0) {  // practically never
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
            n = m.norm();
        }
        arms.emplace_back(m / n);
    }
    return ArmSet(std::move(arms));
}

double pull(const BanditInstance& instance, const Matrix& arm, Rng& rng) {
    const double mu = instance.mean_reward(arm);
    if (instance.sigma() == 0.0) return mu;
    std::normal_distribution<double> g(0.0, instance.sigma());
    return mu + g(rng);
}

std::pair<std::size_t, double> optimal_value(const BanditInstance& instance, const ArmSet& arms) {
    if (arms.size() == 0) throw PreconditionError("optimal_value: empty arm set");
    if (arms.d1() != instance.d1() || arms.d2() != instance.d2())
        throw DimensionMismatch("optimal_value: arm set shape does not match instance");
    const Vector scores = arms.stacked().transpose() * vec(instance.theta_star());
    // exact comparison here: regret must be 0 only at a true maximizer
    std::size_t best = 0;
    for (std::size_t i = 1; i < arms.size(); ++i)
        if (scores(static_cast<Eigen::Index>(i)) > scores(static_cast<Eigen::Index>(best))) best = i;
    return {best, instance.link().mean(scores(static_cast<Eigen::Index>(best)))};
}

double instant_regret(const BanditInstance& instance, const ArmSet& arms, std::size_t chosen) {
    if (chosen >= arms.size()) throw PreconditionError("instant_regret: index out of range");
    const double best = optimal_value(instance, arms).second;
    const double got = instance.mean_reward(arms[chosen]);
    return std::max(0.0, best - got);
}

ArmMatrix causal_rank1_features(const std::vector<Vector>& phi, const std::vector<Vector>& varphi) {
    if (phi.empty() || phi.size() != varphi.size())
        throw DimensionMismatch("causal features: phi/varphi lists must be non-empty and aligned");
    const auto d1 = phi.front().size();
    const auto d2 = varphi.front().size();
    Matrix b = Matrix::Zero(d1, d2);
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (phi[j].size() != d1 || varphi[j].size() != d2)
            throw DimensionMismatch("causal features: inconsistent factor dims");
        if (phi[j].norm() > 1 + 1e-12 || varphi[j].norm() > 1 + 1e-12)
            throw PreconditionError("causal features: factor norm exceeds 1");
        b += phi[j] * varphi[j].transpose();
    }
    return ArmMatrix(b / static_cast<double>(phi.size()));
}

namespace {

Vector random_unit(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    do {
        for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

}  // namespace

AdditiveModel causal_additive_instance(int K, int d1, int d2, std::uint64_t seed) {
    if (K < 1 || d1 < 1 || d2 < 1) throw PreconditionError("additive instance: K, d1, d2 must be >= 1");
    Rng rng = make_rng(seed, 0x43415553);
    std::vector<Matrix> blocks;
    Matrix theta(d1, static_cast<Eigen::Index>(d2) * K);
    for (int k = 0; k < K; ++k) {
        const Vector w = random_unit(rng, d1);
        const Vector t = random_unit(rng, d2);
        Matrix blk = w * t.transpose() / static_cast<double>(K);
        theta.middleCols(static_cast<Eigen::Index>(k) * d2, d2) = blk;
        blocks.push_back(std::move(blk));
    }
    const int rank = std::min(K, std::min(d1, d2 * K));
    Eigen::JacobiSVD<Matrix> svd(theta);
    const double omega = svd.singularValues()(rank - 1);
    BanditInstance inst(theta, rank, omega, 0.01, LinkSpec::identity());
    auto features = [K, d1, d2](const std::vector<Matrix>& bs) {
        if (static_cast<int>(bs.size()) != K) throw DimensionMismatch("additive features: need K blocks");
        Matrix x(d1, static_cast<Eigen::Index>(d2) * K);
        for (int k = 0; k < K; ++k) {
            if (bs[k].rows() != d1 || bs[k].cols() != d2)
                throw DimensionMismatch("additive features: block shape");
            x.middleCols(static_cast<Eigen::Index>(k) * d2, d2) = bs[k];
        }
        return ArmMatrix(x / static_cast<double>(K));
    };
    return AdditiveModel{std::move(inst), std::move(blocks), K, features};
}

std::string instance_to_json(const BanditInstance& instance) {
    nlohmann::json j;
    j["d1"] = instance.d1();
    j["d2"] = instance.d2();
    j["r"] = instance.rank_r();
    j["omega_r"] = instance.omega_r();
    j["sigma"] = instance.sigma();
    j["link"] = instance.link().name();
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(instance.theta_star().size()));
    for (int i = 0; i < instance.d1(); ++i)
        for (int k = 0; k < instance.d2(); ++k) rows.push_back(instance.theta_star()(i, k));
    j["theta_star"] = rows;
    return j.dump();
}

BanditInstance instance_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int d1 = j.at("d1").get<int>();
    const int d2 = j.at("d2").get<int>();
    const auto vals = j.at("theta_star").get<std::vector<double>>();
    if (static_cast<long>(vals.size()) != static_cast<long>(d1) * d2)
        throw DimensionMismatch("instance json: theta_star length does not match d1*d2");
    Matrix theta(d1, d2);
    for (int i = 0; i < d1; ++i)
        for (int k = 0; k < d2; ++k) theta(i, k) = vals[static_cast<std::size_t>(i * d2 + k)];
    return BanditInstance(theta, j.at("r").get<int>(), j.at("omega_r").get<double>(),
                          j.at("sigma").get<double>(), link_from_name(j.at("link").get<std::string>()));
}

}  // namespace lrbandit
