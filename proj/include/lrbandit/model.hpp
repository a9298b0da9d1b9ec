#pragma once

#include "lrbandit/common.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace lrbandit {

enum class LinkKind { identity, logistic };

struct LinkSpec {
    LinkKind kind = LinkKind::identity;
    double L_mu = 1.0;
    double kappa_mu = 1.0;
    double c_mu = 0.0;
    double R = 1.0;

    static LinkSpec identity();
    static LinkSpec logistic();

    double mean(double z) const;      // mu(z)
    double cumulant(double z) const;  // m(z), m' = mu
    std::string name() const;
    void validate() const;
};

LinkSpec link_from_name(const std::string& name);

// A d1 x d2 arm with ||X||_F <= 1 (+1e-9) and finite entries.
class ArmMatrix {
public:
    explicit ArmMatrix(Matrix m);
    const Matrix& matrix() const { return m_; }
    operator const Matrix&() const { return m_; }
    int rows() const { return static_cast<int>(m_.rows()); }
    int cols() const { return static_cast<int>(m_.cols()); }

private:
    Matrix m_;
};

class ArmSet {
public:
    explicit ArmSet(std::vector<ArmMatrix> arms);
    std::size_t size() const { return arms_.size(); }
    const ArmMatrix& operator[](std::size_t i) const { return arms_[i]; }
    int d1() const { return d1_; }
    int d2() const { return d2_; }
    // (d1*d2) x K, column i = vec(arm i)
    const Matrix& stacked() const { return stacked_; }
    auto begin() const { return arms_.begin(); }
    auto end() const { return arms_.end(); }

private:
    std::vector<ArmMatrix> arms_;
    int d1_ = 0;
    int d2_ = 0;
    Matrix stacked_;
};

class BanditInstance {
public:
    BanditInstance(Matrix theta_star, int rank_r, double omega_r, double sigma, LinkSpec link);

    const Matrix& theta_star() const { return theta_; }
    int rank_r() const { return r_; }
    double omega_r() const { return omega_; }
    double sigma() const { return sigma_; }
    const LinkSpec& link() const { return link_; }
    int d1() const { return static_cast<int>(theta_.rows()); }
    int d2() const { return static_cast<int>(theta_.cols()); }

    double mean_reward(const Matrix& arm) const;

private:
    Matrix theta_;
    int r_;
    double omega_;
    double sigma_;
    LinkSpec link_;
};

struct RewardSample {
    std::size_t arm_index = 0;
    double reward = 0.0;
    int round = 0;
};

BanditInstance make_diag_instance(int d1, int d2, int r, double omega_r, double sigma = 0.01,
                                  LinkSpec link = LinkSpec::identity());

ArmSet sample_unit_arm_set(int d1, int d2, int n_arms, std::uint64_t seed);

double pull(const BanditInstance& instance, const Matrix& arm, Rng& rng);

std::pair<std::size_t, double> optimal_value(const BanditInstance& instance, const ArmSet& arms);

double instant_regret(const BanditInstance& instance, const ArmSet& arms, std::size_t chosen);

// sum_j phi_j varphi_j^T / |Z|; phi_j = phi(Z_j, a) for the action of interest
ArmMatrix causal_rank1_features(const std::vector<Vector>& phi, const std::vector<Vector>& varphi);

struct AdditiveModel {
    BanditInstance instance;
    std::vector<Matrix> blocks;  // column blocks of theta_star
    int K = 1;
    // [B_1 ... B_K] / K
    std::function<ArmMatrix(const std::vector<Matrix>&)> features;
};

AdditiveModel causal_additive_instance(int K, int d1, int d2, std::uint64_t seed);

// theta_star serialized row-major
std::string instance_to_json(const BanditInstance& instance);
BanditInstance instance_from_json(const std::string& text);

int numerical_rank(const Matrix& m, double tol = 1e-8);

}  // namespace lrbandit
