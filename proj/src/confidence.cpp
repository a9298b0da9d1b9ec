#include "lrbandit/confidence.hpp"

#include <cassert>
#include <cmath>

namespace lrbandit {

namespace {

void check_beta_args(double B, double delta) {
    if (!(B >= 0)) throw PreconditionError("beta: B_t must be nonnegative");
    if (!(delta > 0 && delta <= 0.25)) throw PreconditionError("beta: delta must be in (0, 0.25]");
}

}  // namespace

double beta_linear(double B, double delta) {
    check_beta_args(B, delta);
    return 1.0 + 2.0 * B + 32.0 * std::log((std::sqrt(8.0) + std::sqrt(1.0 + B)) / delta);
}

double beta_glb(double B, double delta, const LinkSpec& link) {
    check_beta_args(B, delta);
    link.validate();
    const double k = link.kappa_mu;
    const double R = link.R;
    const double arg = (R * std::sqrt(8.0 / (k * k)) + std::sqrt(2.0 * B / k + 1.0)) / delta;
    return 2.0 + 4.0 * B / k + 32.0 * R * R / (k * k) * std::log(arg);
}

double enclosing_radius(ConfidenceMode mode, double B, double delta, const LinkSpec& link) {
    return mode == ConfidenceMode::linear ? 1.0 + beta_linear(B, delta) : beta_glb(B, delta, link);
}

EllipsoidSet::EllipsoidSet(Vector center, Matrix shape, double radius)
    : center_(std::move(center)), shape_(std::move(shape)), radius_(radius) {
    if (!(radius_ >= 0)) throw PreconditionError("ellipsoid: negative radius");
    if (shape_.rows() != shape_.cols() || shape_.rows() != center_.size())
        throw DimensionMismatch("ellipsoid: shape/center mismatch");
    Eigen::LLT<Matrix> llt(shape_);
    if (llt.info() != Eigen::Success) throw PreconditionError("ellipsoid: shape not positive definite");
    shape_inv_ = llt.solve(Matrix::Identity(shape_.rows(), shape_.cols()));
}

EllipsoidSet::EllipsoidSet(Vector center, Matrix shape, Matrix shape_inv, double radius)
    : center_(std::move(center)), shape_(std::move(shape)), shape_inv_(std::move(shape_inv)),
      radius_(radius) {
    if (!(radius_ >= 0)) throw PreconditionError("ellipsoid: negative radius");
    if (shape_.rows() != center_.size() || shape_inv_.rows() != center_.size())
        throw DimensionMismatch("ellipsoid: shape/center mismatch");
}

double EllipsoidSet::width(const Vector& a) const {
    return std::sqrt(std::max(0.0, a.dot(shape_inv_ * a)));
}

double EllipsoidSet::quad(const Vector& theta) const {
    const Vector d = theta - center_;
    return d.dot(shape_ * d);
}

double ucb_score(const EllipsoidSet& set, const Matrix& x) {
    if (x.size() != set.center().size()) throw DimensionMismatch("ucb_score: arm size mismatch");
    const Vector a = vec(x);
    return a.dot(set.center()) + std::sqrt(set.radius()) * set.width(a);
}

Vector ucb_scores(const EllipsoidSet& set, const Matrix& stacked) {
    if (stacked.rows() != set.center().size()) throw DimensionMismatch("ucb_scores: arm size mismatch");
    const Matrix va = set.shape_inverse() * stacked;
    const Vector quad = (stacked.array() * va.array()).colwise().sum().transpose();
    return stacked.transpose() * set.center() + std::sqrt(set.radius()) * quad.cwiseMax(0.0).cwiseSqrt();
}

ConversionState::ConversionState(int d1, int d2, int resolve_every)
    : d1_(d1), d2_(d2), resolve_every_(resolve_every) {
    if (d1 < 1 || d2 < 1) throw DimensionMismatch("conversion: bad dims");
    const Eigen::Index n = static_cast<Eigen::Index>(d1) * d2;
    V_ = Matrix::Identity(n, n);
    V_inv_ = Matrix::Identity(n, n);
    b_ = Vector::Zero(n);
    theta_ = Vector::Zero(n);
}

void ConversionState::ingest(const Matrix& x, double y_hat) {
    if (x.rows() != d1_ || x.cols() != d2_) throw DimensionMismatch("ingest: arm shape mismatch");
    const Vector a = vec(x);
    V_.noalias() += a * a.transpose();
    b_ += y_hat * a;
    yhat_sq_ += y_hat * y_hat;
    ++round_;
    if (resolve_every_ > 0 && round_ % resolve_every_ == 0) {
        resolve();
        return;
    }
    // rank-one (Sherman-Morrison) step
    const Vector va = V_inv_ * a;
    const Vector k = va / (1.0 + a.dot(va));
    theta_ += k * (y_hat - a.dot(theta_));
    V_inv_.noalias() -= k * va.transpose();
}

void ConversionState::resolve() {
    Eigen::LLT<Matrix> llt(V_);
    assert(llt.info() == Eigen::Success);
    V_inv_ = llt.solve(Matrix::Identity(V_.rows(), V_.cols()));
    theta_ = llt.solve(b_);
}

double ConversionState::penalized_residual(const Matrix& theta) const {
    const Vector t = vec(theta);
    return t.dot(V_ * t) - 2.0 * b_.dot(t) + yhat_sq_;
}

double ConversionState::log_det() const {
    Eigen::LLT<Matrix> llt(V_);
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

EllipsoidSet ConversionState::ellipsoid(double radius) const {
    return EllipsoidSet(theta_, V_, V_inv_, radius);
}

bool contains(const ConversionState& state, ConfidenceMode mode, double B, double delta,
              const Matrix& theta, std::span<const double> y_hats, std::span<const Matrix> xs,
              const LinkSpec& link) {
    if (y_hats.size() != xs.size()) throw DimensionMismatch("contains: history lengths differ");
    if (static_cast<int>(xs.size()) != state.round())
        throw DimensionMismatch("contains: history does not match the ingested rounds");
    if (theta.rows() != state.d1() || theta.cols() != state.d2())
        throw DimensionMismatch("contains: theta shape mismatch");
    double resid = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const double e = y_hats[s] - frob_inner(theta, xs[s]);
        resid += e * e;
    }
    if (mode == ConfidenceMode::linear)
        return theta.squaredNorm() + resid <= 1.0 + beta_linear(B, delta);
    return theta.norm() + resid <= beta_glb(B, delta, link);
}

}  // namespace lrbandit
