#pragma once

#include "lrbandit/model.hpp"

#include <span>

namespace lrbandit {

enum class ConfidenceMode { linear, glb };

double beta_linear(double B, double delta);
double beta_glb(double B, double delta, const LinkSpec& link);

// Squared radius of the ellipsoid around theta_hat that encloses the set:
// linear: 1 + beta_linear, glb: beta_glb.
double enclosing_radius(ConfidenceMode mode, double B, double delta, const LinkSpec& link);

// {theta : (theta - center)^T shape (theta - center) <= radius}
class EllipsoidSet {
public:
    EllipsoidSet(Vector center, Matrix shape, double radius);
    EllipsoidSet(Vector center, Matrix shape, Matrix shape_inv, double radius);

    const Vector& center() const { return center_; }
    const Matrix& shape() const { return shape_; }
    const Matrix& shape_inverse() const { return shape_inv_; }
    double radius() const { return radius_; }

    // ||a||_{V^{-1}}
    double width(const Vector& a) const;
    double quad(const Vector& theta) const;

private:
    Vector center_;
    Matrix shape_;
    Matrix shape_inv_;
    double radius_;
};

// max of <x, Theta> over the ellipsoid
double ucb_score(const EllipsoidSet& set, const Matrix& x);
// same for every column of a stacked arm matrix
Vector ucb_scores(const EllipsoidSet& set, const Matrix& stacked);

class ConversionState {
public:
    ConversionState(int d1, int d2, int resolve_every = 256);

    void ingest(const Matrix& x, double y_hat);

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int round() const { return round_; }
    const Matrix& V() const { return V_; }
    const Matrix& V_inverse() const { return V_inv_; }
    const Vector& b() const { return b_; }
    const Vector& theta_hat() const { return theta_; }
    Matrix theta_hat_matrix() const { return unvec(theta_, d1_, d2_); }

    // ||Theta||^2 + sum_s (yhat_s - <Theta, X_s>)^2 via the quadratic form
    double penalized_residual(const Matrix& theta) const;
    double log_det() const;

    EllipsoidSet ellipsoid(double radius) const;

private:
    void resolve();

    int d1_, d2_;
    int resolve_every_;
    int round_ = 0;
    Matrix V_;
    Matrix V_inv_;
    Vector b_;
    Vector theta_;
    double yhat_sq_ = 0.0;
};

// literal membership test; histories must cover every ingested round
bool contains(const ConversionState& state, ConfidenceMode mode, double B, double delta,
              const Matrix& theta, std::span<const double> y_hats, std::span<const Matrix> xs,
              const LinkSpec& link = LinkSpec::identity());

}  // namespace lrbandit
