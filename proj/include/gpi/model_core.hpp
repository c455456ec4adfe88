#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

namespace gpi {

/// Design matrix X (n x p) with response y (length n).
///
/// Invariants checked at construction: n > p >= 1, len(y) == n, all entries
/// finite. Full column rank is checked when the design is factorised.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  [[nodiscard]] const Eigen::MatrixXd& x() const noexcept { return x_; }
  [[nodiscard]] const Eigen::VectorXd& y() const noexcept { return y_; }
  [[nodiscard]] Eigen::Index n() const noexcept { return x_.rows(); }
  [[nodiscard]] Eigen::Index p() const noexcept { return x_.cols(); }

  /// Copy of this dataset with a ones column prepended.
  [[nodiscard]] Dataset with_intercept() const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
};

/// Validates a design matrix on its own (n > p >= 1, finite entries).
void validate_design(const Eigen::MatrixXd& x);

/// Householder QR of a fixed design, reused for every refit against it.
///
/// Bootstrap replicates only change the response, so all of them share this
/// factorisation: solve_normal() costs O(p^2) and refit() O(np).
class LinearDesign {
 public:
  /// Throws RankDeficient when sigma_min / sigma_max < kRankTolerance.
  explicit LinearDesign(Eigen::MatrixXd x);

  static constexpr double kRankTolerance = 1e-12;

  [[nodiscard]] const Eigen::MatrixXd& x() const noexcept { return x_; }
  [[nodiscard]] Eigen::Index n() const noexcept { return x_.rows(); }
  [[nodiscard]] Eigen::Index p() const noexcept { return x_.cols(); }

  /// Diagonal of the hat matrix, h_i = x_i^T (X^T X)^{-1} x_i.
  [[nodiscard]] const Eigen::VectorXd& leverages() const noexcept { return leverages_; }

  /// (X^T X)^{-1} v, via two triangular solves against R.
  [[nodiscard]] Eigen::VectorXd solve_normal(const Eigen::VectorXd& v) const;

  /// Least-squares coefficients for response y.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

  /// beta + (X^T X)^{-1} X^T e, i.e. the coefficients refit on X beta + e.
  [[nodiscard]] Eigen::VectorXd refit(const Eigen::VectorXd& beta, const Eigen::VectorXd& e) const;

  /// w = X (X^T X)^{-1} x_f, so that x_f^T (X^T X)^{-1} X^T e = w^T e.
  [[nodiscard]] Eigen::VectorXd projection_weights(const Eigen::VectorXd& xf) const;

  /// sigma_min / sigma_max of X.
  [[nodiscard]] double condition_ratio() const noexcept { return condition_ratio_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd leverages_;
  double condition_ratio_{0.0};
};

/// OLS fit with every residual flavour the bootstrap consumes.
struct FittedModel {
  std::shared_ptr<const LinearDesign> design;
  Eigen::VectorXd y;
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd leverages;
  Eigen::VectorXd raw_residuals;       // y - X beta_hat
  Eigen::VectorXd centered_residuals;  // raw minus their mean
  /// Centered leave-one-out residuals; empty when some h_i >= 1 - 1e-10.
  std::optional<Eigen::VectorXd> predictive;
  double residual_mean{0.0};
  double sigma_hat_sq{0.0};

  [[nodiscard]] Eigen::Index n() const noexcept { return design->n(); }
  [[nodiscard]] Eigen::Index p() const noexcept { return design->p(); }
};

/// Plug-in limits of the design plus the two quadratic forms in x_f.
struct DesignSummary {
  Eigen::MatrixXd a_matrix;  // X^T X / n
  Eigen::VectorXd b_vector;  // column means of X
  Eigen::VectorXd xf;
  double quad_aa{0.0};  // x_f^T A^{-1} x_f
  double quad_ab{0.0};  // x_f^T A^{-1} b
  Eigen::Index n{0};
};

inline constexpr double kLeverageOneTolerance = 1e-10;

/// Residuals all within n * kExactFitTolerance * max|y| of zero are rounding
/// noise of an exact fit and are stored as exact zeros.
inline constexpr double kExactFitTolerance = 1e-15;

[[nodiscard]] FittedModel fit_ols(const Dataset& data);

/// Fit against an existing factorisation; used when X is fixed and y varies.
[[nodiscard]] FittedModel fit_ols(std::shared_ptr<const LinearDesign> design, const Eigen::VectorXd& y);

/// Centered predictive residuals r_hat. Throws LeverageOne when undefined.
[[nodiscard]] Eigen::VectorXd predictive_residuals(const FittedModel& model);

[[nodiscard]] DesignSummary design_summary(const Dataset& data, const Eigen::VectorXd& xf);
[[nodiscard]] DesignSummary design_summary(const Eigen::MatrixXd& x, const Eigen::VectorXd& xf);

}  // namespace gpi
