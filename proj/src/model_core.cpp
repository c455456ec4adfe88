#include "gpi/model_core.hpp"

#include <cmath>
#include <string>

#include "gpi/errors.hpp"

namespace gpi {

void validate_design(const Eigen::MatrixXd& x) {
  if (x.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "design needs at least one column");
  if (x.rows() <= x.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "need n > p, got n=" + std::to_string(x.rows()) + " p=" + std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw Error(ErrorKind::DataError, "design contains non-finite entries");
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
  if (y_.size() != x_.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "len(y)=" + std::to_string(y_.size()) + " but X has " + std::to_string(x_.rows()) + " rows");
  }
  validate_design(x_);
  if (!y_.allFinite()) throw Error(ErrorKind::DataError, "response contains non-finite entries");
}

Dataset Dataset::with_intercept() const {
  Eigen::MatrixXd x(x_.rows(), x_.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(x_.cols()) = x_;
  return {std::move(x), y_};
}

LinearDesign::LinearDesign(Eigen::MatrixXd x) : x_(std::move(x)) {
  validate_design(x_);
  const Eigen::Index n = x_.rows();
  const Eigen::Index p = x_.cols();
  qr_.compute(x_);
  r_ = qr_.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  // X and R share singular values.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r_);
  const auto& sv = svd.singularValues();
  condition_ratio_ = sv(0) > 0.0 ? sv(p - 1) / sv(0) : 0.0;
  if (!(condition_ratio_ >= kRankTolerance)) {
    throw Error(ErrorKind::RankDeficient,
                "design is not of full column rank (sigma_min/sigma_max = " + std::to_string(condition_ratio_) + ")");
  }

  const Eigen::MatrixXd q_thin = qr_.householderQ() * Eigen::MatrixXd::Identity(n, p);
  leverages_ = q_thin.rowwise().squaredNorm();
}

Eigen::VectorXd LinearDesign::solve_normal(const Eigen::VectorXd& v) const {
  const auto upper = r_.triangularView<Eigen::Upper>();
  Eigen::VectorXd z = upper.transpose().solve(v);
  return upper.solve(z);
}

Eigen::VectorXd LinearDesign::solve(const Eigen::VectorXd& y) const {
  if (y.size() != n()) throw Error(ErrorKind::DimensionMismatch, "response length does not match design");
  return qr_.solve(y);
}

Eigen::VectorXd LinearDesign::refit(const Eigen::VectorXd& beta, const Eigen::VectorXd& e) const {
  if (e.size() != n()) throw Error(ErrorKind::DimensionMismatch, "residual length does not match design");
  return beta + solve_normal(x_.transpose() * e);
}

Eigen::VectorXd LinearDesign::projection_weights(const Eigen::VectorXd& xf) const {
  if (xf.size() != p()) {
    throw Error(ErrorKind::DimensionMismatch,
                "x_f has length " + std::to_string(xf.size()) + ", design has p=" + std::to_string(p()));
  }
  return x_ * solve_normal(xf);
}

FittedModel fit_ols(const Dataset& data) {
  return fit_ols(std::make_shared<const LinearDesign>(data.x()), data.y());
}

FittedModel fit_ols(std::shared_ptr<const LinearDesign> design, const Eigen::VectorXd& y) {
  if (!y.allFinite()) throw Error(ErrorKind::DataError, "response contains non-finite entries");
  FittedModel m;
  m.beta_hat = design->solve(y);
  m.y = y;
  m.leverages = design->leverages();
  m.raw_residuals = y - design->x() * m.beta_hat;
  const double floor = kExactFitTolerance * static_cast<double>(y.size()) * y.cwiseAbs().maxCoeff();
  if (m.raw_residuals.cwiseAbs().maxCoeff() <= floor) m.raw_residuals.setZero();
  m.residual_mean = m.raw_residuals.mean();
  m.centered_residuals = m.raw_residuals.array() - m.residual_mean;
  m.sigma_hat_sq = m.centered_residuals.squaredNorm() / static_cast<double>(y.size());

  if (m.leverages.maxCoeff() < 1.0 - kLeverageOneTolerance) {
    Eigen::VectorXd loo = m.raw_residuals.array() / (1.0 - m.leverages.array());
    loo.array() -= loo.mean();
    m.predictive = std::move(loo);
  }
  m.design = std::move(design);
  return m;
}

Eigen::VectorXd predictive_residuals(const FittedModel& model) {
  if (!model.predictive) {
    Eigen::Index i = 0;
    model.leverages.maxCoeff(&i);
    throw Error(ErrorKind::LeverageOne, "leave-one-out residual undefined: h_" + std::to_string(i) + " = " +
                                            std::to_string(model.leverages(i)));
  }
  return *model.predictive;
}

DesignSummary design_summary(const Dataset& data, const Eigen::VectorXd& xf) { return design_summary(data.x(), xf); }

DesignSummary design_summary(const Eigen::MatrixXd& x, const Eigen::VectorXd& xf) {
  validate_design(x);
  if (xf.size() != x.cols()) throw Error(ErrorKind::DimensionMismatch, "x_f length does not match p");
  const double n = static_cast<double>(x.rows());
  DesignSummary s;
  s.a_matrix = x.transpose() * x / n;
  s.b_vector = x.colwise().mean().transpose();
  s.xf = xf;
  s.n = x.rows();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.a_matrix, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (!(ev(0) > 0.0) || ev(0) / ev(ev.size() - 1) < LinearDesign::kRankTolerance * LinearDesign::kRankTolerance) {
    throw Error(ErrorKind::RankDeficient, "X^T X / n is not positive definite");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s.a_matrix);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::RankDeficient, "Cholesky of X^T X / n failed");
  const Eigen::VectorXd a_inv_xf = llt.solve(xf);
  s.quad_aa = std::max(0.0, xf.dot(a_inv_xf));
  s.quad_ab = a_inv_xf.dot(s.b_vector);
  return s;
}

}  // namespace gpi
