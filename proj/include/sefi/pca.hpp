#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace sefi {

/// Linear projection onto the leading principal axes of a sample covariance.
template <typename Scalar>
struct PcaModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector mean;                      // C
  Matrix components;                // D×C, orthonormal rows
  Vector explained_variance_ratio;  // D, non-increasing
  Vector spectrum_ratio;            // C, ratios of every axis (retained or not)
  Scalar variance_target = Scalar(0.95);
  bool degenerate = false;          // zero total variance; components is a zero row

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.rows(); }

  /// components · (x − mean) for each row of `rows`.
  template <typename Derived>
  Matrix project(const Eigen::MatrixBase<Derived>& rows) const {
    return (rows.template cast<Scalar>().rowwise() - mean.transpose()) * components.transpose();
  }

  /// mean + scores · components for each row of `scores`.
  template <typename Derived>
  Matrix reconstruct(const Eigen::MatrixBase<Derived>& scores) const {
    return (scores.template cast<Scalar>() * components).rowwise() + mean.transpose();
  }
};

/// Smallest D whose cumulative ratio reaches `target`; ratios must be sorted
/// descending. Falls back to the full length when rounding keeps the sum
/// below target.
template <typename Derived>
Eigen::Index retained_dimension(const Eigen::MatrixBase<Derived>& ratios, typename Derived::Scalar target) {
  typename Derived::Scalar cumulative(0);
  for (Eigen::Index i = 0; i < ratios.size(); ++i) {
    cumulative += ratios(i);
    if (cumulative >= target) return i + 1;
  }
  return ratios.size();
}

/// Fits PCA on the rows of `samples` (one observation per row) and keeps the
/// fewest leading components whose explained variance reaches `variance_target`.
template <typename Scalar, typename Derived>
PcaModel<Scalar> fit_pca_rows(const Eigen::MatrixBase<Derived>& samples, Scalar variance_target) {
  using Matrix = typename PcaModel<Scalar>::Matrix;
  using Vector = typename PcaModel<Scalar>::Vector;
  if (samples.rows() < 2) throw std::invalid_argument("PCA needs at least 2 samples");
  if (!(variance_target > Scalar(0)) || variance_target > Scalar(1))
    throw std::invalid_argument("variance target must be in (0, 1]");

  const Eigen::Index n = samples.rows();
  const Eigen::Index c = samples.cols();
  PcaModel<Scalar> model;
  model.variance_target = variance_target;
  const Matrix x = samples.template cast<Scalar>();
  model.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - model.mean.transpose();
  const Matrix cov = (centered.adjoint() * centered) / Scalar(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("covariance eigendecomposition failed");
  // Ascending from the solver; flip to descending.
  Vector values = eig.eigenvalues().reverse().cwiseMax(Scalar(0));
  Matrix vectors = eig.eigenvectors().rowwise().reverse();

  const Scalar total = values.sum();
  if (!(total > Scalar(0))) {
    model.degenerate = true;
    model.components = Matrix::Zero(1, c);
    model.explained_variance_ratio = Vector::Zero(1);
    model.spectrum_ratio = Vector::Zero(c);
    return model;
  }
  model.spectrum_ratio = values / total;
  const Eigen::Index d = retained_dimension(model.spectrum_ratio, variance_target);

  model.components.resize(d, c);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector axis = vectors.col(i);
    Eigen::Index pivot = 0;
    axis.cwiseAbs().maxCoeff(&pivot);
    if (axis(pivot) < Scalar(0)) axis = -axis;
    model.components.row(i) = axis.transpose();
  }
  model.explained_variance_ratio = model.spectrum_ratio.head(d);
  return model;
}

}  // namespace sefi
