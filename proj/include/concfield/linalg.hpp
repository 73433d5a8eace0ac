#pragma once

// Small dense symmetric-matrix toolkit shared by every module.  All matrices
// in this library are real, symmetric and of modest dimension, so everything
// is built on dense eigendecompositions.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace concfield {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative tolerance for the symmetry check on inputs.
inline constexpr double kSymmetryRelTol = 1e-12;
// Eigenvalue margins down to this value still count as satisfied.
inline constexpr double kMarginTol = -1e-10;

[[nodiscard]] inline bool is_symmetric(const Matrix& a,
                                       double rel_tol = kSymmetryRelTol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// Dense symmetric real matrix.  Symmetry is a constructor invariant; positive
// (semi)definiteness is a role checked where it is actually required.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("SpdMatrix: matrix must be square");
    if (!is_symmetric(m_))
      throw std::invalid_argument(
          "SpdMatrix: matrix must be symmetric (relative tolerance 1e-12)");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
  }

  [[nodiscard]] static SpdMatrix identity(int p) {
    return SpdMatrix(Matrix::Identity(p, p));
  }

  [[nodiscard]] static SpdMatrix diagonal(const Vector& d) {
    return SpdMatrix(Matrix(d.asDiagonal()));
  }

  [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] const Matrix& mat() const { return m_; }
  [[nodiscard]] double trace() const { return m_.trace(); }

  [[nodiscard]] Vector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  [[nodiscard]] double min_eigenvalue() const {
    return eigenvalues().minCoeff();
  }

  [[nodiscard]] double max_eigenvalue() const {
    return eigenvalues().maxCoeff();
  }

  // U f(lambda) U^T with f applied to the spectrum.
  template <class F>
  [[nodiscard]] Matrix spectral_map(F&& f) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    Vector lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) lam[i] = f(lam[i]);
    Matrix out = es.eigenvectors() * lam.asDiagonal() *
                 es.eigenvectors().transpose();
    return ((out + out.transpose()) / 2.0).eval();
  }

  // Symmetric square root; requires positive semidefiniteness.
  [[nodiscard]] Matrix sqrt() const {
    check_psd("SpdMatrix::sqrt");
    return spectral_map([](double l) { return std::sqrt(std::max(l, 0.0)); });
  }

  // Symmetric inverse square root; requires positive definiteness.
  [[nodiscard]] Matrix inverse_sqrt() const {
    check_pd("SpdMatrix::inverse_sqrt");
    return spectral_map([](double l) { return 1.0 / std::sqrt(l); });
  }

  // x^T M^{-1} x via a robust Cholesky solve; requires positive definiteness.
  [[nodiscard]] double inverse_quadratic_form(const Vector& x) const {
    check_pd("SpdMatrix::inverse_quadratic_form");
    Eigen::LDLT<Matrix> ldlt(m_);
    return x.dot(ldlt.solve(x));
  }

 private:
  void check_pd(const char* who) const {
    const double lam_min = min_eigenvalue();
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (lam_min <= 1e-14 * scale)
      throw std::domain_error(std::string(who) +
                              ": matrix is numerically singular");
  }
  void check_psd(const char* who) const {
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (min_eigenvalue() < kMarginTol * scale)
      throw std::domain_error(std::string(who) +
                              ": matrix is not positive semidefinite");
  }

  Matrix m_;
};

// Smallest eigenvalue of the symmetrized difference a - b; the "margin" by
// which the order relation a >= b holds.
[[nodiscard]] inline double order_margin(const Matrix& a, const Matrix& b) {
  Matrix d = a - b;
  d = ((d + d.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Top eigenpair of a symmetric matrix.
struct EigenPair {
  double value;
  Vector vector;
};

[[nodiscard]] inline EigenPair top_eigenpair(const Matrix& a) {
  if (!is_symmetric(a))
    throw std::invalid_argument("top_eigenpair: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.transpose()) / 2.0);
  const int last = static_cast<int>(a.rows()) - 1;
  Vector v = es.eigenvectors().col(last);
  // Deterministic sign convention: largest-magnitude entry is positive.
  int imax = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0) v = -v;
  return {es.eigenvalues()[last], v};
}

}  // namespace concfield
