#pragma once

#include <algorithm>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "irpdfl/model.hpp"

namespace irpdfl::detail {

// Normal-equations solver for A Theta A' with Theta diagonal, dense factor.
class NormalSystem {
 public:
  explicit NormalSystem(const SparseMatrix& A) : A_(A), m_(A.rows()) {}

  void factor(const Eigen::VectorXd& theta) {
    theta_ = theta;
    M_.setZero(m_, m_);
    for (Eigen::Index j = 0; j < A_.outerSize(); ++j) {
      const double w = theta[j];
      for (SparseMatrix::InnerIterator a(A_, j); a; ++a)
        for (SparseMatrix::InnerIterator b(A_, j); b; ++b)
          M_(a.row(), b.row()) += w * a.value() * b.value();
    }
    const double diag_max = m_ > 0 ? M_.diagonal().maxCoeff() : 0.0;
    reg_ = 1e-14 * std::max(1.0, diag_max);
    M_.diagonal().array() += reg_;
    ldlt_.compute(M_);
  }

  // Solves (A Theta A') v = rhs with two steps of iterative refinement
  // against the unregularized operator.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (m_ == 0) return Eigen::VectorXd();
    Eigen::VectorXd v = ldlt_.solve(rhs);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd r = rhs - apply(v);
      v += ldlt_.solve(r);
    }
    return v;
  }

 private:
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd atv = A_.transpose() * v;
    return A_ * theta_.cwiseProduct(atv);
  }

  const SparseMatrix& A_;
  Eigen::Index m_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd M_;
  double reg_ = 0.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// Augmented system [-inv(Theta) A'; A 0] [dx; dnu] = [r1; r2] by dense LU
// with partial pivoting. Slower than the normal equations but stable when
// Theta is badly spread.
class AugmentedSystem {
 public:
  explicit AugmentedSystem(const SparseMatrix& A) : A_(A), m_(A.rows()), n_(A.cols()) {}

  bool factored() const { return factored_; }

  void factor(const Eigen::VectorXd& theta) {
    K_.setZero(n_ + m_, n_ + m_);
    K_.diagonal().head(n_) = -theta.cwiseInverse();
    for (Eigen::Index j = 0; j < A_.outerSize(); ++j)
      for (SparseMatrix::InnerIterator a(A_, j); a; ++a) {
        K_(n_ + a.row(), j) = a.value();
        K_(j, n_ + a.row()) = a.value();
      }
    lu_.compute(K_);
    factored_ = true;
  }

  // Two steps of iterative refinement.
  void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
             Eigen::VectorXd& dnu) const {
    Eigen::VectorXd rhs(n_ + m_);
    rhs << r1, r2;
    Eigen::VectorXd v = lu_.solve(rhs);
    for (int k = 0; k < 2; ++k) v += lu_.solve(rhs - K_ * v);
    dx = v.head(n_);
    dnu = v.tail(m_);
  }

 private:
  const SparseMatrix& A_;
  Eigen::Index m_, n_;
  Eigen::MatrixXd K_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool factored_ = false;
};

}  // namespace irpdfl::detail
