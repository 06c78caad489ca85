// Copyright 2026 The typecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TYPECAL_LOGISTIC_H_
#define TYPECAL_LOGISTIC_H_

#include <Eigen/Dense>
#include <cmath>

namespace typecal {

template <typename Scalar>
Scalar Sigmoid(Scalar z) {
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar Softplus(Scalar z) {
  return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename Scalar>
struct LogisticFit {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coef;
  Scalar intercept = 0;
  int iterations = 0;
  bool converged = false;
  // Number of iterations that fell back to a gradient step.
  int gradient_steps = 0;
};

template <typename Scalar>
struct LogisticObjective {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // Design matrix with a trailing column of ones for the intercept.
  const Matrix& design;
  const Vector& labels;  // In {0, 1}.
  Scalar l2;

  // Sum of binary cross-entropy plus l2/2 * |w|^2 (intercept excluded).
  Scalar Value(const Vector& theta) const {
    const Vector z = design * theta;
    Scalar loss = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      loss += Softplus(z[i]) - labels[i] * z[i];
    }
    const Eigen::Index d = theta.size() - 1;
    return loss + Scalar(0.5) * l2 * theta.head(d).squaredNorm();
  }

  Vector Gradient(const Vector& theta, Vector* weights = nullptr) const {
    const Vector z = design * theta;
    Vector residual(z.size());
    if (weights != nullptr) weights->resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const Scalar p = Sigmoid(z[i]);
      residual[i] = p - labels[i];
      if (weights != nullptr) (*weights)[i] = p * (Scalar(1) - p);
    }
    Vector g = design.transpose() * residual;
    const Eigen::Index d = theta.size() - 1;
    g.head(d) += l2 * theta.head(d);
    return g;
  }
};

// L2-regularized logistic regression by damped Newton (IRLS). Starts from
// zero; each Newton direction is backtracked (step halving) until the
// objective satisfies the Armijo condition. When the Hessian factorization
// fails or is ill-conditioned the iteration takes a step-halved gradient
// step instead. Stops when the gradient norm drops below `tol` or no step
// decreases the objective. Fully deterministic for fixed inputs.
template <typename DerivedX, typename DerivedY>
LogisticFit<typename DerivedX::Scalar> FitLogisticIrls(
    const Eigen::MatrixBase<DerivedX>& features,
    const Eigen::MatrixBase<DerivedY>& labels,
    typename DerivedX::Scalar l2, int max_iters, typename DerivedX::Scalar tol) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  Matrix design(n, d + 1);
  design.leftCols(d) = features;
  design.col(d).setOnes();
  const Vector y = labels;
  const LogisticObjective<Scalar> objective{design, y, l2};

  Vector theta = Vector::Zero(d + 1);
  Scalar value = objective.Value(theta);
  LogisticFit<Scalar> fit;
  Vector weights;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Vector grad = objective.Gradient(theta, &weights);
    if (grad.norm() < tol) {
      fit.converged = true;
      break;
    }
    Matrix hessian = design.transpose() * weights.asDiagonal() * design;
    hessian.diagonal().head(d).array() += l2;

    Vector direction;
    Eigen::LDLT<Matrix> ldlt(hessian);
    const bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                           ldlt.rcond() > Scalar(1e-13);
    if (newton_ok) direction = -ldlt.solve(grad);
    if (!newton_ok || !direction.allFinite() || grad.dot(direction) >= 0) {
      direction = -grad;
      ++fit.gradient_steps;
    }

    const Scalar slope = grad.dot(direction);
    Scalar step = 1;
    Vector candidate;
    Scalar candidate_value = value;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step /= 2) {
      candidate = theta + step * direction;
      candidate_value = objective.Value(candidate);
      if (candidate_value <= value + Scalar(1e-4) * step * slope) {
        accepted = true;
        break;
      }
    }
    fit.iterations = iter + 1;
    if (!accepted) break;
    theta = candidate;
    value = candidate_value;
  }
  if (!fit.converged) fit.converged = objective.Gradient(theta).norm() < tol;
  fit.coef = theta.head(d);
  fit.intercept = theta[d];
  return fit;
}

}  // namespace typecal

#endif  // TYPECAL_LOGISTIC_H_
