#pragma once

#include <Eigen/Dense>
#include <functional>

namespace smelab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// f(A) for symmetric A via eigendecomposition.
MatrixXd sym_function(const MatrixXd& a, const std::function<double(double)>& f);

/**
 * Square root of a symmetric PSD matrix. Eigenvalues in (-tol * scale, 0) are
 * clamped to 0 with scale = max(1, max |lambda|); anything more negative throws NumericError.
 */
MatrixXd sym_sqrt_psd(const MatrixXd& a, double tol = 1e-12);

// exp(s * A) for symmetric A.
MatrixXd sym_exp(const MatrixXd& a, double s = 1.0);

// <A, B> = trace(A^T B).
double frobenius_inner(const MatrixXd& a, const MatrixXd& b);

bool is_symmetric(const MatrixXd& a, double tol = 1e-10);

// True when AB = BA to relative tolerance.
bool commutes(const MatrixXd& a, const MatrixXd& b, double tol = 1e-10);

}  // namespace smelab
