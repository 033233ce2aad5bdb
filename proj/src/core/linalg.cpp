#include "smelab/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "smelab/core/errors.hpp"

namespace smelab {

MatrixXd sym_function(const MatrixXd& a, const std::function<double(double)>& f) {
    if (a.rows() != a.cols()) throw std::invalid_argument("sym_function: matrix not square");
    if (a.rows() == 1) return MatrixXd::Constant(1, 1, f(a(0, 0)));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
    VectorXd fl = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd sym_sqrt_psd(const MatrixXd& a, double tol) {
    if (a.rows() != a.cols()) throw std::invalid_argument("sym_sqrt_psd: matrix not square");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
    VectorXd lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < 0.0) {
            if (lam(i) < -tol * scale)
                throw NumericError("matrix not positive semidefinite: eigenvalue " + std::to_string(lam(i)));
            lam(i) = 0.0;
        }
    }
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd sym_exp(const MatrixXd& a, double s) {
    return sym_function(a, [s](double x) { return std::exp(s * x); });
}

double frobenius_inner(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

bool is_symmetric(const MatrixXd& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool commutes(const MatrixXd& a, const MatrixXd& b, double tol) {
    const double scale = std::max(1.0, (a * b).cwiseAbs().maxCoeff());
    return (a * b - b * a).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace smelab
