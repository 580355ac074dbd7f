#ifndef PIGA_TYPES_HPP
#define PIGA_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace piga {

using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

using SpMat    = Eigen::SparseMatrix<double>;
using CSpMat   = Eigen::SparseMatrix<cplx>;
using Triplet  = Eigen::Triplet<double>;

inline constexpr double pi = 3.14159265358979323846;

} // namespace piga

#endif
