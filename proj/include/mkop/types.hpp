#pragma once

#include <complex>

#include <Eigen/Dense>

namespace mkop {

using cplx = std::complex<double>;

using Eigen::Matrix2cd;
using Eigen::Matrix2d;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace mkop
